#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace gsr {

enum class KernelFamily { rbf, matern52 };

// Stationary kernel with per-dimension lengthscales and an output scale
// (the output scale is the prior variance, so k(x,x) = output_scale).
struct KernelSpec {
    KernelFamily family = KernelFamily::matern52;
    Eigen::VectorXd lengthscales;
    double output_scale = 1.0;

    void check() const {
        if (output_scale <= 0.0) throw std::invalid_argument("KernelSpec: output_scale must be positive");
        if (lengthscales.size() == 0) throw std::invalid_argument("KernelSpec: empty lengthscales");
        for (int i = 0; i < lengthscales.size(); ++i)
            if (!(lengthscales[i] > 0.0)) throw std::invalid_argument("KernelSpec: lengthscales must be positive");
    }

    static KernelSpec isotropic(KernelFamily fam, int dim, double ls, double scale = 1.0) {
        KernelSpec k;
        k.family = fam;
        k.lengthscales = Eigen::VectorXd::Constant(dim, ls);
        k.output_scale = scale;
        return k;
    }
};

double kernel_value(const KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// K(X, X), symmetric.
Eigen::MatrixXd gram_matrix(const KernelSpec& k, const Eigen::MatrixXd& X);

// K(A, B) with rows of A and B as points.
Eigen::MatrixXd cross_matrix(const KernelSpec& k, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

} // namespace gsr
