#include "gsr/kernel.hpp"

#include <cmath>

namespace gsr {

namespace {

inline double scaled_sq_dist(const KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double r2 = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / k.lengthscales[i];
        r2 += d * d;
    }
    return r2;
}

inline double corr_from_r2(KernelFamily fam, double r2) {
    switch (fam) {
        case KernelFamily::rbf:
            return std::exp(-0.5 * r2);
        case KernelFamily::matern52: {
            const double z = std::sqrt(5.0 * r2);
            return (1.0 + z + z * z / 3.0) * std::exp(-z);
        }
    }
    return 0.0;
}

} // namespace

double kernel_value(const KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return k.output_scale * corr_from_r2(k.family, scaled_sq_dist(k, a, b));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const Eigen::MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = k.output_scale;
        for (int j = i + 1; j < n; ++j) {
            const double v = kernel_value(k, X.row(i).transpose(), X.row(j).transpose());
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Eigen::MatrixXd cross_matrix(const KernelSpec& k, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < B.rows(); ++j)
            K(i, j) = kernel_value(k, A.row(i).transpose(), B.row(j).transpose());
    return K;
}

} // namespace gsr
