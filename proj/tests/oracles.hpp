#pragma once

// Test-only oracles, kept independent of the library's implementation paths:
// plain Gaussian elimination instead of Cholesky, direct kernel formulas, and
// series evaluations for special functions.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

// Hand-rolled Gaussian elimination with partial pivoting.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd A, Eigen::VectorXd b) {
    const int n = static_cast<int>(A.rows());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(pivot, col))) pivot = r;
        if (A(pivot, col) == 0.0) throw std::runtime_error("gauss_solve: singular matrix");
        A.row(col).swap(A.row(pivot));
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            const double f = A(r, col) / A(col, col);
            A.row(r).tail(n - col) -= f * A.row(col).tail(n - col);
            b[r] -= f * b[col];
        }
    }
    Eigen::VectorXd x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A(r, c) * x[c];
        x[r] = s / A(r, r);
    }
    return x;
}

inline double log_det_via_gauss(Eigen::MatrixXd A) {
    const int n = static_cast<int>(A.rows());
    double log_det = 0.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(pivot, col))) pivot = r;
        if (pivot != col) A.row(col).swap(A.row(pivot)); // symmetric PD: pivots stay positive
        for (int r = col + 1; r < n; ++r) {
            const double f = A(r, col) / A(col, col);
            A.row(r).tail(n - col) -= f * A.row(col).tail(n - col);
        }
        log_det += std::log(std::abs(A(col, col)));
    }
    return log_det;
}

// Direct kernel formulas (no shared code with the library).
inline double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& ls,
                  double scale) {
    double r2 = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / ls[i];
        r2 += d * d;
    }
    return scale * std::exp(-0.5 * r2);
}

inline double matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& ls,
                       double scale) {
    double r2 = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / ls[i];
        r2 += d * d;
    }
    const double z = std::sqrt(5.0 * r2);
    return scale * (1.0 + z + z * z / 3.0) * std::exp(-z);
}

// GP mean/variance by assembling (K + lambda I) and solving with Gaussian
// elimination; no factorization reuse.
struct DenseGpOracle {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd ls;
    double scale;
    double lambda;
    bool use_matern;

    double k(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return use_matern ? matern52(a, b, ls, scale) : rbf(a, b, ls, scale);
    }

    std::pair<double, double> predict(const Eigen::VectorXd& q) const {
        const int n = static_cast<int>(X.rows());
        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K(i, j) = k(X.row(i).transpose(), X.row(j).transpose());
        K.diagonal().array() += lambda;
        Eigen::VectorXd kx(n);
        for (int i = 0; i < n; ++i) kx[i] = k(q, X.row(i).transpose());
        const Eigen::VectorXd alpha = gauss_solve(K, y);
        const Eigen::VectorXd w = gauss_solve(K, kx);
        const double mean = kx.dot(alpha);
        const double var = k(q, q) - kx.dot(w);
        return {mean, var};
    }
};

// Standard normal CDF via the series expansion Phi(z) = 1/2 + phi(z) *
// sum_{k>=0} z^{2k+1} / (1*3*...*(2k+1)); accurate far beyond 1e-13 for |z|<=6.
inline double norm_cdf_series(double z) {
    if (z < -8.0) return 0.0;
    if (z > 8.0) return 1.0;
    double term = z;
    double sum = z;
    double denom = 1.0;
    for (int k = 1; k < 200; ++k) {
        denom += 2.0;
        term *= z * z / denom;
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
    return 0.5 + pdf * sum;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace oracle
