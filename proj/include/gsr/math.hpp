#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace gsr {

inline double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Inverse of sigmoid on (0, 1); unbounded at the endpoints.
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Standard normal CDF.
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

inline double norm_pdf(double z) { return 0.39894228040143267794 * std::exp(-0.5 * z * z); }

// Euclidean projection onto the probability simplex {w >= 0, sum w = 1}.
inline Eigen::VectorXd simplex_project(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    Eigen::VectorXd u = v;
    std::sort(u.data(), u.data() + n, std::greater<double>());
    double css = 0.0;
    double tau = 0.0;
    int k = 0;
    for (int i = 0; i < n; ++i) {
        css += u[i];
        const double t = (css - 1.0) / (i + 1);
        if (u[i] - t > 0.0) {
            tau = t;
            k = i + 1;
        }
    }
    (void)k;
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = std::max(0.0, v[i] - tau);
    return w;
}

// Shortest-round-trip decimal text for a double (used by CSV export).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace gsr
