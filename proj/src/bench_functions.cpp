#include "gsr/bench_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace gsr::bench {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ackley(const Eigen::VectorXd& x) {
    const double a = 20.0, b = 0.2, c = 2.0 * kPi;
    const double d = static_cast<double>(x.size());
    double sq = 0.0, cs = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        sq += x[i] * x[i];
        cs += std::cos(c * x[i]);
    }
    return -a * std::exp(-b * std::sqrt(sq / d)) - std::exp(cs / d) + a + std::exp(1.0);
}

double beale(const Eigen::VectorXd& v) {
    const double x = v[0], y = v[1];
    const double t1 = 1.5 - x + x * y;
    const double t2 = 2.25 - x + x * y * y;
    const double t3 = 2.625 - x + x * y * y * y;
    return t1 * t1 + t2 * t2 + t3 * t3;
}

double branin(const Eigen::VectorXd& v) {
    const double x = v[0], y = v[1];
    const double a = 1.0, b = 5.1 / (4.0 * kPi * kPi), c = 5.0 / kPi, r = 6.0, s = 10.0,
                 t = 1.0 / (8.0 * kPi);
    const double q = y - b * x * x + c * x - r;
    return a * q * q + s * (1.0 - t) * std::cos(x) + s;
}

double hartmann6(const Eigen::VectorXd& x) {
    static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    static const double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                   {0.05, 10, 17, 0.1, 8, 14},
                                   {3, 3.5, 1.7, 10, 17, 8},
                                   {17, 8, 0.05, 10, 0.1, 14}};
    static const double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                   {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                   {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                   {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
    double outer = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double d = x[j] - P[i][j];
            inner += A[i][j] * d * d;
        }
        outer += alpha[i] * std::exp(-inner);
    }
    return -outer;
}

double levy(const Eigen::VectorXd& x) {
    const int d = static_cast<int>(x.size());
    auto w = [&](int i) { return 1.0 + (x[i] - 1.0) / 4.0; };
    const double w0 = w(0);
    double val = std::sin(kPi * w0) * std::sin(kPi * w0);
    for (int i = 0; i < d - 1; ++i) {
        const double wi = w(i);
        const double s = std::sin(kPi * wi + 1.0);
        val += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
    }
    const double wd = w(d - 1);
    const double s = std::sin(2.0 * kPi * wd);
    val += (wd - 1.0) * (wd - 1.0) * (1.0 + s * s);
    return val;
}

double rosenbrock(const Eigen::VectorXd& x) {
    double val = 0.0;
    for (int i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        val += 100.0 * a * a + b * b;
    }
    return val;
}

double griewank(const Eigen::VectorXd& x) {
    double sum = 0.0, prod = 1.0;
    for (int i = 0; i < x.size(); ++i) {
        sum += x[i] * x[i] / 4000.0;
        prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
    }
    return sum - prod + 1.0;
}

double styblinski_tang(const Eigen::VectorXd& x) {
    double val = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double v = x[i];
        val += v * v * v * v - 16.0 * v * v + 5.0 * v;
    }
    return 0.5 * val;
}

double six_hump_camel(const Eigen::VectorXd& v) {
    const double x = v[0], y = v[1];
    return (4.0 - 2.1 * x * x + x * x * x * x / 3.0) * x * x + x * y +
           (-4.0 + 4.0 * y * y) * y * y;
}

} // namespace

BenchId bench_id_from_name(const std::string& name) {
    if (name == "ackley") return BenchId::ackley;
    if (name == "beale") return BenchId::beale;
    if (name == "branin") return BenchId::branin;
    if (name == "hartmann6") return BenchId::hartmann6;
    if (name == "levy") return BenchId::levy;
    if (name == "rosenbrock") return BenchId::rosenbrock;
    if (name == "griewank") return BenchId::griewank;
    if (name == "styblinski_tang") return BenchId::styblinski_tang;
    if (name == "six_hump_camel") return BenchId::six_hump_camel;
    throw std::invalid_argument("unknown benchmark function: " + name);
}

std::string bench_name(BenchId id) {
    switch (id) {
        case BenchId::ackley: return "ackley";
        case BenchId::beale: return "beale";
        case BenchId::branin: return "branin";
        case BenchId::hartmann6: return "hartmann6";
        case BenchId::levy: return "levy";
        case BenchId::rosenbrock: return "rosenbrock";
        case BenchId::griewank: return "griewank";
        case BenchId::styblinski_tang: return "styblinski_tang";
        case BenchId::six_hump_camel: return "six_hump_camel";
    }
    return "?";
}

double eval_std(BenchId id, const Eigen::VectorXd& x) {
    switch (id) {
        case BenchId::ackley: return ackley(x);
        case BenchId::beale: return beale(x);
        case BenchId::branin: return branin(x);
        case BenchId::hartmann6: return hartmann6(x);
        case BenchId::levy: return levy(x);
        case BenchId::rosenbrock: return rosenbrock(x);
        case BenchId::griewank: return griewank(x);
        case BenchId::styblinski_tang: return styblinski_tang(x);
        case BenchId::six_hump_camel: return six_hump_camel(x);
    }
    throw std::logic_error("unreachable");
}

BenchmarkSpec make_benchmark(BenchId id, int dim, double noise_sigma) {
    BenchmarkSpec s;
    s.id = id;
    s.dim = dim;
    s.noise_sigma = noise_sigma;
    switch (id) {
        case BenchId::ackley: s.bounds = Box::cube(dim, -5.0, 5.0); break;
        case BenchId::beale:
            if (dim != 2) throw std::invalid_argument("beale is 2-dimensional");
            s.bounds = Box::cube(2, -4.5, 4.5);
            break;
        case BenchId::branin:
            if (dim != 2) throw std::invalid_argument("branin is 2-dimensional");
            s.bounds = Box::of({-5.0, 0.0}, {10.0, 15.0});
            break;
        case BenchId::hartmann6:
            if (dim != 6) throw std::invalid_argument("hartmann6 is 6-dimensional");
            s.bounds = Box::cube(6, 0.0, 1.0);
            break;
        case BenchId::levy: s.bounds = Box::cube(dim, -10.0, 10.0); break;
        case BenchId::rosenbrock: s.bounds = Box::cube(dim, -2.0, 2.0); break;
        case BenchId::griewank: s.bounds = Box::cube(dim, -600.0, 600.0); break;
        case BenchId::styblinski_tang: s.bounds = Box::cube(dim, -5.0, 5.0); break;
        case BenchId::six_hump_camel:
            if (dim != 2) throw std::invalid_argument("six_hump_camel is 2-dimensional");
            s.bounds = Box::of({-3.0, -2.0}, {3.0, 2.0});
            break;
    }
    return s;
}

double BenchmarkSpec::optimum_value() const {
    double min_val = 0.0;
    switch (id) {
        case BenchId::ackley: min_val = 0.0; break;
        case BenchId::beale: min_val = 0.0; break;
        case BenchId::branin: min_val = 0.3978873577297383; break;
        case BenchId::hartmann6: min_val = -3.322368011391339; break;
        case BenchId::levy: min_val = 0.0; break;
        case BenchId::rosenbrock: min_val = 0.0; break;
        case BenchId::griewank: min_val = 0.0; break;
        case BenchId::styblinski_tang: min_val = -39.16616570377142 * dim; break;
        case BenchId::six_hump_camel: min_val = -1.031628453489877; break;
    }
    return negate ? -min_val : min_val;
}

Eigen::VectorXd BenchmarkSpec::optimizer() const {
    Eigen::VectorXd x(dim);
    switch (id) {
        case BenchId::ackley: x.setZero(); break;
        case BenchId::beale:
            x[0] = 3.0;
            x[1] = 0.5;
            break;
        case BenchId::branin:
            x[0] = -kPi;
            x[1] = 12.275;
            break;
        case BenchId::hartmann6: {
            const double opt[6] = {0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573};
            for (int i = 0; i < 6; ++i) x[i] = opt[i];
            break;
        }
        case BenchId::levy: x.setOnes(); break;
        case BenchId::rosenbrock: x.setOnes(); break;
        case BenchId::griewank: x.setZero(); break;
        case BenchId::styblinski_tang: x.setConstant(-2.903534018185960); break;
        case BenchId::six_hump_camel:
            x[0] = 0.08984201368301331;
            x[1] = -0.7126564032704135;
            break;
    }
    return x;
}

double eval_benchmark_true(const BenchmarkSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.dim) throw std::invalid_argument("eval_benchmark: dimension mismatch");
    if (!spec.bounds.contains(x, 1e-9)) throw std::invalid_argument("eval_benchmark: x out of bounds");
    const double v = eval_std(spec.id, x);
    return spec.negate ? -v : v;
}

double eval_benchmark(const BenchmarkSpec& spec, const Eigen::VectorXd& x, Rng& rng) {
    double y = eval_benchmark_true(spec, x);
    if (spec.noise_sigma > 0.0) y += spec.noise_sigma * rng.normal();
    return y;
}

} // namespace gsr::bench
