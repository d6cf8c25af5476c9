#pragma once

#include <string>

#include "gsr/gp.hpp"
#include "gsr/rng.hpp"

namespace gsr::bench {

enum class BenchId {
    ackley,
    beale,
    branin,
    hartmann6,
    levy,
    rosenbrock,
    griewank,
    styblinski_tang,
    six_hump_camel
};

BenchId bench_id_from_name(const std::string& name);
std::string bench_name(BenchId id);

// Standard minimization form f_std(x).
double eval_std(BenchId id, const Eigen::VectorXd& x);

struct BenchmarkSpec {
    BenchId id = BenchId::branin;
    int dim = 2;
    Box bounds;
    double noise_sigma = 0.0;
    bool negate = true; // maximize -f_std

    double optimum_value() const;      // optimum of the (negated) objective over the standard domain
    Eigen::VectorXd optimizer() const; // one known optimizer
};

// Standard domain and dimension for the function (dim must match fixed-dim functions).
BenchmarkSpec make_benchmark(BenchId id, int dim, double noise_sigma = 0.0);

// Noisy oracle: y = -f_std(x) + N(0, sigma^2) when negate. Throws on out-of-bounds x.
double eval_benchmark(const BenchmarkSpec& spec, const Eigen::VectorXd& x, Rng& rng);
double eval_benchmark_true(const BenchmarkSpec& spec, const Eigen::VectorXd& x);

} // namespace gsr::bench
