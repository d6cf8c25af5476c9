#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gsr/kernel.hpp"
#include "gsr/rng.hpp"

namespace gsr {

class Rng;

struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dim() const { return static_cast<int>(lower.size()); }
    double width(int d) const { return upper[d] - lower[d]; }
    bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const {
        for (int d = 0; d < dim(); ++d)
            if (x[d] < lower[d] - tol || x[d] > upper[d] + tol) return false;
        return true;
    }
    Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
        return x.cwiseMax(lower).cwiseMin(upper);
    }
    bool nondegenerate() const {
        for (int d = 0; d < dim(); ++d)
            if (!(lower[d] < upper[d])) return false;
        return true;
    }
    static Box of(std::initializer_list<double> lo, std::initializer_list<double> hi) {
        Box b;
        b.lower = Eigen::Map<const Eigen::VectorXd>(lo.begin(), static_cast<long>(lo.size()));
        b.upper = Eigen::Map<const Eigen::VectorXd>(hi.begin(), static_cast<long>(hi.size()));
        return b;
    }
    static Box cube(int dim, double lo, double hi) {
        Box b;
        b.lower = Eigen::VectorXd::Constant(dim, lo);
        b.upper = Eigen::VectorXd::Constant(dim, hi);
        return b;
    }
};

struct GpDataset {
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> outputs;
    double noise_lambda = 1e-6;

    int size() const { return static_cast<int>(inputs.size()); }
    void append(const Eigen::VectorXd& x, double y) {
        inputs.push_back(x);
        outputs.push_back(y);
    }
    Eigen::MatrixXd input_matrix() const {
        if (inputs.empty()) return Eigen::MatrixXd(0, 0);
        Eigen::MatrixXd X(static_cast<long>(inputs.size()), inputs.front().size());
        for (long i = 0; i < X.rows(); ++i) X.row(i) = inputs[static_cast<size_t>(i)].transpose();
        return X;
    }
    Eigen::VectorXd output_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(outputs.data(), static_cast<long>(outputs.size()));
    }
};

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact GP posterior backed by a Cholesky factorization of (K + lambda I).
// Immutable once constructed; an empty-dataset posterior is the prior.
class GpPosterior {
public:
    static GpPosterior prior(const KernelSpec& kernel);
    // Jitter escalation on factorization failure: 1e-10 * 10^k up to 1e-4, then throws.
    static GpPosterior fit(const GpDataset& data, const KernelSpec& kernel);

    double mean(const Eigen::VectorXd& x) const;
    // Reported variance is clamped at zero.
    double variance(const Eigen::VectorXd& x) const;

    // Batched prediction for acquisition search; rows of X are query points.
    void predict(const Eigen::MatrixXd& X, Eigen::VectorXd& mean_out, Eigen::VectorXd& var_out) const;

    const KernelSpec& kernel() const { return kernel_; }
    int train_size() const { return static_cast<int>(X_.rows()); }
    double log_det() const { return log_det_; }   // log det(K + lambda I)
    double quad_form() const { return quad_; }    // Y^T (K + lambda I)^{-1} Y

private:
    KernelSpec kernel_;
    Eigen::MatrixXd X_;
    Eigen::MatrixXd L_;      // lower Cholesky of K + lambda I (+ jitter if needed)
    Eigen::VectorXd alpha_;  // (K + lambda I)^{-1} Y
    double log_det_ = 0.0;
    double quad_ = 0.0;
};

GpPosterior fit_posterior(const GpDataset& data, const KernelSpec& kernel);

// Empirical information gain of the observed design:
// gamma = 1/2 log det(I + lambda^{-1} K). Zero for an empty dataset.
double info_gain(const GpDataset& data, const KernelSpec& kernel);

struct UcbSchedule {
    enum class Mode { theoretical, fixed_beta };
    Mode mode = Mode::fixed_beta;
    double fixed_beta = 4.0;
    double rkhs_bound = 1.0;    // B
    double noise_proxy = 1.0;   // sigma_noise
    double delta_f_task = 0.05; // per-task confidence budget

    void check() const {
        if (!(delta_f_task > 0.0 && delta_f_task < 1.0))
            throw std::invalid_argument("UcbSchedule: delta_f_task must lie in (0,1)");
        if (mode == Mode::fixed_beta && !(fixed_beta > 0.0))
            throw std::invalid_argument("UcbSchedule: fixed beta must be positive");
    }
    static UcbSchedule fixed(double beta) {
        UcbSchedule s;
        s.mode = Mode::fixed_beta;
        s.fixed_beta = beta;
        return s;
    }
    static UcbSchedule theoretical(double B, double sigma_noise, double delta) {
        UcbSchedule s;
        s.mode = Mode::theoretical;
        s.rkhs_bound = B;
        s.noise_proxy = sigma_noise;
        s.delta_f_task = delta;
        return s;
    }
};

// beta_s; theoretical mode squares
//   beta^{1/2} = B + sigma_noise * sqrt(2 (gamma_{s-1} + 1 + ln(1/delta))).
double beta(int s, double gamma_prev, const UcbSchedule& schedule);

// C_lambda = 2 / log(1 + 1/lambda).
double c_lambda(double lambda);

// Optimization-gap bound eps^f_s = 2 sqrt(C_lambda beta gamma / s).
double opt_gap(int s, double beta_s, double gamma_s, double lambda);

struct GapSchedule {
    enum class Mode { theoretical, surrogate };
    Mode mode = Mode::theoretical;
    double eps0 = 1.0; // surrogate: eps0 / sqrt(s)

    double value(int s, double beta_s, double gamma_s, double lambda) const {
        if (mode == Mode::surrogate) return eps0 / std::sqrt(static_cast<double>(s));
        return opt_gap(s, beta_s, gamma_s, lambda);
    }
    static GapSchedule surrogate(double eps0_) {
        GapSchedule g;
        g.mode = Mode::surrogate;
        g.eps0 = eps0_;
        return g;
    }
};

// Per-task confidence split delta_f / (pi^2 i^2); summable over all task indices.
double per_task_delta(int task_index, double delta_f);

struct SearchBudget {
    int raw_samples = 512;
    int restarts = 10;
    int refine_steps = 50;
    double step_init_frac = 0.25;
    double step_min_frac = 1e-4;
};

// Argmax of mean + sqrt(beta) * sd over the given candidate rows; ties to the lower index.
int ucb_argmax_candidates(const GpPosterior& post, double beta_s, const Eigen::MatrixXd& candidates);

// Generic acquisition search: seeded raw sampling plus coordinate-descent
// refinement of a score over (posterior mean, posterior sd). extra_seeds rows,
// when given, join the refinement starts (e.g. the current incumbent design).
using AcqScore = std::function<double(double mu, double sd)>;
double acq_select_value(const GpPosterior& post, const AcqScore& score, const Box& domain,
                        const SearchBudget& budget, Rng& rng, Eigen::VectorXd* argmax_out,
                        const Eigen::MatrixXd* extra_seeds = nullptr);

// Closed-form expected improvement over a best value (inputs in the posterior's units).
double expected_improvement(double mu, double sd, double best);

// Seeded raw sampling plus coordinate-descent refinement; deterministic given the rng state.
Eigen::VectorXd ucb_select(const GpPosterior& post, double beta_s, const Box& domain,
                           const SearchBudget& budget, Rng& rng);

// Acquisition value at the point ucb_select would return (used by the box-level selector).
double ucb_select_value(const GpPosterior& post, double beta_s, const Box& domain,
                        const SearchBudget& budget, Rng& rng, Eigen::VectorXd* argmax_out = nullptr);

// Exact log marginal likelihood of the dataset under the kernel:
// -1/2 Y^T (K+lI)^{-1} Y - 1/2 log det(K+lI) - n/2 log 2pi.
double log_marginal_likelihood(const GpDataset& data, const KernelSpec& kernel);

// Grid argmax of the marginal likelihood; near-ties break toward the larger
// lengthscale. Returns `previous` when every candidate is ill-conditioned.
KernelSpec fit_hyperparameters(const GpDataset& data, const std::vector<KernelSpec>& grid,
                               const KernelSpec& previous);

// Default grid: 8 lengthscale multipliers (factor 2, containing 1) x 4 output scales.
std::vector<KernelSpec> default_hyper_grid(const KernelSpec& base);

} // namespace gsr
