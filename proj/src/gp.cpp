#include "gsr/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsr/math.hpp"
#include "gsr/rng.hpp"

namespace gsr {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cholesky with jitter escalation. Returns the factor and the jitter used.
bool chol_with_jitter(Eigen::MatrixXd A, Eigen::MatrixXd& L_out) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
        L_out = llt.matrixL();
        return true;
    }
    for (double jitter = 1e-10; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd Aj = A;
        Aj.diagonal().array() += jitter;
        llt.compute(Aj);
        if (llt.info() == Eigen::Success) {
            L_out = llt.matrixL();
            return true;
        }
    }
    return false;
}

} // namespace

GpPosterior GpPosterior::prior(const KernelSpec& kernel) {
    kernel.check();
    GpPosterior p;
    p.kernel_ = kernel;
    return p;
}

GpPosterior GpPosterior::fit(const GpDataset& data, const KernelSpec& kernel) {
    kernel.check();
    if (data.size() == 0) return prior(kernel);
    if (data.outputs.size() != data.inputs.size())
        throw std::invalid_argument("GpDataset: inputs/outputs length mismatch");
    if (!(data.noise_lambda > 0.0)) throw std::invalid_argument("GpDataset: noise_lambda must be positive");

    GpPosterior p;
    p.kernel_ = kernel;
    p.X_ = data.input_matrix();
    Eigen::MatrixXd K = gram_matrix(kernel, p.X_);
    K.diagonal().array() += data.noise_lambda;
    if (!chol_with_jitter(K, p.L_))
        throw IllConditionedError("GP factorization failed after max-jitter escalation");

    const Eigen::VectorXd y = data.output_vector();
    // alpha = (K + lI)^{-1} y  via two triangular solves
    Eigen::VectorXd tmp = p.L_.triangularView<Eigen::Lower>().solve(y);
    p.quad_ = tmp.squaredNorm();
    p.alpha_ = p.L_.transpose().triangularView<Eigen::Upper>().solve(tmp);
    p.log_det_ = 2.0 * p.L_.diagonal().array().log().sum();
    return p;
}

GpPosterior fit_posterior(const GpDataset& data, const KernelSpec& kernel) {
    return GpPosterior::fit(data, kernel);
}

double GpPosterior::mean(const Eigen::VectorXd& x) const {
    if (X_.rows() == 0) return 0.0;
    Eigen::VectorXd kx(X_.rows());
    for (long i = 0; i < X_.rows(); ++i) kx[i] = kernel_value(kernel_, x, X_.row(i).transpose());
    return kx.dot(alpha_);
}

double GpPosterior::variance(const Eigen::VectorXd& x) const {
    const double kxx = kernel_.output_scale;
    if (X_.rows() == 0) return kxx;
    Eigen::VectorXd kx(X_.rows());
    for (long i = 0; i < X_.rows(); ++i) kx[i] = kernel_value(kernel_, x, X_.row(i).transpose());
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(kx);
    return std::max(0.0, kxx - v.squaredNorm());
}

void GpPosterior::predict(const Eigen::MatrixXd& X, Eigen::VectorXd& mean_out, Eigen::VectorXd& var_out) const {
    const long m = X.rows();
    mean_out.resize(m);
    var_out.resize(m);
    if (X_.rows() == 0) {
        mean_out.setZero();
        var_out.setConstant(kernel_.output_scale);
        return;
    }
    const Eigen::MatrixXd Kxs = cross_matrix(kernel_, X_, X); // n x m
    mean_out = Kxs.transpose() * alpha_;
    const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Kxs); // n x m
    for (long j = 0; j < m; ++j)
        var_out[j] = std::max(0.0, kernel_.output_scale - V.col(j).squaredNorm());
}

double info_gain(const GpDataset& data, const KernelSpec& kernel) {
    if (data.size() == 0) return 0.0;
    kernel.check();
    const Eigen::MatrixXd X = data.input_matrix();
    Eigen::MatrixXd A = gram_matrix(kernel, X) / data.noise_lambda;
    A.diagonal().array() += 1.0;
    // I + K/lambda has eigenvalues >= 1; plain Cholesky is safe.
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd L;
        if (!chol_with_jitter(A, L)) throw IllConditionedError("info_gain factorization failed");
        return L.diagonal().array().log().sum();
    }
    return Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

double beta(int s, double gamma_prev, const UcbSchedule& schedule) {
    if (s < 1) throw std::invalid_argument("beta: s must be >= 1");
    if (gamma_prev < 0.0) throw std::invalid_argument("beta: gamma_prev must be nonnegative");
    schedule.check();
    if (schedule.mode == UcbSchedule::Mode::fixed_beta) return schedule.fixed_beta;
    const double root = schedule.rkhs_bound +
                        schedule.noise_proxy *
                            std::sqrt(2.0 * (gamma_prev + 1.0 + std::log(1.0 / schedule.delta_f_task)));
    return root * root;
}

double c_lambda(double lambda) { return 2.0 / std::log1p(1.0 / lambda); }

double opt_gap(int s, double beta_s, double gamma_s, double lambda) {
    if (s < 1) throw std::invalid_argument("opt_gap: s must be >= 1");
    return 2.0 * std::sqrt(c_lambda(lambda) * beta_s * gamma_s / static_cast<double>(s));
}

double per_task_delta(int task_index, double delta_f) {
    if (task_index < 1) throw std::invalid_argument("per_task_delta: task_index must be >= 1");
    const double i = static_cast<double>(task_index);
    return delta_f / (kPi * kPi * i * i);
}

int ucb_argmax_candidates(const GpPosterior& post, double beta_s, const Eigen::MatrixXd& candidates) {
    Eigen::VectorXd mu, var;
    post.predict(candidates, mu, var);
    const double root_beta = std::sqrt(std::max(0.0, beta_s));
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < candidates.rows(); ++i) {
        const double v = mu[i] + root_beta * std::sqrt(var[i]);
        if (v > best_val) {
            best_val = v;
            best = static_cast<int>(i);
        }
    }
    return best;
}

double expected_improvement(double mu, double sd, double best) {
    const double imp = mu - best;
    if (sd < 1e-12) return std::max(0.0, imp);
    const double z = imp / sd;
    return std::max(0.0, imp * norm_cdf(z) + sd * norm_pdf(z));
}

double acq_select_value(const GpPosterior& post, const AcqScore& score, const Box& domain,
                        const SearchBudget& budget, Rng& rng, Eigen::VectorXd* argmax_out,
                        const Eigen::MatrixXd* extra_seeds) {
    if (!domain.nondegenerate()) throw std::invalid_argument("acq_select: degenerate domain");
    const int d = domain.dim();

    const int n_extra = extra_seeds ? static_cast<int>(extra_seeds->rows()) : 0;
    Eigen::MatrixXd raw(budget.raw_samples + n_extra, d);
    for (int i = 0; i < budget.raw_samples; ++i)
        for (int j = 0; j < d; ++j) raw(i, j) = rng.uniform(domain.lower[j], domain.upper[j]);
    for (int i = 0; i < n_extra; ++i)
        raw.row(budget.raw_samples + i) = domain.clamp(extra_seeds->row(i).transpose()).transpose();

    const int n_cand = static_cast<int>(raw.rows());
    Eigen::VectorXd mu, var;
    post.predict(raw, mu, var);
    Eigen::VectorXd acq(n_cand);
    for (int i = 0; i < n_cand; ++i) acq[i] = score(mu[i], std::sqrt(var[i]));

    std::vector<int> order(static_cast<size_t>(n_cand));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return acq[a] > acq[b]; });

    const auto acq_at = [&](const Eigen::VectorXd& x) {
        return score(post.mean(x), std::sqrt(post.variance(x)));
    };

    Eigen::VectorXd best_x = raw.row(order[0]).transpose();
    double best_val = acq[order[0]];

    // refinement starts: the top-ranked candidates plus every extra seed
    std::vector<int> starts;
    const int n_restarts = std::min(budget.restarts, n_cand);
    for (int r = 0; r < n_restarts; ++r) starts.push_back(order[static_cast<size_t>(r)]);
    for (int i = 0; i < n_extra; ++i) {
        const int idx = budget.raw_samples + i;
        if (std::find(starts.begin(), starts.end(), idx) == starts.end()) starts.push_back(idx);
    }

    for (int start_idx : starts) {
        Eigen::VectorXd x = raw.row(start_idx).transpose();
        double val = acq[start_idx];
        double step = budget.step_init_frac;
        for (int it = 0; it < budget.refine_steps; ++it) {
            bool improved = false;
            for (int j = 0; j < d; ++j) {
                const double delta = step * domain.width(j);
                for (double sign : {1.0, -1.0}) {
                    Eigen::VectorXd cand = x;
                    cand[j] = clip(x[j] + sign * delta, domain.lower[j], domain.upper[j]);
                    if (cand[j] == x[j]) continue;
                    const double v = acq_at(cand);
                    if (v > val) {
                        val = v;
                        x = cand;
                        improved = true;
                    }
                }
            }
            if (!improved) {
                step *= 0.5;
                if (step < budget.step_min_frac) break;
            }
        }
        if (val > best_val) {
            best_val = val;
            best_x = x;
        }
    }
    if (argmax_out) *argmax_out = best_x;
    return best_val;
}

double ucb_select_value(const GpPosterior& post, double beta_s, const Box& domain,
                        const SearchBudget& budget, Rng& rng, Eigen::VectorXd* argmax_out) {
    const double root_beta = std::sqrt(std::max(0.0, beta_s));
    return acq_select_value(
        post, [root_beta](double mu, double sd) { return mu + root_beta * sd; }, domain, budget, rng,
        argmax_out);
}

Eigen::VectorXd ucb_select(const GpPosterior& post, double beta_s, const Box& domain,
                           const SearchBudget& budget, Rng& rng) {
    Eigen::VectorXd x;
    ucb_select_value(post, beta_s, domain, budget, rng, &x);
    return x;
}

double log_marginal_likelihood(const GpDataset& data, const KernelSpec& kernel) {
    const GpPosterior p = GpPosterior::fit(data, kernel);
    const double n = static_cast<double>(data.size());
    return -0.5 * p.quad_form() - 0.5 * p.log_det() - 0.5 * n * std::log(2.0 * kPi);
}

KernelSpec fit_hyperparameters(const GpDataset& data, const std::vector<KernelSpec>& grid,
                               const KernelSpec& previous) {
    if (data.size() < 2) throw std::invalid_argument("fit_hyperparameters: need at least 2 points");
    constexpr double tie_tol = 1e-9;
    bool found = false;
    double best_lml = -std::numeric_limits<double>::infinity();
    KernelSpec best = previous;
    for (const auto& cand : grid) {
        double lml;
        try {
            lml = log_marginal_likelihood(data, cand);
        } catch (const IllConditionedError&) {
            continue;
        }
        if (!std::isfinite(lml)) continue;
        const double tol = tie_tol * std::max(1.0, std::abs(best_lml));
        if (!found || lml > best_lml + tol) {
            best_lml = lml;
            best = cand;
            found = true;
        } else if (lml >= best_lml - tol && cand.lengthscales.mean() > best.lengthscales.mean()) {
            // near-tie: prefer the larger lengthscale
            best_lml = std::max(best_lml, lml);
            best = cand;
        }
    }
    return found ? best : previous;
}

std::vector<KernelSpec> default_hyper_grid(const KernelSpec& base) {
    static const double ls_mult[8] = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    static const double out_scale[4] = {0.125, 0.5, 2.0, 8.0};
    std::vector<KernelSpec> grid;
    grid.reserve(32);
    for (double os : out_scale)
        for (double m : ls_mult) {
            KernelSpec k = base;
            k.lengthscales = base.lengthscales * m;
            k.output_scale = os;
            grid.push_back(k);
        }
    return grid;
}

} // namespace gsr
