#include "gsr/local_bo.hpp"

#include <cmath>

namespace gsr {

namespace {

struct Standardized {
    GpDataset data;
    double mean = 0.0;
    double sd = 1.0;
};

double log_warp(double y) { return y >= 0.0 ? std::log1p(y) : -std::log1p(-y); }

Standardized standardize(const GpDataset& raw, bool enabled, bool warp) {
    Standardized s;
    s.data = raw;
    if (warp)
        for (auto& y : s.data.outputs) y = log_warp(y);
    if (!enabled || raw.size() == 0) return s;
    double mean = 0.0;
    for (double y : s.data.outputs) mean += y;
    mean /= s.data.size();
    double var = 0.0;
    for (double y : s.data.outputs) var += (y - mean) * (y - mean);
    var /= s.data.size();
    s.mean = mean;
    s.sd = std::max(std::sqrt(var), 1e-8);
    for (auto& y : s.data.outputs) y = (y - s.mean) / s.sd;
    return s;
}

} // namespace

UcbSchedule LocalBo::schedule_for_task(const LocalBoConfig& cfg, int task_index) {
    UcbSchedule s = cfg.ucb;
    if (s.mode == UcbSchedule::Mode::theoretical)
        s.delta_f_task = cfg.split_delta_per_task ? per_task_delta(task_index, cfg.delta_f) : cfg.delta_f;
    return s;
}

Eigen::VectorXd LocalBo::propose(const TaskState& state, TaskSolver& solver, const LocalBoConfig& cfg,
                                 int task_index, Rng& rng) {
    Eigen::VectorXd x;
    propose_with_value(state, solver, cfg, task_index, rng, x);
    return x;
}

double LocalBo::propose_with_value(const TaskState& state, TaskSolver& solver,
                                   const LocalBoConfig& cfg, int task_index, Rng& rng,
                                   Eigen::VectorXd& x_out) {
    const Box& domain = state.spec.domain;
    if (!solver.kernel_set) {
        solver.kernel = cfg.kernel_for(domain);
        solver.kernel_set = true;
    }
    if (state.local_counter < cfg.n_init) {
        x_out.resize(domain.dim());
        for (int d = 0; d < domain.dim(); ++d)
            x_out[d] = rng.uniform(domain.lower[d], domain.upper[d]);
        // optimistic score so uninitialized tasks are explored first
        return std::numeric_limits<double>::infinity();
    }

    const Standardized std_data = standardize(state.dataset, cfg.standardize, cfg.log_warp_outputs);
    if (cfg.refit_every > 0 && state.local_counter >= 2 &&
        state.local_counter % cfg.refit_every == 0) {
        const auto grid = default_hyper_grid(cfg.kernel_for(domain));
        solver.kernel = fit_hyperparameters(std_data.data, grid, solver.kernel);
        solver.gamma_prev = info_gain(state.dataset, solver.kernel);
    }

    const GpPosterior post = GpPosterior::fit(std_data.data, solver.kernel);
    const double beta_s =
        beta(state.local_counter + 1, solver.gamma_prev, schedule_for_task(cfg, task_index));
    const double root_beta = std::sqrt(std::max(0.0, beta_s));
    Eigen::MatrixXd seeds;
    const Eigen::MatrixXd* seeds_ptr = nullptr;
    if (state.incumbent_x.size() == domain.dim()) {
        seeds = state.incumbent_x.transpose();
        seeds_ptr = &seeds;
    }
    const double std_value = acq_select_value(
        post, [root_beta](double mu, double sd) { return mu + root_beta * sd; }, domain, cfg.search,
        rng, &x_out, seeds_ptr);
    return std_data.mean + std_data.sd * std_value;
}

GapInfo LocalBo::after_record(const TaskState& state, TaskSolver& solver, const LocalBoConfig& cfg,
                              int task_index) {
    if (!solver.kernel_set) {
        solver.kernel = cfg.kernel_for(state.spec.domain);
        solver.kernel_set = true;
    }
    GapInfo info;
    const int s = state.local_counter;
    info.beta_s = beta(s, solver.gamma_prev, schedule_for_task(cfg, task_index));
    // the log-det is only needed when a theoretical schedule consumes it
    const bool need_gamma = cfg.gap.mode == GapSchedule::Mode::theoretical ||
                            cfg.ucb.mode == UcbSchedule::Mode::theoretical;
    info.gamma_s = need_gamma ? info_gain(state.dataset, solver.kernel) : 0.0;
    info.eps_f = cfg.gap.value(s, info.beta_s, info.gamma_s, state.dataset.noise_lambda);
    solver.gamma_prev = info.gamma_s;
    return info;
}

} // namespace gsr
