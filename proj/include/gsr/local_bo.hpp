#pragma once

#include "gsr/gp.hpp"
#include "gsr/rng.hpp"
#include "gsr/task.hpp"

namespace gsr {

// Shared within-task GP-UCB stepper. All experiment drivers route their inner
// BO through this so that method differences isolate the task selector.
struct LocalBoConfig {
    KernelFamily kernel_family = KernelFamily::matern52;
    double lengthscale_frac = 0.2; // per-dimension lengthscale as a fraction of domain width
    double output_scale = 1.0;
    UcbSchedule ucb = UcbSchedule::fixed(4.0);
    double delta_f = 0.05; // split per task in theoretical mode
    bool split_delta_per_task = true;
    SearchBudget search;
    int n_init = 4;
    int refit_every = 5; // marginal-likelihood refit period; 0 disables
    bool standardize = true;
    // Monotone sign(y) log1p(|y|) warp of observations inside the GP; keeps the
    // argmax while taming heavy-tailed objective scales (incumbents stay raw).
    bool log_warp_outputs = false;
    GapSchedule gap;

    KernelSpec kernel_for(const Box& domain) const {
        KernelSpec k;
        k.family = kernel_family;
        k.lengthscales.resize(domain.dim());
        for (int d = 0; d < domain.dim(); ++d)
            k.lengthscales[d] = std::max(1e-12, lengthscale_frac * domain.width(d));
        k.output_scale = output_scale;
        return k;
    }
};

// Per-task solver state owned by the run (the registry keeps only data).
struct TaskSolver {
    KernelSpec kernel;
    double gamma_prev = 0.0; // info gain of the currently recorded design
    bool kernel_set = false;
};

struct GapInfo {
    double beta_s = 0.0;
    double gamma_s = 0.0;
    double eps_f = 0.0;
};

class LocalBo {
public:
    // Next design for the task: uniform random during the init phase, otherwise
    // the UCB argmax on the (standardized) posterior.
    static Eigen::VectorXd propose(const TaskState& state, TaskSolver& solver,
                                   const LocalBoConfig& cfg, int task_index, Rng& rng);

    // Raw-units acquisition value at the proposed design; used as the box-level
    // upper confidence score in the unknown-search-space driver.
    static double propose_with_value(const TaskState& state, TaskSolver& solver,
                                     const LocalBoConfig& cfg, int task_index, Rng& rng,
                                     Eigen::VectorXd& x_out);

    // Call after record_eval: computes beta_s (with gamma_{s-1}), gamma_s and
    // the optimization-gap bound eps^f_s, then advances the solver cache.
    static GapInfo after_record(const TaskState& state, TaskSolver& solver, const LocalBoConfig& cfg,
                                int task_index);

    static UcbSchedule schedule_for_task(const LocalBoConfig& cfg, int task_index);
};

} // namespace gsr
