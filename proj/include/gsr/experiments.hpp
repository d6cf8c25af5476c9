#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gsr/balance.hpp"
#include "gsr/bench_functions.hpp"
#include "gsr/gsr.hpp"
#include "gsr/oracle.hpp"

namespace gsr::bench {

// ---------------------------------------------------------------------------
// Synthetic task families
// ---------------------------------------------------------------------------

// Five fixed 1-D tasks with known long-run values. Each objective is a single
// kernel translate amp * k(x, center), so its RKHS norm equals amp and the
// theoretical beta schedule is valid with B = 1 on noiseless data.
class EnvelopeFamily : public TaskEnvironment {
public:
    EnvelopeFamily();

    const ParamSchema& schema() const override { return schema_; }
    TaskSpec seed_task() const override { return pool_[0]; }
    std::vector<TaskSpec> pool_tasks() const; // the other four, registered as the init batch

    double evaluate(const TaskSpec& spec, const Eigen::VectorXd& x, Rng& rng) const override;
    double evaluate_true(const TaskSpec& spec, const Eigen::VectorXd& x) const override;
    double true_utility(const TaskSpec& spec, double incumbent) const override;
    double optimum_value(const TaskSpec& spec) const override;
    double u_star() const override;

    double utility_of_value(double z) const; // shared monotone Lipschitz map, L = 0.6
    double task_value(const TaskSpec& spec) const { return true_utility(spec, optimum_value(spec)); }
    BtWorld bt_world() const;

    // GSR configuration under which the envelope guarantees apply here:
    // fixed matern52(0.25) kernel, no standardization, theoretical beta, B = 1.
    GsrConfig default_config(int T) const;

private:
    ParamSchema schema_;
    std::vector<TaskSpec> pool_;
};

// Mutation family with eight editable scalar fields and a planted optimum in
// task-parameter space; the inner objective is an easy 2-D quadratic so short
// probe budgets recover task values accurately.
class PlantedFamily : public TaskEnvironment {
public:
    explicit PlantedFamily(double noise_sigma = 0.0);

    const ParamSchema& schema() const override { return schema_; }
    TaskSpec seed_task() const override;

    double evaluate(const TaskSpec& spec, const Eigen::VectorXd& x, Rng& rng) const override;
    double evaluate_true(const TaskSpec& spec, const Eigen::VectorXd& x) const override;
    double true_utility(const TaskSpec& spec, double incumbent) const override;
    double optimum_value(const TaskSpec& spec) const override; // v(theta)
    double u_star() const override { return utility_of_value(1.0); }

    double utility_of_value(double z) const; // u = 0.1 + 0.8 clip01(z), L = 0.8
    double task_value(const TaskSpec& spec) const { return utility_of_value(optimum_value(spec)); }
    BtWorld bt_world() const;

    // Probe a task with a short inner-BO run; returns best-so-far utility.
    double probe_utility(const TaskSpec& spec, int probe_budget, std::uint64_t seed) const;

    GsrConfig default_config(int T) const;

private:
    ParamSchema schema_;
    double noise_sigma_;
};

// ---------------------------------------------------------------------------
// Offline task suites (fixed pools with Gaussian-CDF utilities)
// ---------------------------------------------------------------------------

struct OfflineTask {
    std::string name;
    BenchmarkSpec bench;
    bool unit_domain = false; // evaluate through an affine map from [0,1]^dim
    CdfUtilityParams cdf;
    double u_opt = 1.0; // utility of the true optimum

    Box domain() const { return unit_domain ? Box::cube(bench.dim, 0.0, 1.0) : bench.bounds; }
    Eigen::VectorXd to_bench(const Eigen::VectorXd& x) const;
    double eval_noisy(const Eigen::VectorXd& x, Rng& rng) const;
    double eval_true(const Eigen::VectorXd& x) const;
    double utility(double z) const { return direct_utility_cdf(z, cdf); }
};

// Six objectives on the shared domain [0,1]^6.
std::vector<OfflineTask> objective_selection_suite(int calib_samples, std::uint64_t calib_seed);
// Six fixed tasks on their natural domains.
std::vector<OfflineTask> fixed_task_suite(int calib_samples, std::uint64_t calib_seed);

// ---------------------------------------------------------------------------
// Offline selection driver (task-UCB vs baselines)
// ---------------------------------------------------------------------------

struct OfflineConfig {
    int T = 200;
    int seeds = 10;
    std::uint64_t base_seed = 90210;
    LocalBoConfig bo;
    double lipschitz = 1.0;
    double headroom_coef = 0.5; // eps(s) = headroom_coef / sqrt(s)
    int eta = 3;                // successive halving / hyperband
    std::vector<std::string> methods = {"gsr", "uniform", "round_robin", "sh", "hyperband", "oracle"};
};

struct OfflineSeedRun {
    std::vector<double> regret; // U* - best true utility so far, one entry per round
    std::vector<int> picks;     // task index per round
};

struct OfflineResult {
    std::vector<std::string> methods;
    std::map<std::string, std::vector<OfflineSeedRun>> runs; // method -> seeds
    double u_star = 1.0;
    int best_task = 0;
};

OfflineSeedRun run_offline_method(const std::vector<OfflineTask>& suite, const std::string& method,
                                  const OfflineConfig& cfg, std::uint64_t seed);
OfflineResult run_offline(const std::vector<OfflineTask>& suite, const OfflineConfig& cfg);
std::string offline_summary_csv(const OfflineResult& result);

// Successive-halving / Hyperband plans, exposed for schedule-oracle checks.
struct HbStage {
    int n = 0; // surviving tasks entering the stage
    int r = 0; // per-task budget (in bracket) by the end of the stage
};
struct HbBracket {
    int s = 0;
    std::vector<HbStage> stages;
};
std::vector<HbBracket> hyperband_plan(int R, int eta);
std::vector<int> successive_halving_survivor_counts(int K, int eta);

// ---------------------------------------------------------------------------
// Unknown search space (domain-doubling generator, objective-ranked tasks)
// ---------------------------------------------------------------------------

struct UnknownSpaceConfig {
    BenchmarkSpec bench;
    Box initial_box;
    int T = 75;
    LocalBoConfig bo;
    double eps0 = 0.5; // box headroom eps0 / sqrt(s)
    double c_g = 1.0;
    double eps_u0 = 1.0;
    int max_expansions = 10;
};

struct UnknownSpaceRun {
    std::vector<double> regret; // simple regret f* - best true incumbent
    std::vector<int> box_of_round;
    int expansions = 0;
    int final_level = 0;
    bool covered_optimum = false;
    std::string csv;
};

UnknownSpaceRun run_unknown_space_single(const UnknownSpaceConfig& cfg, std::uint64_t seed);
// Fixed-domain BO on the initial box with the same inner settings.
std::vector<double> run_fixed_domain_single(const UnknownSpaceConfig& cfg, std::uint64_t seed);

UnknownSpaceConfig beale_unknown_config();
UnknownSpaceConfig hartmann6_unknown_config();

// ---------------------------------------------------------------------------
// Acquisition race (EI vs UCB agents on one task)
// ---------------------------------------------------------------------------

struct RaceConfig {
    BenchmarkSpec bench;
    std::string target = "ei"; // "ei" or "ucb"
    int steps = 50;
    int n_init = 4;
    int calib_points = 1024;
    double quantile = 0.10;
    double gap_scale = 1.0;
    double kappa = 0.0;
    double tau = 0.25;
    LocalBoConfig bo;
};

struct RaceResult {
    std::vector<double> gap;       // running-max gap series
    std::vector<double> utility;   // sigmoid((gap_max - kappa) / tau)
    std::vector<double> regret_ei; // normalized simple regret per agent
    std::vector<double> regret_ucb;
    double denom = 0.0;
    std::string csv;
};

RaceResult run_acq_race(const RaceConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Resolution-controllability diagnostics (delta-plus estimation)
// ---------------------------------------------------------------------------

struct DeltaPlusConfig {
    int max_level = 4;
    int J = 40;
    int seeds = 10;
    int probe_budget = 10;
    std::uint64_t base_seed = 7;
    MutationSchedule schedule;
    bool coarse_to_fine = true; // false: constant rho_0 at every level
};

struct DeltaPlusRow {
    int m = 0;
    double rho = 0.0;
    double delta_plus = 0.0;
    double mean_distance = 0.0;
    int children = 0;
    double batch_failure_bound = 1.0; // (1 - delta_plus)^J diagnostic
};

std::vector<DeltaPlusRow> run_delta_plus(const PlantedFamily& family, const DeltaPlusConfig& cfg);
std::string delta_plus_csv(const std::vector<DeltaPlusRow>& rows);

// ---------------------------------------------------------------------------
// Full GSR drivers
// ---------------------------------------------------------------------------

RunLog run_gsr_planted(const PlantedFamily& family, const GsrConfig& cfg,
                       const CommitteeConfig& committee, std::uint64_t seed);

struct EnvelopeRunStats {
    bool all_valid = true;     // U^(i) in [lower, upper] for all tasks and rounds
    bool width_bound_ok = true; // checkpoint width bound, when epsf-targeted sizing is on
    RunLog log;
};
EnvelopeRunStats run_gsr_envelope(const EnvelopeFamily& family, const GsrConfig& cfg,
                                  const CommitteeConfig& committee, std::uint64_t seed);

// Balance-Eliminate over full per-rung GSR states on the planted family.
WrapperLog run_balance_gsr(const PlantedFamily& family, const BalanceConfig& wrapper_cfg,
                           const GsrConfig& rung_cfg, const CommitteeConfig& committee,
                           std::uint64_t seed);

} // namespace gsr::bench
