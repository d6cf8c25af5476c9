#pragma once

#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "gsr/envelope.hpp"
#include "gsr/generator.hpp"
#include "gsr/local_bo.hpp"
#include "gsr/oracle.hpp"
#include "gsr/task.hpp"

namespace gsr {

struct Deltas {
    double delta_f = 0.05;
    double delta_u = 0.05;
    double delta_minus = 0.05;
};

// Resolution ladder plus the running horizon quantities feeding the max depth.
struct LadderState {
    int m = 0;
    double eps_u0 = 1.0;
    double psi_running = 0.0; // running max of beta_s * gamma_s across tasks
    int mbar_running_max = 0;
    int level_cap = 60;

    double eps_u() const { return eps_u0 * std::pow(2.0, -m); }
    double eps_u_at(int level) const { return eps_u0 * std::pow(2.0, -level); }
};

// m-bar = floor_+( 1/2 log2( T / (A_T log(eT)^2) ) ).
int max_depth(int T, double a_constant, int cap = 60);

// A_T = (2 C_v L sqrt(C_lambda Psi) / (c_g eps_u0))^2.
double max_depth_a_constant(double c_v, double lipschitz_bound, double lambda, double psi,
                            double c_g, double eps_u0);

// Task-UCB: argmax of the envelope upper bound; ties to fewer evaluations,
// then creation order.
std::string select_task(const TaskRegistry& registry);

// Anchor rule: among tasks whose envelope width is at most
// max(c_g * eps_u_m, min width), the argmax of the envelope lower bound.
std::string select_anchor(const TaskRegistry& registry, double eps_u_m, double c_g);

bool should_refine(double anchor_width, const LadderState& ladder, double c_g, int mbar);

struct AuxEvent {
    int t = 0;
    std::string kind; // "generate", "generate_empty"
    int n_accepted = 0;
};

struct RunLog {
    std::vector<EvalRecord> records;
    std::vector<AuxEvent> aux_events;
    long votes_total = 0;
    int n_tasks = 0;
    int final_level = 0;
    int mbar_final = 0;
    double psi_final = 0.0;
    double lambda_t = 0.0; // log(eT)
    std::string best_task;
    Eigen::VectorXd best_design;
    std::vector<double> regret; // cumulative; empty unless ground truth was supplied

    void to_csv(std::ostream& out) const;
    std::string to_csv_string() const;
};

// Cumulative task regret R_t = sum_{tau <= t} (U* - u^{(i_tau)}(ybar_tau)),
// evaluated on noiseless incumbents.
std::vector<double> task_regret(const std::vector<EvalRecord>& records,
                                const std::function<double(const std::string&, double)>& true_utility,
                                double u_star);

// Synthetic task environment: objective evaluations plus (for harness metrics
// only) ground-truth utilities and optima where the family knows them.
class TaskEnvironment {
public:
    virtual ~TaskEnvironment() = default;
    virtual const ParamSchema& schema() const = 0;
    virtual TaskSpec seed_task() const = 0;
    virtual double evaluate(const TaskSpec& spec, const Eigen::VectorXd& x, Rng& rng) const = 0;
    virtual double evaluate_true(const TaskSpec& spec, const Eigen::VectorXd& x) const = 0;
    virtual double true_utility(const TaskSpec&, double) const {
        return std::numeric_limits<double>::quiet_NaN();
    }
    virtual double optimum_value(const TaskSpec&) const {
        return std::numeric_limits<double>::quiet_NaN();
    }
    virtual double u_star() const { return std::numeric_limits<double>::quiet_NaN(); }
};

struct GsrConfig {
    int T = 200;
    int J = 3;
    double c_g = 0.5;
    double eps_u0 = 1.0;
    Deltas deltas;
    double noise_lambda = 1e-6;
    LocalBoConfig bo;
    EnvelopeConfig envelope;
    bool epsf_targeted_votes = false; // pass a width target of c_u * L * eps_f to the oracle
    // < 0: use the reachability formula for the level cap. The formula's
    // (log eT)^2 cushion returns zero at desk-scale horizons, so experiment
    // configs may pin an explicit cap instead.
    int level_cap_override = -1;

    void check() const {
        if (T < 1) throw std::invalid_argument("GsrConfig: T must be >= 1");
        if (J < 1) throw std::invalid_argument("GsrConfig: J must be >= 1");
        if (!(c_g > 0.0 && c_g <= 1.0)) throw std::invalid_argument("GsrConfig: c_g must lie in (0,1]");
        envelope.check();
    }
};

// One seeded GSR run, steppable one global round at a time.
class GsrRun {
public:
    GsrRun(const TaskEnvironment& env, TaskGenerator& generator, UtilityOracle& oracle,
           GsrConfig config, std::uint64_t seed);

    struct StepInfo {
        std::string task_id;
        double u_estimate = 0.5;
        double eps_f = 0.0;
    };
    StepInfo step(); // one global round; exactly one objective evaluation
    bool done() const { return t_ >= cfg_.T; }
    int round() const { return t_; }

    // Causal per-play gap upper bound 2 sqrt(C_lambda Psi_t / n) from the
    // running Psi; used as the balancing wrapper's certificate increment.
    double causal_gap_bound(int n) const;

    const TaskRegistry& registry() const { return registry_; }
    const LadderState& ladder() const { return ladder_; }
    long votes_total() const { return votes_; }

    RunLog finish();

private:
    void run_generation(int t, const std::string& anchor_id);

    const TaskEnvironment& env_;
    TaskGenerator& generator_;
    UtilityOracle& oracle_;
    GsrConfig cfg_;
    Rng rng_;
    TaskRegistry registry_;
    std::map<std::string, TaskSolver> solvers_;
    LadderState ladder_;
    AnchorCache anchor_cache_;
    std::vector<AuxEvent> aux_;
    int t_ = 0;
    long util_calls_ = 0;
    long votes_ = 0;
};

// Runs the full loop; when the environment knows ground truth, the log carries
// the cumulative task-regret series.
RunLog run_gsr(const TaskEnvironment& env, TaskGenerator& generator, UtilityOracle& oracle,
               const GsrConfig& config, std::uint64_t seed);

} // namespace gsr
