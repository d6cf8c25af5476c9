#include "gsr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gsr/math.hpp"

namespace gsr::bench {

namespace {

double matern52_corr(double r) {
    const double z = std::sqrt(5.0) * r;
    return (1.0 + z + z * z / 3.0) * std::exp(-z);
}

} // namespace

// ---------------------------------------------------------------------------
// EnvelopeFamily
// ---------------------------------------------------------------------------

EnvelopeFamily::EnvelopeFamily() {
    schema_.fields = {
        {"amp", FieldDef::Kind::scalar, 1, 0.05, 1.0, true},
        {"center", FieldDef::Kind::scalar, 1, 0.0, 1.0, true},
    };
    schema_.domain_ref = Box::cube(1, 0.0, 1.0);
    schema_.domain_editable = false;

    const double amps[5] = {0.55, 0.70, 0.85, 0.95, 0.75};
    const double centers[5] = {0.20, 0.35, 0.50, 0.65, 0.80};
    for (int i = 0; i < 5; ++i) {
        TaskSpec spec;
        spec.task_id = "env" + std::to_string(i + 1);
        spec.level_m = 0;
        spec.domain = Box::cube(1, 0.0, 1.0);
        spec.params["amp"] = {amps[i]};
        spec.params["center"] = {centers[i]};
        pool_.push_back(spec);
    }
}

std::vector<TaskSpec> EnvelopeFamily::pool_tasks() const {
    return {pool_.begin() + 1, pool_.end()};
}

double EnvelopeFamily::evaluate_true(const TaskSpec& spec, const Eigen::VectorXd& x) const {
    const double amp = spec.params.at("amp")[0];
    const double center = spec.params.at("center")[0];
    return amp * matern52_corr(std::abs(x[0] - center) / 0.25);
}

double EnvelopeFamily::evaluate(const TaskSpec& spec, const Eigen::VectorXd& x, Rng& rng) const {
    (void)rng; // noiseless family
    return evaluate_true(spec, x);
}

double EnvelopeFamily::utility_of_value(double z) const { return 0.15 + 0.6 * clip(z, 0.0, 1.0); }

double EnvelopeFamily::true_utility(const TaskSpec&, double incumbent) const {
    return utility_of_value(incumbent);
}

double EnvelopeFamily::optimum_value(const TaskSpec& spec) const { return spec.params.at("amp")[0]; }

double EnvelopeFamily::u_star() const {
    double best = 0.0;
    for (const auto& spec : pool_) best = std::max(best, task_value(spec));
    return best;
}

BtWorld EnvelopeFamily::bt_world() const {
    return BtWorld([this](const TaskSpec& spec, double z) { return logit(true_utility(spec, z)); });
}

GsrConfig EnvelopeFamily::default_config(int T) const {
    GsrConfig cfg;
    cfg.T = T;
    cfg.J = 4; // the fixed pool is served once as the init batch
    cfg.c_g = 0.5;
    cfg.eps_u0 = 1.0;
    cfg.noise_lambda = 1e-4;
    cfg.envelope.lipschitz_bound = 1.0;
    cfg.envelope.c_u = 1.0;
    cfg.envelope.schedule = EnvelopeConfig::CheckpointSchedule::dense;
    cfg.bo.kernel_family = KernelFamily::matern52;
    cfg.bo.lengthscale_frac = 0.25;
    cfg.bo.output_scale = 1.0;
    cfg.bo.standardize = false; // keep the RKHS bound B = 1 meaningful
    cfg.bo.refit_every = 0;
    cfg.bo.n_init = 2;
    cfg.bo.ucb = UcbSchedule::theoretical(1.0, 0.0, 0.05);
    cfg.bo.delta_f = 0.05;
    cfg.bo.search = SearchBudget{128, 5, 50, 0.25, 1e-4};
    cfg.bo.gap = GapSchedule{}; // theoretical
    return cfg;
}

// ---------------------------------------------------------------------------
// PlantedFamily
// ---------------------------------------------------------------------------

PlantedFamily::PlantedFamily(double noise_sigma) : noise_sigma_(noise_sigma) {
    for (int i = 0; i < 8; ++i)
        schema_.fields.push_back({"w" + std::to_string(i), FieldDef::Kind::scalar, 1, 0.0, 1.0, true});
    schema_.domain_ref = Box::cube(2, 0.0, 1.0);
    schema_.domain_editable = false;
}

TaskSpec PlantedFamily::seed_task() const {
    TaskSpec spec;
    spec.task_id = "seed";
    spec.level_m = 0;
    spec.domain = Box::cube(2, 0.0, 1.0);
    for (int i = 0; i < 8; ++i) spec.params["w" + std::to_string(i)] = {0.35};
    return spec;
}

double PlantedFamily::optimum_value(const TaskSpec& spec) const {
    // steep enough that batch spreads at level m are comparable to the
    // tolerance eps_u0 2^-m, keeping the near-optimal generation probability
    // strictly inside (0, 1)
    double sq = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double d = spec.params.at("w" + std::to_string(i))[0] - 0.65;
        sq += d * d;
    }
    return 1.0 - 0.78 * std::sqrt(sq);
}

double PlantedFamily::evaluate_true(const TaskSpec& spec, const Eigen::VectorXd& x) const {
    const double dx = x[0] - 0.4;
    const double dy = x[1] - 0.6;
    return optimum_value(spec) - 0.25 * (dx * dx + dy * dy);
}

double PlantedFamily::evaluate(const TaskSpec& spec, const Eigen::VectorXd& x, Rng& rng) const {
    double y = evaluate_true(spec, x);
    if (noise_sigma_ > 0.0) y += noise_sigma_ * rng.normal();
    return y;
}

double PlantedFamily::utility_of_value(double z) const { return 0.1 + 0.8 * clip(z, 0.0, 1.0); }

double PlantedFamily::true_utility(const TaskSpec&, double incumbent) const {
    return utility_of_value(incumbent);
}

BtWorld PlantedFamily::bt_world() const {
    return BtWorld([this](const TaskSpec& spec, double z) { return logit(true_utility(spec, z)); });
}

double PlantedFamily::probe_utility(const TaskSpec& spec, int probe_budget, std::uint64_t seed) const {
    LocalBoConfig bo;
    bo.lengthscale_frac = 0.2;
    bo.n_init = std::min(4, probe_budget);
    bo.refit_every = 0;
    bo.search = SearchBudget{64, 3, 30, 0.25, 1e-3};
    bo.gap = GapSchedule::surrogate(1.0);

    TaskState state;
    state.spec = spec;
    state.dataset.noise_lambda = 1e-6;
    TaskSolver solver;
    Rng rng(seed);
    double best_true = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < probe_budget; ++s) {
        const Eigen::VectorXd x = LocalBo::propose(state, solver, bo, 1, rng);
        const double y = evaluate(spec, x, rng);
        record_eval(state, x, y);
        best_true = std::max(best_true, evaluate_true(spec, x));
        LocalBo::after_record(state, solver, bo, 1);
    }
    return utility_of_value(best_true);
}

GsrConfig PlantedFamily::default_config(int T) const {
    GsrConfig cfg;
    cfg.T = T;
    cfg.J = 3;
    cfg.c_g = 0.5;
    cfg.eps_u0 = 1.0;
    cfg.noise_lambda = 1e-6;
    cfg.envelope.lipschitz_bound = 1.0;
    cfg.envelope.c_u = 1.0;
    cfg.bo.lengthscale_frac = 0.2;
    cfg.bo.standardize = true;
    cfg.bo.refit_every = 5;
    cfg.bo.n_init = 4;
    cfg.bo.ucb = UcbSchedule::fixed(4.0);
    cfg.bo.search = SearchBudget{128, 5, 50, 0.25, 1e-4};
    // epsf-targeted committee sizing shrinks checkpoint widths on the 1/sqrt(s)
    // schedule, so the resolution gate actually fires within a desk-scale run.
    cfg.bo.gap = GapSchedule::surrogate(0.5);
    cfg.epsf_targeted_votes = true;
    cfg.level_cap_override = 8;
    return cfg;
}

// ---------------------------------------------------------------------------
// Offline suites
// ---------------------------------------------------------------------------

Eigen::VectorXd OfflineTask::to_bench(const Eigen::VectorXd& x) const {
    if (!unit_domain) return x;
    Eigen::VectorXd mapped(x.size());
    for (int d = 0; d < x.size(); ++d)
        mapped[d] = bench.bounds.lower[d] + x[d] * (bench.bounds.upper[d] - bench.bounds.lower[d]);
    return mapped;
}

double OfflineTask::eval_noisy(const Eigen::VectorXd& x, Rng& rng) const {
    return eval_benchmark(bench, to_bench(x), rng);
}

double OfflineTask::eval_true(const Eigen::VectorXd& x) const {
    return eval_benchmark_true(bench, to_bench(x));
}

namespace {

// z_cap bounds the standardized headroom (f* - mu) / sigma by inflating the
// calibrated sigma when needed. Raw Monte-Carlo scales leave needle-shaped
// objectives with z* far in the normal tail, where the CDF saturates in double
// precision and utility differences vanish; capping keeps every task's utility
// resolvable while preserving the Gaussian-CDF form.
OfflineTask make_offline_task(const std::string& name, BenchId id, int dim, double noise,
                              bool unit_domain, double z_cap, int calib_samples,
                              std::uint64_t calib_seed) {
    OfflineTask task;
    task.name = name;
    task.bench = make_benchmark(id, dim, noise);
    task.unit_domain = unit_domain;
    Rng rng(calib_seed);
    task.cdf = calibrate_cdf(
        [&](const Eigen::VectorXd& x) {
            Rng local(rng.next_u64());
            return task.eval_noisy(x, local);
        },
        task.domain(), calib_samples, rng, 1e-8);
    const double headroom = task.bench.optimum_value() - task.cdf.mu;
    if (headroom > z_cap * task.cdf.sigma) task.cdf.sigma = headroom / z_cap;
    task.u_opt = task.utility(task.bench.optimum_value());
    return task;
}

} // namespace

std::vector<OfflineTask> objective_selection_suite(int calib_samples, std::uint64_t calib_seed) {
    // styblinski_tang6 keeps its natural scale (z* ~ 2.7, utility ceiling
    // 0.996) and plays the designated best task; the others are capped at
    // z* = 0.8 so their ceilings sit clearly below it and budget committed to
    // them is genuinely wasted.
    std::vector<OfflineTask> suite;
    suite.push_back(make_offline_task("ackley6", BenchId::ackley, 6, 0.01, true, 0.8, calib_samples,
                                      Rng::mix(calib_seed, 1)));
    suite.push_back(make_offline_task("griewank6", BenchId::griewank, 6, 0.01, true, 0.8,
                                      calib_samples, Rng::mix(calib_seed, 2)));
    suite.push_back(make_offline_task("levy6", BenchId::levy, 6, 0.01, true, 0.8, calib_samples,
                                      Rng::mix(calib_seed, 3)));
    suite.push_back(make_offline_task("rosenbrock6", BenchId::rosenbrock, 6, 0.01, true, 0.8,
                                      calib_samples, Rng::mix(calib_seed, 4)));
    suite.push_back(make_offline_task("styblinski_tang6", BenchId::styblinski_tang, 6, 0.01, true,
                                      3.0, calib_samples, Rng::mix(calib_seed, 5)));
    suite.push_back(make_offline_task("hartmann6", BenchId::hartmann6, 6, 0.01, true, 0.8,
                                      calib_samples, Rng::mix(calib_seed, 6)));
    return suite;
}

std::vector<OfflineTask> fixed_task_suite(int calib_samples, std::uint64_t calib_seed) {
    // ackley2 keeps its natural scale (z* ~ 2, ceiling 0.98) as the best task;
    // a 2-D GP resolves it within the budget, so concentration pays off.
    std::vector<OfflineTask> suite;
    suite.push_back(make_offline_task("ackley2", BenchId::ackley, 2, 0.01, false, 3.0, calib_samples,
                                      Rng::mix(calib_seed, 11)));
    suite.push_back(make_offline_task("beale2", BenchId::beale, 2, 0.01, false, 0.8, calib_samples,
                                      Rng::mix(calib_seed, 12)));
    suite.push_back(make_offline_task("branin2", BenchId::branin, 2, 0.01, false, 0.8, calib_samples,
                                      Rng::mix(calib_seed, 13)));
    suite.push_back(make_offline_task("hartmann6", BenchId::hartmann6, 6, 0.01, false, 0.8,
                                      calib_samples, Rng::mix(calib_seed, 14)));
    suite.push_back(make_offline_task("levy2", BenchId::levy, 2, 0.01, false, 0.8, calib_samples,
                                      Rng::mix(calib_seed, 15)));
    suite.push_back(make_offline_task("rosenbrock4", BenchId::rosenbrock, 4, 0.01, false, 0.8,
                                      calib_samples, Rng::mix(calib_seed, 16)));
    return suite;
}

// ---------------------------------------------------------------------------
// Offline driver
// ---------------------------------------------------------------------------

std::vector<int> successive_halving_survivor_counts(int K, int eta) {
    if (eta < 2) throw std::invalid_argument("successive_halving: eta must be >= 2");
    std::vector<int> counts{K};
    int n = K;
    while (n >= eta) {
        n = (n + eta - 1) / eta; // ceil(n / eta)
        counts.push_back(n);
    }
    return counts;
}

std::vector<HbBracket> hyperband_plan(int R, int eta) {
    if (eta < 2) throw std::invalid_argument("hyperband: eta must be >= 2");
    const int s_max = static_cast<int>(std::floor(std::log(static_cast<double>(R)) /
                                                  std::log(static_cast<double>(eta))));
    std::vector<HbBracket> brackets;
    for (int s = s_max; s >= 0; --s) {
        HbBracket bracket;
        bracket.s = s;
        const double n0 = std::ceil(static_cast<double>(s_max + 1) / (s + 1) *
                                    std::pow(static_cast<double>(eta), s));
        const double r0 = static_cast<double>(R) * std::pow(static_cast<double>(eta), -s);
        for (int i = 0; i <= s; ++i) {
            HbStage stage;
            stage.n = static_cast<int>(std::floor(n0 * std::pow(static_cast<double>(eta), -i)));
            stage.r = std::max(1, static_cast<int>(std::floor(r0 * std::pow(static_cast<double>(eta), i))));
            if (stage.n < 1) stage.n = 1;
            bracket.stages.push_back(stage);
        }
        brackets.push_back(bracket);
    }
    return brackets;
}

namespace {

struct MethodTask {
    TaskState state;
    TaskSolver solver;
    double best_true = -std::numeric_limits<double>::infinity();
};

struct OfflineContext {
    const std::vector<OfflineTask>* suite;
    const OfflineConfig* cfg;
    std::vector<MethodTask> tasks;
    Rng rng;
    OfflineSeedRun run;
    double u_star;
    double best_u_true = 0.0;

    OfflineContext(const std::vector<OfflineTask>& s, const OfflineConfig& c, std::uint64_t seed)
        : suite(&s), cfg(&c), rng(seed) {
        u_star = 0.0;
        for (const auto& task : s) u_star = std::max(u_star, task.u_opt);
        for (size_t i = 0; i < s.size(); ++i) {
            MethodTask mt;
            mt.state.spec.task_id = s[i].name;
            mt.state.spec.domain = s[i].domain();
            mt.state.dataset.noise_lambda = 1e-6;
            tasks.push_back(std::move(mt));
        }
    }

    double utility_noisy(int i) const {
        const MethodTask& mt = tasks[static_cast<size_t>(i)];
        if (mt.state.local_counter == 0) return 0.0;
        return (*suite)[static_cast<size_t>(i)].utility(mt.state.incumbent);
    }

    void record_outcome(int i, const Eigen::VectorXd& x) {
        MethodTask& mt = tasks[static_cast<size_t>(i)];
        const OfflineTask& task = (*suite)[static_cast<size_t>(i)];
        const double y = task.eval_noisy(x, rng);
        record_eval(mt.state, x, y);
        mt.best_true = std::max(mt.best_true, task.eval_true(x));
        best_u_true = std::max(best_u_true, task.utility(mt.best_true));
        run.picks.push_back(i);
        run.regret.push_back(u_star - best_u_true);
    }

    // one objective evaluation on task i
    void evaluate(int i) {
        MethodTask& mt = tasks[static_cast<size_t>(i)];
        const Eigen::VectorXd x = LocalBo::propose(mt.state, mt.solver, cfg->bo, i + 1, rng);
        record_outcome(i, x);
    }

    int rounds() const { return static_cast<int>(run.picks.size()); }
};

// Task-UCB over the fixed pool: the score is the utility of the task's own
// GP-UCB value (its upper confidence bound on achievable f) plus gap headroom,
// so unexplored tasks keep a high ceiling until their posterior tightens.
void run_gsr_selector(OfflineContext& ctx) {
    const int K = static_cast<int>(ctx.tasks.size());
    std::vector<Eigen::VectorXd> proposals(static_cast<size_t>(K));
    while (ctx.rounds() < ctx.cfg->T) {
        int pick = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        int best_count = 0;
        for (int i = 0; i < K; ++i) {
            MethodTask& mt = ctx.tasks[static_cast<size_t>(i)];
            const int s = mt.state.local_counter;
            const double acq_value = LocalBo::propose_with_value(
                mt.state, mt.solver, ctx.cfg->bo, i + 1, ctx.rng, proposals[static_cast<size_t>(i)]);
            double score;
            if (s < ctx.cfg->bo.n_init) {
                score = std::numeric_limits<double>::infinity();
            } else {
                score = (*ctx.suite)[static_cast<size_t>(i)].utility(acq_value) +
                        ctx.cfg->lipschitz * ctx.cfg->headroom_coef / std::sqrt(static_cast<double>(s));
            }
            if (pick < 0 || score > best_score || (score == best_score && s < best_count)) {
                pick = i;
                best_score = score;
                best_count = s;
            }
        }
        ctx.record_outcome(pick, proposals[static_cast<size_t>(pick)]);
    }
}

void run_uniform(OfflineContext& ctx) {
    const int K = static_cast<int>(ctx.tasks.size());
    while (ctx.rounds() < ctx.cfg->T) ctx.evaluate(ctx.rng.uniform_int(K));
}

void run_round_robin(OfflineContext& ctx) {
    const int K = static_cast<int>(ctx.tasks.size());
    while (ctx.rounds() < ctx.cfg->T) ctx.evaluate(ctx.rounds() % K);
}

void run_oracle_method(OfflineContext& ctx) {
    int best = 0;
    for (size_t i = 1; i < ctx.suite->size(); ++i)
        if ((*ctx.suite)[i].u_opt > (*ctx.suite)[static_cast<size_t>(best)].u_opt)
            best = static_cast<int>(i);
    while (ctx.rounds() < ctx.cfg->T) ctx.evaluate(best);
}

void run_successive_halving(OfflineContext& ctx) {
    const int K = static_cast<int>(ctx.tasks.size());
    const auto counts = successive_halving_survivor_counts(K, ctx.cfg->eta);
    const int n_stages = static_cast<int>(counts.size());
    std::vector<int> alive(static_cast<size_t>(K));
    std::iota(alive.begin(), alive.end(), 0);
    for (int stage = 0; stage < n_stages && ctx.rounds() < ctx.cfg->T; ++stage) {
        const int stage_budget =
            stage + 1 == n_stages ? ctx.cfg->T - ctx.rounds() : ctx.cfg->T / n_stages;
        for (int e = 0; e < stage_budget && ctx.rounds() < ctx.cfg->T; ++e)
            ctx.evaluate(alive[static_cast<size_t>(e % static_cast<int>(alive.size()))]);
        if (stage + 1 < n_stages) {
            const int keep = counts[static_cast<size_t>(stage + 1)];
            std::stable_sort(alive.begin(), alive.end(), [&](int a, int b) {
                return ctx.utility_noisy(a) > ctx.utility_noisy(b);
            });
            alive.resize(static_cast<size_t>(std::min<int>(keep, static_cast<int>(alive.size()))));
            std::sort(alive.begin(), alive.end());
        }
    }
    while (ctx.rounds() < ctx.cfg->T) ctx.evaluate(alive[static_cast<size_t>(ctx.rounds() % alive.size())]);
}

void run_hyperband(OfflineContext& ctx) {
    const int K = static_cast<int>(ctx.tasks.size());
    const auto plan = hyperband_plan(ctx.cfg->T, ctx.cfg->eta);
    for (const auto& bracket : plan) {
        if (ctx.rounds() >= ctx.cfg->T) break;
        // seeded draw of the bracket's task subset
        std::vector<int> ids(static_cast<size_t>(K));
        std::iota(ids.begin(), ids.end(), 0);
        for (int i = K - 1; i > 0; --i)
            std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(ctx.rng.uniform_int(i + 1))]);
        std::vector<int> alive(ids.begin(),
                               ids.begin() + std::min<int>(bracket.stages.front().n, K));
        int r_prev = 0;
        for (size_t si = 0; si < bracket.stages.size() && ctx.rounds() < ctx.cfg->T; ++si) {
            const HbStage& stage = bracket.stages[si];
            if (si > 0) {
                const int keep = std::min<int>(stage.n, static_cast<int>(alive.size()));
                std::stable_sort(alive.begin(), alive.end(), [&](int a, int b) {
                    return ctx.utility_noisy(a) > ctx.utility_noisy(b);
                });
                alive.resize(static_cast<size_t>(std::max(1, keep)));
                std::sort(alive.begin(), alive.end());
            }
            const int add = std::max(0, stage.r - r_prev);
            for (int rep = 0; rep < add; ++rep)
                for (size_t a = 0; a < alive.size() && ctx.rounds() < ctx.cfg->T; ++a)
                    ctx.evaluate(alive[a]);
            r_prev = stage.r;
        }
    }
    while (ctx.rounds() < ctx.cfg->T) ctx.evaluate(ctx.rounds() % K);
}

} // namespace

OfflineSeedRun run_offline_method(const std::vector<OfflineTask>& suite, const std::string& method,
                                  const OfflineConfig& cfg, std::uint64_t seed) {
    OfflineContext ctx(suite, cfg, seed);
    if (method == "gsr")
        run_gsr_selector(ctx);
    else if (method == "uniform")
        run_uniform(ctx);
    else if (method == "round_robin")
        run_round_robin(ctx);
    else if (method == "sh")
        run_successive_halving(ctx);
    else if (method == "hyperband")
        run_hyperband(ctx);
    else if (method == "oracle")
        run_oracle_method(ctx);
    else
        throw std::invalid_argument("unknown offline method: " + method);
    return std::move(ctx.run);
}

OfflineResult run_offline(const std::vector<OfflineTask>& suite, const OfflineConfig& cfg) {
    OfflineResult result;
    result.methods = cfg.methods;
    result.u_star = 0.0;
    for (size_t i = 0; i < suite.size(); ++i)
        if (suite[i].u_opt > suite[static_cast<size_t>(result.best_task)].u_opt)
            result.best_task = static_cast<int>(i);
    for (const auto& task : suite) result.u_star = std::max(result.u_star, task.u_opt);
    for (const auto& method : cfg.methods) {
        std::vector<OfflineSeedRun> runs;
        for (int s = 0; s < cfg.seeds; ++s)
            runs.push_back(run_offline_method(suite, method, cfg, Rng::mix(cfg.base_seed, s)));
        result.runs[method] = std::move(runs);
    }
    return result;
}

std::string offline_summary_csv(const OfflineResult& result) {
    std::ostringstream out;
    out << "t,method,mean_regret,stderr\n";
    for (const auto& method : result.methods) {
        const auto& runs = result.runs.at(method);
        if (runs.empty()) continue;
        const size_t T = runs.front().regret.size();
        for (size_t t = 0; t < T; ++t) {
            double mean = 0.0;
            for (const auto& r : runs) mean += r.regret[t];
            mean /= static_cast<double>(runs.size());
            double var = 0.0;
            for (const auto& r : runs) var += (r.regret[t] - mean) * (r.regret[t] - mean);
            const double se = runs.size() > 1
                                  ? std::sqrt(var / static_cast<double>(runs.size() - 1)) /
                                        std::sqrt(static_cast<double>(runs.size()))
                                  : 0.0;
            out << (t + 1) << ',' << method << ',' << format_double(mean) << ',' << format_double(se)
                << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Unknown search space
// ---------------------------------------------------------------------------

UnknownSpaceConfig beale_unknown_config() {
    UnknownSpaceConfig cfg;
    cfg.bench = make_benchmark(BenchId::beale, 2, 0.0);
    cfg.initial_box = Box::cube(2, -1.0, 0.0);
    cfg.T = 75;
    cfg.bo.lengthscale_frac = 0.2;
    cfg.bo.n_init = 4;
    cfg.bo.refit_every = 5;
    cfg.bo.standardize = true;
    cfg.bo.log_warp_outputs = true; // beale spans five orders of magnitude
    cfg.bo.ucb = UcbSchedule::fixed(4.0);
    cfg.bo.search = SearchBudget{512, 10, 50, 0.25, 1e-4};
    cfg.bo.gap = GapSchedule::surrogate(1.0);
    return cfg;
}

UnknownSpaceConfig hartmann6_unknown_config() {
    UnknownSpaceConfig cfg;
    cfg.bench = make_benchmark(BenchId::hartmann6, 6, 0.0);
    cfg.initial_box = Box::cube(6, 0.0, 0.5);
    cfg.T = 150;
    cfg.bo.lengthscale_frac = 0.2;
    cfg.bo.n_init = 4;
    cfg.bo.refit_every = 5;
    cfg.bo.standardize = true;
    cfg.bo.ucb = UcbSchedule::fixed(4.0);
    cfg.bo.search = SearchBudget{512, 10, 50, 0.25, 1e-4};
    cfg.bo.gap = GapSchedule::surrogate(1.0);
    return cfg;
}

namespace {

struct UBox {
    TaskState state;
    TaskSolver solver;
    double best_true = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd proposal;
};

UBox make_box(const Box& bounds, int id) {
    UBox box;
    box.state.spec.task_id = "box" + std::to_string(id);
    box.state.spec.domain = bounds;
    box.state.dataset.noise_lambda = 1e-6;
    return box;
}

} // namespace

UnknownSpaceRun run_unknown_space_single(const UnknownSpaceConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const double f_star = cfg.bench.optimum_value();

    ExpansionConfig expand;
    expand.rho_expand = 2.0;
    expand.max_expansions = cfg.max_expansions;
    expand.min_span_frac = 0.15;
    expand.has_clip_box = true;
    expand.clip_box = cfg.bench.bounds;

    std::vector<UBox> boxes;
    boxes.push_back(make_box(cfg.initial_box, 1));

    UnknownSpaceRun out;
    std::ostringstream csv;
    csv << "t,box,level_m,x0";
    for (int d = 1; d < cfg.bench.dim; ++d) csv << ",x" << d;
    csv << ",y,best_true,regret\n";

    int level = 0;
    int expansions = 0;
    double global_best = -std::numeric_limits<double>::infinity();

    for (int t = 1; t <= cfg.T; ++t) {
        // box-level upper confidence scores (raw units); uninitialized boxes first
        int pick = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (size_t b = 0; b < boxes.size(); ++b) {
            const double score = LocalBo::propose_with_value(boxes[b].state, boxes[b].solver, cfg.bo,
                                                             static_cast<int>(b) + 1, rng,
                                                             boxes[b].proposal);
            if (score > best_score) {
                best_score = score;
                pick = static_cast<int>(b);
            }
        }
        UBox& box = boxes[static_cast<size_t>(pick)];
        const Eigen::VectorXd x = box.proposal;
        const double y = eval_benchmark(cfg.bench, x, rng);
        record_eval(box.state, x, y);
        LocalBo::after_record(box.state, box.solver, cfg.bo, pick + 1);
        const double y_true = eval_benchmark_true(cfg.bench, x);
        box.best_true = std::max(box.best_true, y_true);
        box.state.incumbent_true = box.best_true;
        global_best = std::max(global_best, y_true);

        out.box_of_round.push_back(pick);
        out.regret.push_back(f_star - global_best);
        csv << t << ',' << box.state.spec.task_id << ',' << level;
        for (int d = 0; d < cfg.bench.dim; ++d) csv << ',' << format_double(x[d]);
        csv << ',' << format_double(y) << ',' << format_double(global_best) << ','
            << format_double(f_star - global_best) << '\n';

        // expansion gate: anchor is the best-incumbent box among resolved ones
        double min_w = std::numeric_limits<double>::infinity();
        for (const auto& b : boxes) {
            const double w = b.state.local_counter > 0
                                 ? cfg.eps0 / std::sqrt(static_cast<double>(b.state.local_counter))
                                 : std::numeric_limits<double>::infinity();
            min_w = std::min(min_w, w);
        }
        const double eps_u_m = cfg.eps_u0 * std::pow(2.0, -level);
        const double threshold = std::max(cfg.c_g * eps_u_m, min_w);
        int anchor = -1;
        for (size_t b = 0; b < boxes.size(); ++b) {
            if (boxes[b].state.local_counter == 0) continue;
            const double w = cfg.eps0 / std::sqrt(static_cast<double>(boxes[b].state.local_counter));
            if (w > threshold + 1e-15) continue;
            if (anchor < 0 || boxes[b].state.incumbent > boxes[static_cast<size_t>(anchor)].state.incumbent)
                anchor = static_cast<int>(b);
        }
        if (anchor >= 0) {
            const double w_anchor =
                cfg.eps0 / std::sqrt(static_cast<double>(boxes[static_cast<size_t>(anchor)].state.local_counter));
            if (w_anchor <= cfg.c_g * eps_u_m + 1e-15) {
                ++level;
                if (expansions < cfg.max_expansions) {
                    const UBox& abox = boxes[static_cast<size_t>(anchor)];
                    const Eigen::VectorXd* inc =
                        abox.state.incumbent_x.size() > 0 ? &abox.state.incumbent_x : nullptr;
                    try {
                        TaskSpec child = gen_domain_double(abox.state.spec, inc, expansions, expand,
                                                           "box" + std::to_string(boxes.size() + 1));
                        bool duplicate = false;
                        for (const auto& b : boxes) {
                            bool same = true;
                            for (int d = 0; d < cfg.bench.dim && same; ++d)
                                same = std::abs(b.state.spec.domain.lower[d] - child.domain.lower[d]) < 1e-9 &&
                                       std::abs(b.state.spec.domain.upper[d] - child.domain.upper[d]) < 1e-9;
                            if (same) duplicate = true;
                        }
                        if (!duplicate) {
                            boxes.push_back(make_box(child.domain, static_cast<int>(boxes.size()) + 1));
                            ++expansions;
                        }
                    } catch (const std::runtime_error&) {
                        // cap reached or degenerate clip; level still advances
                    }
                }
            }
        }
    }
    out.expansions = expansions;
    out.final_level = level;
    const Eigen::VectorXd opt = cfg.bench.optimizer();
    for (const auto& b : boxes)
        if (b.state.spec.domain.contains(opt, 1e-9)) out.covered_optimum = true;
    out.csv = csv.str();
    return out;
}

std::vector<double> run_fixed_domain_single(const UnknownSpaceConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const double f_star = cfg.bench.optimum_value();
    UBox box = make_box(cfg.initial_box, 1);
    std::vector<double> regret;
    double best_true = -std::numeric_limits<double>::infinity();
    for (int t = 1; t <= cfg.T; ++t) {
        const Eigen::VectorXd x = LocalBo::propose(box.state, box.solver, cfg.bo, 1, rng);
        const double y = eval_benchmark(cfg.bench, x, rng);
        record_eval(box.state, x, y);
        LocalBo::after_record(box.state, box.solver, cfg.bo, 1);
        best_true = std::max(best_true, eval_benchmark_true(cfg.bench, x));
        regret.push_back(f_star - best_true);
    }
    return regret;
}

// ---------------------------------------------------------------------------
// Acquisition race
// ---------------------------------------------------------------------------

RaceResult run_acq_race(const RaceConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const double f_star = cfg.bench.optimum_value();
    const Box& domain = cfg.bench.bounds;

    // calibration: robust scale = q-quantile of the gap over uniform points
    std::vector<double> gaps(static_cast<size_t>(cfg.calib_points));
    Eigen::VectorXd xc(domain.dim());
    for (int i = 0; i < cfg.calib_points; ++i) {
        for (int d = 0; d < domain.dim(); ++d) xc[d] = rng.uniform(domain.lower[d], domain.upper[d]);
        gaps[static_cast<size_t>(i)] = f_star - eval_benchmark_true(cfg.bench, xc);
    }
    std::sort(gaps.begin(), gaps.end());
    const double robust_scale =
        gaps[static_cast<size_t>(std::floor(cfg.quantile * (cfg.calib_points - 1)))];

    // shared initial design
    std::vector<Eigen::VectorXd> init_x;
    std::vector<double> init_y;
    double y_init_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.n_init; ++i) {
        Eigen::VectorXd x(domain.dim());
        for (int d = 0; d < domain.dim(); ++d) x[d] = rng.uniform(domain.lower[d], domain.upper[d]);
        init_x.push_back(x);
        init_y.push_back(eval_benchmark(cfg.bench, x, rng));
        y_init_max = std::max(y_init_max, eval_benchmark_true(cfg.bench, x));
    }
    const double denom = std::max(f_star - y_init_max, robust_scale);

    struct Agent {
        TaskState state;
        TaskSolver solver;
        double best_true = -std::numeric_limits<double>::infinity();
        double cum_regret = 0.0;
    };
    auto make_agent = [&](const std::string& name) {
        Agent agent;
        agent.state.spec.task_id = name;
        agent.state.spec.domain = domain;
        agent.state.dataset.noise_lambda = 1e-6;
        for (size_t i = 0; i < init_x.size(); ++i) {
            record_eval(agent.state, init_x[i], init_y[i]);
            agent.best_true = std::max(agent.best_true, eval_benchmark_true(cfg.bench, init_x[i]));
        }
        return agent;
    };
    Agent ei_agent = make_agent("ei");
    Agent ucb_agent = make_agent("ucb");

    LocalBoConfig bo = cfg.bo;
    bo.n_init = 0; // shared design supplied above

    auto step_agent = [&](Agent& agent, bool use_ei) {
        if (!agent.solver.kernel_set) {
            agent.solver.kernel = bo.kernel_for(domain);
            agent.solver.kernel_set = true;
        }
        // standardized fit, acquisition in standardized units
        GpDataset data = agent.state.dataset;
        double mean = 0.0;
        for (double y : data.outputs) mean += y;
        mean /= data.size();
        double var = 0.0;
        for (double y : data.outputs) var += (y - mean) * (y - mean);
        var /= data.size();
        const double sd = std::max(std::sqrt(var), 1e-8);
        for (auto& y : data.outputs) y = (y - mean) / sd;
        if (bo.refit_every > 0 && agent.state.local_counter % bo.refit_every == 0) {
            const auto grid = default_hyper_grid(bo.kernel_for(domain));
            agent.solver.kernel = fit_hyperparameters(data, grid, agent.solver.kernel);
        }
        const GpPosterior post = GpPosterior::fit(data, agent.solver.kernel);
        Eigen::VectorXd x;
        if (use_ei) {
            const double best_std = (agent.state.incumbent - mean) / sd;
            acq_select_value(
                post, [best_std](double mu, double s) { return expected_improvement(mu, s, best_std); },
                domain, bo.search, rng, &x);
        } else {
            ucb_select_value(post, bo.ucb.fixed_beta, domain, bo.search, rng, &x);
        }
        const double y = eval_benchmark(cfg.bench, x, rng);
        record_eval(agent.state, x, y);
        agent.best_true = std::max(agent.best_true, eval_benchmark_true(cfg.bench, x));
    };

    RaceResult out;
    out.denom = denom;
    std::ostringstream csv;
    csv << "s,regret_ei,regret_ucb,gap,gap_max,utility\n";
    double gap_max = -std::numeric_limits<double>::infinity();
    const bool target_ei = cfg.target == "ei";
    for (int s = 1; s <= cfg.steps; ++s) {
        step_agent(ei_agent, true);
        step_agent(ucb_agent, false);
        const double r_ei = (f_star - ei_agent.best_true) / denom;
        const double r_ucb = (f_star - ucb_agent.best_true) / denom;
        ei_agent.cum_regret += r_ei;
        ucb_agent.cum_regret += r_ucb;
        const double score_ei = -ei_agent.cum_regret / s;
        const double score_ucb = -ucb_agent.cum_regret / s;
        const double gap = cfg.gap_scale * (target_ei ? score_ei - score_ucb : score_ucb - score_ei);
        gap_max = std::max(gap_max, gap);
        const double u = sigmoid((gap_max - cfg.kappa) / cfg.tau);
        out.gap.push_back(gap);
        out.utility.push_back(u);
        out.regret_ei.push_back(r_ei);
        out.regret_ucb.push_back(r_ucb);
        csv << s << ',' << format_double(r_ei) << ',' << format_double(r_ucb) << ','
            << format_double(gap) << ',' << format_double(gap_max) << ',' << format_double(u) << '\n';
    }
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------------------
// Delta-plus diagnostics
// ---------------------------------------------------------------------------

std::vector<DeltaPlusRow> run_delta_plus(const PlantedFamily& family, const DeltaPlusConfig& cfg) {
    std::vector<DeltaPlusRow> rows;
    const TaskSpec anchor = family.seed_task();
    for (int m = 0; m <= cfg.max_level; ++m) {
        const int gen_level = cfg.coarse_to_fine ? m : 0;
        const double tol = std::pow(2.0, -m); // eps_u0 = 1
        const auto probe = [&](const TaskSpec& spec, std::uint64_t seed) {
            return family.probe_utility(spec, cfg.probe_budget, seed);
        };
        const DeltaPlusResult res =
            estimate_delta_plus(anchor, gen_level, cfg.J, cfg.schedule, family.schema(), tol, probe,
                                cfg.seeds, Rng::mix(cfg.base_seed, static_cast<std::uint64_t>(m)));
        DeltaPlusRow row;
        row.m = m;
        row.rho = cfg.schedule.rho(gen_level);
        row.delta_plus = res.delta_plus;
        row.mean_distance = res.mean_task_distance;
        row.children = res.children;
        row.batch_failure_bound = std::pow(1.0 - res.delta_plus, 3);
        rows.push_back(row);
    }
    return rows;
}

std::string delta_plus_csv(const std::vector<DeltaPlusRow>& rows) {
    std::ostringstream out;
    out << "m,rho_m,delta_plus,mean_task_distance,children,batch_failure_bound\n";
    for (const auto& r : rows)
        out << r.m << ',' << format_double(r.rho) << ',' << format_double(r.delta_plus) << ','
            << format_double(r.mean_distance) << ',' << r.children << ','
            << format_double(r.batch_failure_bound) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Full GSR drivers
// ---------------------------------------------------------------------------

RunLog run_gsr_planted(const PlantedFamily& family, const GsrConfig& cfg,
                       const CommitteeConfig& committee, std::uint64_t seed) {
    MutationGenerator generator(MutationSchedule{}, &family.schema());
    CommitteeConfig cc = committee;
    if (cfg.epsf_targeted_votes) cc.sizing_mode = CommitteeConfig::SizingMode::epsf_targeted;
    BtCommitteeOracle oracle(family.bt_world(), cc);
    return run_gsr(family, generator, oracle, cfg, seed);
}

EnvelopeRunStats run_gsr_envelope(const EnvelopeFamily& family, const GsrConfig& cfg,
                                  const CommitteeConfig& committee, std::uint64_t seed) {
    FixedPoolGenerator generator(family.pool_tasks());
    BtCommitteeOracle oracle(family.bt_world(), committee);
    GsrConfig run_cfg = cfg;
    run_cfg.epsf_targeted_votes =
        committee.sizing_mode == CommitteeConfig::SizingMode::epsf_targeted;
    GsrRun run(family, generator, oracle, run_cfg, seed);

    EnvelopeRunStats stats;
    while (!run.done()) {
        const GsrRun::StepInfo info = run.step();
        const TaskRegistry& reg = run.registry();
        for (const auto& id : reg.creation_order()) {
            const TaskState& st = reg.state(id);
            const double U = family.task_value(st.spec);
            if (U < st.envelope.lower - 1e-9 || U > st.envelope.upper + 1e-9) stats.all_valid = false;
        }
        if (run_cfg.epsf_targeted_votes) {
            const TaskState& st = reg.state(info.task_id);
            if (st.envelope.has_checkpoint &&
                !width_bound_check(st.envelope, info.eps_f, run_cfg.envelope))
                stats.width_bound_ok = false;
        }
    }
    stats.log = run.finish();
    return stats;
}

namespace {

// One independently-seeded full GSR state advanced by the balancing wrapper.
class GsrRungRunner final : public RungRunner {
public:
    GsrRungRunner(const PlantedFamily& family, const GsrConfig& cfg,
                  const CommitteeConfig& committee, double lipschitz, std::uint64_t seed)
        : family_(family),
          generator_(MutationSchedule{}, &family.schema()),
          oracle_(family.bt_world(), aligned_committee(cfg, committee)) {
        GsrConfig rung_cfg = cfg;
        rung_cfg.envelope.lipschitz_bound = lipschitz;
        run_ = std::make_unique<GsrRun>(family_, generator_, oracle_, rung_cfg, seed);
    }

    static CommitteeConfig aligned_committee(const GsrConfig& cfg, CommitteeConfig cc) {
        if (cfg.epsf_targeted_votes) cc.sizing_mode = CommitteeConfig::SizingMode::epsf_targeted;
        return cc;
    }

    Obs advance(Rng&) override {
        const GsrRun::StepInfo info = run_->step();
        return {info.u_estimate, run_->causal_gap_bound(run_->round())};
    }
    double next_gap(long n) const override { return run_->causal_gap_bound(static_cast<int>(n)); }

private:
    const PlantedFamily& family_;
    MutationGenerator generator_;
    BtCommitteeOracle oracle_;
    std::unique_ptr<GsrRun> run_;
};

} // namespace

WrapperLog run_balance_gsr(const PlantedFamily& family, const BalanceConfig& wrapper_cfg,
                           const GsrConfig& rung_cfg, const CommitteeConfig& committee,
                           std::uint64_t seed) {
    GsrConfig inner = rung_cfg;
    inner.T = wrapper_cfg.T; // each rung may be advanced up to the wrapper horizon
    BalanceEliminate wrapper(wrapper_cfg, [&](int j, double l_j) {
        return std::make_unique<GsrRungRunner>(family, inner, committee, l_j,
                                               Rng::mix(seed, static_cast<std::uint64_t>(j) + 101));
    });
    return wrapper.run(seed);
}

} // namespace gsr::bench
