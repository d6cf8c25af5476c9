#include "gsr/gsr.hpp"

#include <cmath>
#include <sstream>

#include "gsr/math.hpp"

namespace gsr {

int max_depth(int T, double a_constant, int cap) {
    if (T < 1) throw std::invalid_argument("max_depth: T must be >= 1");
    if (!(a_constant > 0.0)) return cap;
    const double log_et = std::log(std::exp(1.0) * static_cast<double>(T));
    const double ratio = static_cast<double>(T) / (a_constant * log_et * log_et);
    if (ratio <= 1.0) return 0;
    const int depth = static_cast<int>(std::floor(0.5 * std::log2(ratio)));
    return std::min(cap, std::max(0, depth));
}

double max_depth_a_constant(double c_v, double lipschitz_bound, double lambda, double psi,
                            double c_g, double eps_u0) {
    const double num = 2.0 * c_v * lipschitz_bound * std::sqrt(c_lambda(lambda) * std::max(0.0, psi));
    const double root = num / (c_g * eps_u0);
    return root * root;
}

std::string select_task(const TaskRegistry& registry) {
    if (registry.size() == 0) throw std::invalid_argument("select_task: empty registry");
    std::string best;
    double best_upper = -1.0;
    int best_count = 0;
    for (const auto& id : registry.creation_order()) {
        const TaskState& st = registry.state(id);
        const double upper = st.envelope.upper;
        if (best.empty() || upper > best_upper ||
            (upper == best_upper && st.local_counter < best_count)) {
            best = id;
            best_upper = upper;
            best_count = st.local_counter;
        }
    }
    return best;
}

std::string select_anchor(const TaskRegistry& registry, double eps_u_m, double c_g) {
    if (registry.size() == 0) throw std::invalid_argument("select_anchor: empty registry");
    double min_width = std::numeric_limits<double>::infinity();
    for (const auto& id : registry.creation_order())
        min_width = std::min(min_width, registry.state(id).envelope.width());
    const double threshold = std::max(c_g * eps_u_m, min_width);

    std::string best;
    double best_lower = -1.0;
    for (const auto& id : registry.creation_order()) {
        const TaskState& st = registry.state(id);
        if (st.envelope.width() > threshold + 1e-15) continue;
        if (best.empty() || st.envelope.lower > best_lower) {
            best = id;
            best_lower = st.envelope.lower;
        }
    }
    return best;
}

bool should_refine(double anchor_width, const LadderState& ladder, double c_g, int mbar) {
    return ladder.m < mbar && anchor_width <= c_g * ladder.eps_u() + 1e-15;
}

GsrRun::GsrRun(const TaskEnvironment& env, TaskGenerator& generator, UtilityOracle& oracle,
               GsrConfig config, std::uint64_t seed)
    : env_(env),
      generator_(generator),
      oracle_(oracle),
      cfg_(config),
      rng_(seed),
      registry_(&env.schema(), config.noise_lambda) {
    cfg_.check();
    ladder_.eps_u0 = cfg_.eps_u0;

    const TaskSpec seed_spec = env_.seed_task();
    registry_.register_task(seed_spec);
    // initial batch Gen(i0, 0, J) before the loop
    const TaskState& seed_state = registry_.state(seed_spec.task_id);
    GenResult init_batch =
        generator_.generate(seed_spec, seed_state, 0, cfg_.J, registry_, rng_);
    for (const auto& spec : init_batch.accepted) registry_.register_task(spec);
    aux_.push_back({0, init_batch.accepted.empty() ? "generate_empty" : "generate",
                    static_cast<int>(init_batch.accepted.size())});
}

double GsrRun::causal_gap_bound(int n) const {
    if (n < 1) return std::numeric_limits<double>::infinity();
    if (cfg_.bo.gap.mode == GapSchedule::Mode::surrogate)
        return cfg_.bo.gap.eps0 / std::sqrt(static_cast<double>(n));
    return 2.0 * std::sqrt(c_lambda(cfg_.noise_lambda) * std::max(ladder_.psi_running, 1e-12) /
                           static_cast<double>(n));
}

GsrRun::StepInfo GsrRun::step() {
    if (done()) throw std::logic_error("GsrRun::step past the horizon");
    ++t_;

    const std::string id = select_task(registry_);
    TaskState& state = registry_.state(id);
    const int task_index = registry_.task_index(id);
    TaskSolver& solver = solvers_[id];

    // one GP-UCB step
    const Eigen::VectorXd x = LocalBo::propose(state, solver, cfg_.bo, task_index, rng_);
    const double y = env_.evaluate(state.spec, x, rng_);
    record_eval(state, x, y);
    const double y_true = env_.evaluate_true(state.spec, x);
    if (std::isfinite(y_true)) state.incumbent_true = std::max(state.incumbent_true, y_true);

    const GapInfo gap = LocalBo::after_record(state, solver, cfg_.bo, task_index);
    ladder_.psi_running = std::max(ladder_.psi_running, gap.beta_s * gap.gamma_s);

    // utility feedback and envelope update for the selected task
    const double lip = cfg_.envelope.lipschitz_bound;
    StepInfo info;
    info.task_id = id;
    info.eps_f = gap.eps_f;
    long votes_this_round = 0;
    if (cfg_.envelope.is_checkpoint_step(state.local_counter)) {
        ++util_calls_;
        const double width_target =
            cfg_.epsf_targeted_votes ? cfg_.envelope.c_u * lip * gap.eps_f : 0.0;
        const UtilityQuery q =
            oracle_.query(state.spec, state.incumbent, anchor_cache_, util_calls_, width_target, rng_);
        UtilityInterval interval = q.interval;
        if (cfg_.envelope.intersect_at_checkpoint && state.envelope.has_checkpoint) {
            const UtilityInterval prop = propagate(state.envelope, state.incumbent, lip);
            const double lo = std::max(interval.lower, prop.lower);
            const double hi = std::min(interval.upper, prop.upper);
            if (lo <= hi) interval = UtilityInterval::of(lo, hi, interval.source);
        }
        votes_this_round = q.votes;
        votes_ += q.votes;
        info.u_estimate = q.estimate;
        state.utility_interval = interval;
        state.last_checkpoint = state.local_counter;
        ValueEnvelope env = update_envelope(interval, gap.eps_f, lip);
        env.has_checkpoint = true;
        env.checkpoint_step = state.local_counter;
        env.checkpoint_interval = interval;
        env.checkpoint_incumbent = state.incumbent;
        state.envelope = env;
    } else {
        const UtilityInterval prop = propagate(state.envelope, state.incumbent, lip);
        ValueEnvelope env = update_envelope(prop, gap.eps_f, lip);
        env.has_checkpoint = state.envelope.has_checkpoint;
        env.checkpoint_step = state.envelope.checkpoint_step;
        env.checkpoint_interval = state.envelope.checkpoint_interval;
        env.checkpoint_incumbent = state.envelope.checkpoint_incumbent;
        state.utility_interval = prop;
        state.envelope = env;
        info.u_estimate = 0.5 * (prop.lower + prop.upper);
    }

    // anchor from the post-update registry
    const std::string anchor_id = select_anchor(registry_, ladder_.eps_u(), cfg_.c_g);
    const TaskState& anchor_state = registry_.state(anchor_id);
    anchor_cache_.valid = anchor_state.envelope.has_checkpoint;
    anchor_cache_.spec = &anchor_state.spec;
    anchor_cache_.incumbent = anchor_state.envelope.checkpoint_incumbent;
    anchor_cache_.interval = anchor_state.envelope.checkpoint_interval;

    // generation gate; the surrogate schedule substitutes eps0 for the
    // 2 sqrt(C_lambda Psi) horizon factor in A_T
    int mbar;
    if (cfg_.level_cap_override >= 0) {
        mbar = cfg_.level_cap_override;
    } else if (cfg_.bo.gap.mode == GapSchedule::Mode::surrogate) {
        const double root = cfg_.envelope.envelope_constant() * lip * cfg_.bo.gap.eps0 /
                            (cfg_.c_g * cfg_.eps_u0);
        mbar = max_depth(cfg_.T, root * root, ladder_.level_cap);
    } else {
        const double a_const = max_depth_a_constant(cfg_.envelope.envelope_constant(), lip,
                                                    cfg_.noise_lambda, ladder_.psi_running,
                                                    cfg_.c_g, cfg_.eps_u0);
        mbar = max_depth(cfg_.T, a_const, ladder_.level_cap);
    }
    ladder_.mbar_running_max = std::max(ladder_.mbar_running_max, mbar);

    EventTag event = EventTag::eval;
    if (should_refine(anchor_state.envelope.width(), ladder_, cfg_.c_g, mbar)) {
        ladder_.m += 1;
        event = EventTag::level_up;
        run_generation(t_, anchor_id);
    }

    EvalRecord rec;
    rec.t = t_;
    rec.task_id = id;
    rec.level_m = ladder_.m;
    rec.x = x;
    rec.y = y;
    rec.incumbent = state.incumbent;
    rec.incumbent_true = state.incumbent_true;
    rec.u_lower = state.utility_interval.lower;
    rec.u_upper = state.utility_interval.upper;
    rec.env_lower = state.envelope.lower;
    rec.env_upper = state.envelope.upper;
    rec.width = state.envelope.width();
    rec.event = event;
    rec.votes_used = votes_this_round;
    registry_.event_log().push_back(rec);
    return info;
}

void GsrRun::run_generation(int t, const std::string& anchor_id) {
    const TaskState& anchor_state = registry_.state(anchor_id);
    GenResult gen =
        generator_.generate(anchor_state.spec, anchor_state, ladder_.m, cfg_.J, registry_, rng_);
    for (const auto& spec : gen.accepted) registry_.register_task(spec);
    aux_.push_back({t, gen.accepted.empty() ? "generate_empty" : "generate",
                    static_cast<int>(gen.accepted.size())});
}

RunLog GsrRun::finish() {
    RunLog log;
    log.records = registry_.event_log();
    log.aux_events = aux_;
    log.votes_total = votes_;
    log.n_tasks = registry_.size();
    log.final_level = ladder_.m;
    log.mbar_final = ladder_.mbar_running_max;
    log.psi_final = ladder_.psi_running;
    log.lambda_t = std::log(std::exp(1.0) * static_cast<double>(cfg_.T));

    // most promising pessimistic task at the horizon
    std::string best;
    double best_lower = -1.0;
    for (const auto& id : registry_.creation_order()) {
        const TaskState& st = registry_.state(id);
        if (best.empty() || st.envelope.lower > best_lower) {
            best = id;
            best_lower = st.envelope.lower;
        }
    }
    log.best_task = best;
    if (!best.empty()) log.best_design = registry_.state(best).incumbent_x;

    const double ustar = env_.u_star();
    if (std::isfinite(ustar)) {
        log.regret = task_regret(
            log.records,
            [this](const std::string& id, double z) {
                return env_.true_utility(registry_.state(id).spec, z);
            },
            ustar);
    }
    return log;
}

RunLog run_gsr(const TaskEnvironment& env, TaskGenerator& generator, UtilityOracle& oracle,
               const GsrConfig& config, std::uint64_t seed) {
    GsrRun run(env, generator, oracle, config, seed);
    while (!run.done()) run.step();
    return run.finish();
}

std::vector<double> task_regret(const std::vector<EvalRecord>& records,
                                const std::function<double(const std::string&, double)>& true_utility,
                                double u_star) {
    std::vector<double> series;
    series.reserve(records.size());
    double cum = 0.0;
    for (const auto& r : records) {
        cum += u_star - true_utility(r.task_id, r.incumbent_true);
        series.push_back(cum);
    }
    return series;
}

void RunLog::to_csv(std::ostream& out) const {
    int max_dim = 0;
    for (const auto& r : records) max_dim = std::max(max_dim, static_cast<int>(r.x.size()));
    out << "t,task_id,level_m";
    for (int d = 0; d < max_dim; ++d) out << ",x" << d;
    out << ",y,incumbent,u_lower,u_upper,U_lower,U_upper,width,event,votes_used\n";
    for (const auto& r : records) {
        out << r.t << ',' << r.task_id << ',' << r.level_m;
        for (int d = 0; d < max_dim; ++d) {
            out << ',';
            if (d < r.x.size()) out << format_double(r.x[d]);
        }
        out << ',' << format_double(r.y) << ',' << format_double(r.incumbent) << ','
            << format_double(r.u_lower) << ',' << format_double(r.u_upper) << ','
            << format_double(r.env_lower) << ',' << format_double(r.env_upper) << ','
            << format_double(r.width) << ',' << event_tag_name(r.event) << ',' << r.votes_used
            << '\n';
    }
}

std::string RunLog::to_csv_string() const {
    std::ostringstream out;
    to_csv(out);
    return out.str();
}

} // namespace gsr
