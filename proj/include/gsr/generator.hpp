#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gsr/rng.hpp"
#include "gsr/task.hpp"

namespace gsr {

struct MutationSchedule {
    double rho0 = 0.5;           // rho_m = rho0 * 2^-m
    double step_weight0 = 0.3;   // Delta_w^0, scalar weight edits
    double step_target0 = 0.25;  // Delta_t^0, target-field edits
    double shrink0 = 0.5;        // domain shrink factor at m = 0
    double min_span_frac = 0.15; // floor on shrunk dimension width (fraction of ref width)

    double rho(int m) const { return rho0 * std::pow(2.0, -m); }
    double step_weight(int m) const { return step_weight0 * std::pow(2.0, -m); }
    double step_target(int m) const { return step_target0 * std::pow(2.0, -m); }
    double shrink(int m) const { return shrink0 * std::pow(2.0, -m); }
};

struct ExpansionConfig {
    double rho_expand = 2.0;
    int max_expansions = 10;
    double min_span_frac = 0.15;
    bool has_clip_box = false;
    Box clip_box;

    void check() const {
        if (!(rho_expand > 1.0)) throw std::invalid_argument("ExpansionConfig: rho_expand must exceed 1");
        if (!(min_span_frac > 0.0 && min_span_frac < 1.0))
            throw std::invalid_argument("ExpansionConfig: min_span_frac must lie in (0,1)");
    }
};

struct Rejection {
    TaskSpec spec;
    std::string reason;
};

struct GenResult {
    std::vector<TaskSpec> accepted;
    std::vector<Rejection> rejected;
    int raw_proposals = 0;
};

// Validation checks on a candidate spec; returns human-readable violations.
std::vector<std::string> validate(const TaskSpec& spec, const ParamSchema& schema);

// Removes candidates within task_distance <= tolerance of any registered task
// or earlier-accepted candidate.
std::vector<TaskSpec> dedup(const std::vector<TaskSpec>& candidates, const TaskRegistry& registry,
                            double tolerance = 1e-3);

// Gaussian/uniform-perturbation mutation generator implementing Gen(a, m, J).
// Each child edits max(1, round(rho_m * #editable_fields)) uniformly chosen
// editable fields with level-scaled steps; failed children are resampled up to
// 10 J attempts and the batch may come back short.
GenResult gen_mutations(const TaskSpec& anchor, const Eigen::VectorXd* anchor_incumbent_x, int m,
                        int J, const MutationSchedule& schedule, const ParamSchema& schema,
                        const TaskRegistry& registry, Rng& rng, double dedup_tolerance = 1e-3);

// Deterministic domain expansion: per dimension the new bounds are centered at
// the anchor's incumbent design (box center when unevaluated) with width
// rho_expand * current width, clipped to the configured true-domain box.
TaskSpec gen_domain_double(const TaskSpec& anchor, const Eigen::VectorXd* anchor_incumbent_x,
                           int expansion_count, const ExpansionConfig& config,
                           const std::string& child_id);

// Empirical near-optimal generation probability: children (and the anchor) are
// probed with a fixed inner budget; a child succeeds when its probe value is
// within success_tol of the batch best.
struct DeltaPlusResult {
    double delta_plus = 0.0;
    double mean_task_distance = 0.0;
    int children = 0;
};
DeltaPlusResult estimate_delta_plus(
    const TaskSpec& anchor, int m, int J, const MutationSchedule& schedule,
    const ParamSchema& schema, double success_tol,
    const std::function<double(const TaskSpec&, std::uint64_t seed)>& probe_utility, int n_seeds,
    std::uint64_t base_seed);

// Generator interface used by the GSR loop.
class TaskGenerator {
public:
    virtual ~TaskGenerator() = default;
    virtual GenResult generate(const TaskSpec& anchor, const TaskState& anchor_state, int m, int J,
                               const TaskRegistry& registry, Rng& rng) = 0;
};

class MutationGenerator final : public TaskGenerator {
public:
    MutationGenerator(MutationSchedule schedule, const ParamSchema* schema, double dedup_tol = 1e-3)
        : schedule_(schedule), schema_(schema), dedup_tol_(dedup_tol) {}
    GenResult generate(const TaskSpec& anchor, const TaskState& anchor_state, int m, int J,
                       const TaskRegistry& registry, Rng& rng) override;

private:
    MutationSchedule schedule_;
    const ParamSchema* schema_;
    double dedup_tol_;
};

class DomainDoublingGenerator final : public TaskGenerator {
public:
    explicit DomainDoublingGenerator(ExpansionConfig config) : cfg_(config) { cfg_.check(); }
    GenResult generate(const TaskSpec& anchor, const TaskState& anchor_state, int m, int J,
                       const TaskRegistry& registry, Rng& rng) override;

    int expansions_used() const { return expansions_; }

private:
    ExpansionConfig cfg_;
    int expansions_ = 0;
};

// Emits a fixed pool of specs on the first call, nothing afterwards. Used to
// seed multi-task experiments that run the loop without online generation.
class FixedPoolGenerator final : public TaskGenerator {
public:
    explicit FixedPoolGenerator(std::vector<TaskSpec> pool) : pool_(std::move(pool)) {}
    GenResult generate(const TaskSpec&, const TaskState&, int, int, const TaskRegistry&, Rng&) override {
        GenResult r;
        if (!served_) {
            r.accepted = pool_;
            r.raw_proposals = static_cast<int>(pool_.size());
            served_ = true;
        }
        return r;
    }

private:
    std::vector<TaskSpec> pool_;
    bool served_ = false;
};

class NullGenerator final : public TaskGenerator {
public:
    GenResult generate(const TaskSpec&, const TaskState&, int, int, const TaskRegistry&, Rng&) override {
        return {};
    }
};

} // namespace gsr
