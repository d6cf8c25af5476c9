#include "gsr/generator.hpp"

#include <algorithm>
#include <cmath>

#include "gsr/math.hpp"

namespace gsr {

std::vector<std::string> validate(const TaskSpec& spec, const ParamSchema& schema) {
    std::vector<std::string> violations;
    if (spec.task_id.empty()) violations.push_back("empty task_id");
    if (spec.level_m < 0) violations.push_back("negative level_m");
    if (schema.domain_ref.dim() > 0 && spec.domain.dim() != schema.domain_ref.dim())
        violations.push_back("domain dimension does not match schema");
    for (int d = 0; d < spec.domain.dim(); ++d) {
        if (!(spec.domain.lower[d] < spec.domain.upper[d]))
            violations.push_back("degenerate bound dim " + std::to_string(d));
        else if (schema.min_span_frac > 0.0 && schema.domain_ref.dim() == spec.domain.dim()) {
            const double min_span = schema.min_span_frac * schema.domain_ref.width(d);
            if (spec.domain.width(d) < min_span - 1e-12)
                violations.push_back("span below minimum in dim " + std::to_string(d));
        }
    }
    for (const auto& f : schema.fields) {
        const auto it = spec.params.find(f.name);
        if (it == spec.params.end()) {
            violations.push_back("missing field " + f.name);
            continue;
        }
        if (static_cast<int>(it->second.size()) != f.arity) {
            violations.push_back("bad arity for field " + f.name);
            continue;
        }
        if (f.lo >= 0.0)
            for (double v : it->second)
                if (v < f.lo - 1e-12) violations.push_back("negative value in field " + f.name);
        if (f.kind == FieldDef::Kind::simplex) {
            double sum = 0.0;
            bool nonneg = true;
            for (double v : it->second) {
                sum += v;
                if (v < -1e-12) nonneg = false;
            }
            if (!nonneg || std::abs(sum - 1.0) > 1e-9)
                violations.push_back("simplex violation in field " + f.name);
        }
    }
    return violations;
}

std::vector<TaskSpec> dedup(const std::vector<TaskSpec>& candidates, const TaskRegistry& registry,
                            double tolerance) {
    const ParamSchema* schema = registry.schema();
    std::vector<TaskSpec> kept;
    for (const auto& cand : candidates) {
        bool duplicate = false;
        if (schema) {
            for (const auto& id : registry.creation_order()) {
                if (task_distance(cand, registry.state(id).spec, *schema) <= tolerance) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate)
                for (const auto& prev : kept)
                    if (task_distance(cand, prev, *schema) <= tolerance) {
                        duplicate = true;
                        break;
                    }
        }
        if (!duplicate) kept.push_back(cand);
    }
    return kept;
}

namespace {

// Editable slots: schema fields first, then domain dimensions when editable.
struct EditSlot {
    int field_index; // -1 for a domain dimension edit
    int dim;
};

std::vector<EditSlot> editable_slots(const ParamSchema& schema) {
    std::vector<EditSlot> slots;
    for (int i = 0; i < static_cast<int>(schema.fields.size()); ++i)
        if (schema.fields[static_cast<size_t>(i)].editable) slots.push_back({i, -1});
    if (schema.domain_editable)
        for (int d = 0; d < schema.domain_ref.dim(); ++d) slots.push_back({-1, d});
    return slots;
}

bool differs(double a, double b) { return std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

// Apply one edit; returns false when no differing value could be produced.
bool apply_edit(TaskSpec& child, const TaskSpec& anchor, const Eigen::VectorXd* incumbent_x,
                const EditSlot& slot, int m, const MutationSchedule& sched,
                const ParamSchema& schema, Rng& rng) {
    if (slot.field_index >= 0) {
        const FieldDef& f = schema.fields[static_cast<size_t>(slot.field_index)];
        auto& vals = child.params[f.name];
        const auto& base = anchor.params.at(f.name);
        switch (f.kind) {
            case FieldDef::Kind::scalar: {
                const bool is_target = f.name.rfind("target", 0) == 0 || f.name.find("_target") != std::string::npos;
                const double step = is_target ? sched.step_target(m) : sched.step_weight(m);
                for (int attempt = 0; attempt < 8; ++attempt) {
                    const double xi = rng.uniform(-1.0, 1.0);
                    const double v = clip(base[0] + step * xi, f.lo, f.hi);
                    if (differs(v, base[0])) {
                        vals[0] = v;
                        return true;
                    }
                }
                return false;
            }
            case FieldDef::Kind::vector: {
                const double step = sched.step_target(m);
                for (int attempt = 0; attempt < 8; ++attempt) {
                    bool changed = false;
                    std::vector<double> v(base.size());
                    for (size_t i = 0; i < base.size(); ++i) {
                        v[i] = clip(base[i] + step * rng.uniform(-1.0, 1.0), f.lo, f.hi);
                        changed = changed || differs(v[i], base[i]);
                    }
                    if (changed) {
                        vals = v;
                        return true;
                    }
                }
                return false;
            }
            case FieldDef::Kind::simplex: {
                const double step = sched.step_weight(m);
                for (int attempt = 0; attempt < 8; ++attempt) {
                    Eigen::VectorXd w(f.arity);
                    for (int i = 0; i < f.arity; ++i)
                        w[i] = base[static_cast<size_t>(i)] + step * rng.normal();
                    const Eigen::VectorXd proj = simplex_project(w);
                    bool changed = false;
                    for (int i = 0; i < f.arity; ++i)
                        changed = changed || differs(proj[i], base[static_cast<size_t>(i)]);
                    if (changed) {
                        for (int i = 0; i < f.arity; ++i) vals[static_cast<size_t>(i)] = proj[i];
                        return true;
                    }
                }
                return false;
            }
        }
        return false;
    }

    // domain shrink: recenter this dimension around the anchor's incumbent design
    const int d = slot.dim;
    const Box& ref = schema.domain_ref;
    const double ref_w = ref.dim() > d ? ref.width(d) : anchor.domain.width(d);
    const double old_w = anchor.domain.width(d);
    const double new_w = std::max(sched.min_span_frac * ref_w, old_w * (1.0 - sched.shrink(m)));
    double center = incumbent_x && incumbent_x->size() > d
                        ? (*incumbent_x)[d]
                        : 0.5 * (anchor.domain.lower[d] + anchor.domain.upper[d]);
    center += 0.05 * new_w * rng.uniform(-1.0, 1.0); // small jitter
    double lo = center - 0.5 * new_w;
    double hi = center + 0.5 * new_w;
    if (ref.dim() > d) {
        if (lo < ref.lower[d]) {
            hi += ref.lower[d] - lo;
            lo = ref.lower[d];
        }
        if (hi > ref.upper[d]) {
            lo -= hi - ref.upper[d];
            hi = ref.upper[d];
        }
        lo = std::max(lo, ref.lower[d]);
    }
    if (!(lo < hi)) return false;
    if (!differs(lo, anchor.domain.lower[d]) && !differs(hi, anchor.domain.upper[d])) return false;
    child.domain.lower[d] = lo;
    child.domain.upper[d] = hi;
    return true;
}

} // namespace

GenResult gen_mutations(const TaskSpec& anchor, const Eigen::VectorXd* anchor_incumbent_x, int m,
                        int J, const MutationSchedule& schedule, const ParamSchema& schema,
                        const TaskRegistry& registry, Rng& rng, double dedup_tolerance) {
    if (J < 1) throw std::invalid_argument("gen_mutations: J must be >= 1");
    GenResult result;
    const auto slots = editable_slots(schema);
    if (slots.empty()) return result;

    const double rho_m = schedule.rho(m);
    const int n_edits =
        std::max(1, static_cast<int>(std::llround(rho_m * static_cast<double>(slots.size()))));

    int serial = 0;
    const int attempt_budget = 10 * J;
    for (int attempt = 0; attempt < attempt_budget && static_cast<int>(result.accepted.size()) < J;
         ++attempt) {
        ++result.raw_proposals;
        TaskSpec child = anchor;
        child.parent_id = anchor.task_id;
        child.level_m = m;
        child.task_id = anchor.task_id + "-m" + std::to_string(m) + "." + std::to_string(serial++);
        child.notes.clear();

        // choose n_edits distinct slots uniformly
        std::vector<int> idx(slots.size());
        for (size_t i = 0; i < slots.size(); ++i) idx[i] = static_cast<int>(i);
        for (int i = 0; i < n_edits; ++i) {
            const int j = i + rng.uniform_int(static_cast<int>(slots.size()) - i);
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
        }
        bool ok = true;
        for (int i = 0; i < n_edits && ok; ++i)
            ok = apply_edit(child, anchor, anchor_incumbent_x, slots[static_cast<size_t>(idx[i])], m,
                            schedule, schema, rng);
        if (!ok) {
            result.rejected.push_back({child, "edit produced no change"});
            continue;
        }
        const auto violations = validate(child, schema);
        if (!violations.empty()) {
            result.rejected.push_back({child, violations.front()});
            continue;
        }
        std::vector<TaskSpec> pool = result.accepted;
        pool.push_back(child);
        if (dedup(pool, registry, dedup_tolerance).size() != pool.size()) {
            result.rejected.push_back({child, "duplicate"});
            continue;
        }
        result.accepted.push_back(std::move(child));
    }
    return result;
}

TaskSpec gen_domain_double(const TaskSpec& anchor, const Eigen::VectorXd* anchor_incumbent_x,
                           int expansion_count, const ExpansionConfig& config,
                           const std::string& child_id) {
    config.check();
    if (expansion_count >= config.max_expansions)
        throw std::runtime_error("gen_domain_double: expansion cap reached");
    TaskSpec child = anchor;
    child.task_id = child_id;
    child.parent_id = anchor.task_id;
    child.level_m = anchor.level_m + 1;
    const int dim = anchor.domain.dim();
    for (int d = 0; d < dim; ++d) {
        const double w = anchor.domain.width(d);
        const double a = anchor_incumbent_x && anchor_incumbent_x->size() == dim
                             ? (*anchor_incumbent_x)[d]
                             : 0.5 * (anchor.domain.lower[d] + anchor.domain.upper[d]);
        double lo = a - 0.5 * config.rho_expand * w;
        double hi = a + 0.5 * config.rho_expand * w;
        if (config.has_clip_box) {
            lo = std::max(lo, config.clip_box.lower[d]);
            hi = std::min(hi, config.clip_box.upper[d]);
        }
        child.domain.lower[d] = lo;
        child.domain.upper[d] = hi;
    }
    if (!child.domain.nondegenerate())
        throw std::runtime_error("gen_domain_double: clipping produced a degenerate box");
    return child;
}

DeltaPlusResult estimate_delta_plus(
    const TaskSpec& anchor, int m, int J, const MutationSchedule& schedule,
    const ParamSchema& schema, double success_tol,
    const std::function<double(const TaskSpec&, std::uint64_t seed)>& probe_utility, int n_seeds,
    std::uint64_t base_seed) {
    if (n_seeds < 1) throw std::invalid_argument("estimate_delta_plus: need at least one seed");
    long successes = 0;
    long children = 0;
    double dist_sum = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        Rng rng(Rng::mix(base_seed, static_cast<std::uint64_t>(s)));
        TaskRegistry scratch(&schema);
        TaskSpec anchor_copy = anchor;
        anchor_copy.parent_id.reset();
        scratch.register_task(anchor_copy);
        const GenResult gen = gen_mutations(anchor, nullptr, m, J, schedule, schema, scratch, rng);
        if (gen.accepted.empty()) continue;

        const std::uint64_t probe_seed = Rng::mix(base_seed, 0x9e37u + static_cast<std::uint64_t>(s));
        std::vector<double> u_hat;
        u_hat.reserve(gen.accepted.size() + 1);
        double best = probe_utility(anchor, probe_seed);
        for (size_t i = 0; i < gen.accepted.size(); ++i) {
            const double u = probe_utility(gen.accepted[i], Rng::mix(probe_seed, i + 1));
            u_hat.push_back(u);
            best = std::max(best, u);
            dist_sum += task_distance(gen.accepted[i], anchor, schema);
        }
        for (double u : u_hat) {
            ++children;
            if (best - u <= success_tol) ++successes;
        }
    }
    DeltaPlusResult out;
    out.children = static_cast<int>(children);
    out.delta_plus = children > 0 ? static_cast<double>(successes) / static_cast<double>(children) : 0.0;
    out.mean_task_distance = children > 0 ? dist_sum / static_cast<double>(children) : 0.0;
    return out;
}

GenResult MutationGenerator::generate(const TaskSpec& anchor, const TaskState& anchor_state, int m,
                                      int J, const TaskRegistry& registry, Rng& rng) {
    const Eigen::VectorXd* inc =
        anchor_state.incumbent_x.size() > 0 ? &anchor_state.incumbent_x : nullptr;
    return gen_mutations(anchor, inc, m, J, schedule_, *schema_, registry, rng, dedup_tol_);
}

GenResult DomainDoublingGenerator::generate(const TaskSpec& anchor, const TaskState& anchor_state,
                                            int m, int /*J*/, const TaskRegistry& registry,
                                            Rng& /*rng*/) {
    GenResult result;
    if (expansions_ >= cfg_.max_expansions) return result;
    const Eigen::VectorXd* inc =
        anchor_state.incumbent_x.size() > 0 ? &anchor_state.incumbent_x : nullptr;
    const std::string id = "box" + std::to_string(registry.size() + 1);
    TaskSpec child;
    try {
        child = gen_domain_double(anchor, inc, expansions_, cfg_, id);
    } catch (const std::runtime_error&) {
        return result;
    }
    child.level_m = m;
    result.raw_proposals = 1;
    // reject boxes identical to an existing one
    for (const auto& tid : registry.creation_order()) {
        const Box& b = registry.state(tid).spec.domain;
        bool same = true;
        for (int d = 0; d < b.dim() && same; ++d)
            same = std::abs(b.lower[d] - child.domain.lower[d]) < 1e-9 &&
                   std::abs(b.upper[d] - child.domain.upper[d]) < 1e-9;
        if (same) {
            result.rejected.push_back({child, "duplicate box"});
            return result;
        }
    }
    ++expansions_;
    result.accepted.push_back(std::move(child));
    return result;
}

} // namespace gsr
