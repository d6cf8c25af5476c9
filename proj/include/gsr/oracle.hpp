#pragma once

#include <functional>
#include <string>

#include "gsr/task.hpp"
#include "gsr/utility.hpp"

namespace gsr {

// Simulated Bradley-Terry preference world over (task, incumbent) pairs. The
// reference is pinned at theta = 0, so the win rate against the reference is
// sigmoid(theta), i.e. the cardinal utility itself.
class BtWorld {
public:
    using ScoreFn = std::function<double(const TaskSpec&, double incumbent)>;
    BtWorld() = default;
    explicit BtWorld(ScoreFn theta) : theta_(std::move(theta)) {}

    double theta(const TaskSpec& spec, double incumbent) const { return theta_(spec, incumbent); }
    double win_prob(const TaskSpec& a, double za, const TaskSpec& b, double zb) const;
    double win_prob_vs_reference(const TaskSpec& a, double za) const;

private:
    ScoreFn theta_;
};

// K independent Bernoulli votes of candidate over anchor; returns the win count.
int simulate_votes(const BtWorld& world, const TaskSpec& cand, double cand_incumbent,
                   const TaskSpec& anchor, double anchor_incumbent, int K, Rng& rng);
int simulate_votes_vs_reference(const BtWorld& world, const TaskSpec& cand, double cand_incumbent,
                                int K, Rng& rng);

// Snapshot of the anchor used for vote transport: the anchor's utility interval
// at its own last checkpoint, with the incumbent it was taken at. The spec
// pointer refers into the registry owned by the run.
struct AnchorCache {
    bool valid = false;
    const TaskSpec* spec = nullptr;
    double incumbent = 0.0;
    UtilityInterval interval = UtilityInterval{0.5, 0.5, UtilityInterval::Source::direct};
};

struct UtilityQuery {
    UtilityInterval interval;
    double estimate = 0.5;
    long votes = 0;
};

class UtilityOracle {
public:
    virtual ~UtilityOracle() = default;
    // width_target > 0 requests an interval of width at most that value
    // (used by the epsf- and width-targeted committee sizing modes).
    virtual UtilityQuery query(const TaskSpec& spec, double incumbent, const AnchorCache& anchor,
                               long call_index, double width_target, Rng& rng) = 0;
};

// Simulated preference committee with Hoeffding win-rate intervals and
// moving-anchor log-odds transport. Falls back to direct feedback against the
// fixed reference when the cached anchor interval is unusable.
class BtCommitteeOracle final : public UtilityOracle {
public:
    BtCommitteeOracle(BtWorld world, CommitteeConfig config)
        : world_(std::move(world)), cfg_(config) {
        cfg_.check();
    }
    UtilityQuery query(const TaskSpec& spec, double incumbent, const AnchorCache& anchor,
                       long call_index, double width_target, Rng& rng) override;

    const CommitteeConfig& config() const { return cfg_; }
    const BtWorld& world() const { return world_; }

private:
    BtWorld world_;
    CommitteeConfig cfg_;
};

// Direct noisy scalar utility feedback (sub-Gaussian ratings clipped to [0,1]).
class DirectUtilityOracle final : public UtilityOracle {
public:
    using TrueUtilityFn = std::function<double(const TaskSpec&, double incumbent)>;
    DirectUtilityOracle(TrueUtilityFn u, double sigma_u2, double delta_u)
        : u_(std::move(u)), sigma_u2_(sigma_u2), delta_u_(delta_u) {}
    UtilityQuery query(const TaskSpec& spec, double incumbent, const AnchorCache& anchor,
                       long call_index, double width_target, Rng& rng) override;

private:
    TrueUtilityFn u_;
    double sigma_u2_;
    double delta_u_;
};

} // namespace gsr
