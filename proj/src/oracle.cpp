#include "gsr/oracle.hpp"

#include <cmath>

#include "gsr/math.hpp"

namespace gsr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double BtWorld::win_prob(const TaskSpec& a, double za, const TaskSpec& b, double zb) const {
    return sigmoid(theta_(a, za) - theta_(b, zb));
}

double BtWorld::win_prob_vs_reference(const TaskSpec& a, double za) const {
    return sigmoid(theta_(a, za));
}

int simulate_votes(const BtWorld& world, const TaskSpec& cand, double cand_incumbent,
                   const TaskSpec& anchor, double anchor_incumbent, int K, Rng& rng) {
    if (K < 1) throw std::invalid_argument("simulate_votes: K must be >= 1");
    const double p = world.win_prob(cand, cand_incumbent, anchor, anchor_incumbent);
    int wins = 0;
    for (int k = 0; k < K; ++k)
        if (rng.bernoulli(p)) ++wins;
    return wins;
}

int simulate_votes_vs_reference(const BtWorld& world, const TaskSpec& cand, double cand_incumbent,
                                int K, Rng& rng) {
    if (K < 1) throw std::invalid_argument("simulate_votes: K must be >= 1");
    const double p = world.win_prob_vs_reference(cand, cand_incumbent);
    int wins = 0;
    for (int k = 0; k < K; ++k)
        if (rng.bernoulli(p)) ++wins;
    return wins;
}

namespace {

bool anchor_usable(const AnchorCache& anchor) {
    return anchor.valid && anchor.spec != nullptr && anchor.interval.lower > 0.0 &&
           anchor.interval.upper < 1.0;
}

double transported_estimate(const UtilityInterval& anchor_interval, double p_hat, double eps_clip) {
    const double mid = 0.5 * (anchor_interval.lower + anchor_interval.upper);
    if (mid <= 0.0 || p_hat <= eps_clip) return 0.0;
    if (mid >= 1.0 || p_hat >= 1.0 - eps_clip) return 1.0;
    return sigmoid(logit(mid) + logit(p_hat));
}

} // namespace

UtilityQuery BtCommitteeOracle::query(const TaskSpec& spec, double incumbent,
                                      const AnchorCache& anchor, long call_index,
                                      double width_target, Rng& rng) {
    const double t = static_cast<double>(call_index);
    const double delta_call = cfg_.delta_u / (kPi * kPi * t * t);

    // epsf-targeted sizing votes against the fixed reference so the interval
    // width is fully vote-controlled rather than floored by the anchor width.
    if (cfg_.sizing_mode == CommitteeConfig::SizingMode::epsf_targeted && width_target > 0.0) {
        const double half = width_target / 2.0;
        const long K = std::max<long>(
            1, static_cast<long>(std::ceil(std::log(2.0 / delta_call) / (2.0 * half * half))));
        const int wins = simulate_votes_vs_reference(world_, spec, incumbent, static_cast<int>(K), rng);
        const auto p_int = hoeffding_p_interval(wins, static_cast<int>(K), delta_call);
        UtilityQuery q;
        q.interval = UtilityInterval::of(p_int.first, p_int.second, UtilityInterval::Source::direct);
        q.estimate = static_cast<double>(wins) / static_cast<double>(K);
        q.votes = K;
        return q;
    }

    const bool anchored = anchor_usable(anchor);
    const UtilityInterval anchor_interval =
        anchored ? anchor.interval : UtilityInterval{0.5, 0.5, UtilityInterval::Source::direct};

    long K = cfg_.votes_per_query;
    if (cfg_.sizing_mode == CommitteeConfig::SizingMode::width_targeted && width_target > 0.0 &&
        anchored) {
        const double eta = width_target / 2.0;
        const double w_a = logit(anchor.interval.upper) - logit(anchor.interval.lower);
        if (const auto k_exp = committee_size_explicit(eta, w_a, cfg_.kappa, delta_call))
            K = std::min<long>(std::max<long>(*k_exp, 1), cfg_.doubling_cap);
    }

    UtilityQuery q;
    int wins = 0;
    long drawn = 0;
    while (true) {
        for (long k = drawn; k < K; ++k) {
            const bool win = anchored
                                 ? rng.bernoulli(world_.win_prob(spec, incumbent, *anchor.spec,
                                                                 anchor.incumbent))
                                 : rng.bernoulli(world_.win_prob_vs_reference(spec, incumbent));
            if (win) ++wins;
        }
        drawn = K;
        const auto p_int = hoeffding_p_interval(wins, static_cast<int>(K), delta_call);
        q.interval = transport_interval(anchor_interval, p_int, cfg_.eps_clip);
        if (!anchored) q.interval.source = UtilityInterval::Source::direct;
        q.votes = K;
        const bool want_width =
            cfg_.sizing_mode == CommitteeConfig::SizingMode::width_targeted && width_target > 0.0;
        if (!want_width || q.interval.width() <= width_target || K >= cfg_.doubling_cap) break;
        K = std::min<long>(cfg_.doubling_cap, K * 2);
    }
    q.estimate = transported_estimate(anchor_interval, static_cast<double>(wins) / drawn, cfg_.eps_clip);
    return q;
}

UtilityQuery DirectUtilityOracle::query(const TaskSpec& spec, double incumbent,
                                        const AnchorCache& /*anchor*/, long call_index,
                                        double /*width_target*/, Rng& rng) {
    const double u_true = u_(spec, incumbent);
    const double u_tilde = clip(u_true + std::sqrt(sigma_u2_) * rng.normal(), 0.0, 1.0);
    UtilityQuery q;
    q.interval = utility_ci_direct(u_tilde, call_index, sigma_u2_, delta_u_);
    q.estimate = u_tilde;
    q.votes = 1;
    return q;
}

} // namespace gsr
