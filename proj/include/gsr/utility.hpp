#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

#include "gsr/gp.hpp"
#include "gsr/rng.hpp"

namespace gsr {

struct UtilityInterval {
    double lower = 0.0;
    double upper = 1.0;
    enum class Source { direct, transported, initial };
    Source source = Source::initial;

    double width() const { return upper - lower; }
    void check() const {
        if (!(0.0 <= lower && lower <= upper && upper <= 1.0))
            throw std::invalid_argument("UtilityInterval: requires 0 <= lower <= upper <= 1");
    }
    static UtilityInterval initial() { return UtilityInterval{}; }
    static UtilityInterval of(double lo, double hi, Source src) {
        UtilityInterval u{lo, hi, src};
        u.check();
        return u;
    }
};

struct CommitteeConfig {
    enum class SizingMode { fixed, width_targeted, epsf_targeted };
    int votes_per_query = 64; // K
    double delta_u = 0.05;
    double eps_clip = 1e-12;
    double kappa = 0.05; // non-saturation floor in (0, 1/2]
    SizingMode sizing_mode = SizingMode::fixed;
    int doubling_cap = 4096;

    void check() const {
        if (votes_per_query < 1) throw std::invalid_argument("CommitteeConfig: K must be >= 1");
        if (!(eps_clip > 0.0 && eps_clip <= 1e-3))
            throw std::invalid_argument("CommitteeConfig: eps_clip must lie in (0, 1e-3]");
        if (!(kappa > 0.0 && kappa <= 0.5))
            throw std::invalid_argument("CommitteeConfig: kappa must lie in (0, 0.5]");
    }
};

struct CdfUtilityParams {
    double mu = 0.0;
    double sigma = 1.0;
    double sigma_floor = 1e-8;
};

// Phi((z - mu) / sigma).
double direct_utility_cdf(double z, const CdfUtilityParams& params);

// Sample mean / standard deviation of S uniform-domain evaluations.
CdfUtilityParams calibrate_cdf(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Box& domain, int sample_count, Rng& rng,
                               double sigma_floor = 1e-8);

// Direct interval: phi_t = sqrt(2 sigma_u^2 log(2 / delta_t)) with
// delta_t = delta_u / (pi^2 t^2); endpoints clipped to [0,1].
UtilityInterval utility_ci_direct(double u_tilde, long call_index, double sigma_u2, double delta_u);

// Hoeffding interval for a pairwise win probability, clipped to [0,1].
std::pair<double, double> hoeffding_p_interval(int wins, int votes, double delta_call);

// Moving-anchor log-odds transport of a win-rate interval through the anchor's
// cached utility interval. Endpoints at {0,1} map through directly; interior
// logits are computed after clipping p to [eps_clip, 1 - eps_clip].
UtilityInterval transport_interval(const UtilityInterval& anchor,
                                   const std::pair<double, double>& p_interval, double eps_clip);

// Explicit committee size for target transported half-width eta given the anchor
// log-odds width w_a; nullopt when w_a >= 8 eta (anchor too uncertain).
std::optional<long> committee_size_explicit(double eta, double anchor_logodds_width, double kappa,
                                            double delta_call);

// Committee size that makes the direct interval width at most c_u * L * eps^f_s.
long committee_size_epsf(int s, double c_u, double lipschitz_bound, double beta_s, double gamma_s,
                         double lambda, double delta_call);

} // namespace gsr
