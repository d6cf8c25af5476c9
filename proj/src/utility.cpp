#include "gsr/utility.hpp"

#include <cmath>

#include "gsr/math.hpp"

namespace gsr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double direct_utility_cdf(double z, const CdfUtilityParams& params) {
    const double sigma = std::max(params.sigma, params.sigma_floor);
    return norm_cdf((z - params.mu) / sigma);
}

CdfUtilityParams calibrate_cdf(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Box& domain, int sample_count, Rng& rng, double sigma_floor) {
    if (sample_count < 2) throw std::invalid_argument("calibrate_cdf: need at least 2 samples");
    double sum = 0.0, sum_sq = 0.0;
    Eigen::VectorXd x(domain.dim());
    for (int i = 0; i < sample_count; ++i) {
        for (int d = 0; d < domain.dim(); ++d) x[d] = rng.uniform(domain.lower[d], domain.upper[d]);
        const double y = objective(x);
        sum += y;
        sum_sq += y * y;
    }
    const double n = static_cast<double>(sample_count);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    CdfUtilityParams p;
    p.mu = mean;
    p.sigma = std::max(std::sqrt(var), sigma_floor);
    p.sigma_floor = sigma_floor;
    return p;
}

UtilityInterval utility_ci_direct(double u_tilde, long call_index, double sigma_u2, double delta_u) {
    if (call_index < 1) throw std::invalid_argument("utility_ci_direct: call_index must be >= 1");
    const double t = static_cast<double>(call_index);
    const double delta_t = delta_u / (kPi * kPi * t * t);
    const double phi = std::sqrt(2.0 * sigma_u2 * std::log(2.0 / delta_t));
    return UtilityInterval::of(clip(u_tilde - phi, 0.0, 1.0), clip(u_tilde + phi, 0.0, 1.0),
                               UtilityInterval::Source::direct);
}

std::pair<double, double> hoeffding_p_interval(int wins, int votes, double delta_call) {
    if (votes < 1 || wins < 0 || wins > votes)
        throw std::invalid_argument("hoeffding_p_interval: need 0 <= wins <= votes");
    const double p_hat = static_cast<double>(wins) / votes;
    const double radius = std::sqrt(std::log(2.0 / delta_call) / (2.0 * votes));
    return {clip(p_hat - radius, 0.0, 1.0), clip(p_hat + radius, 0.0, 1.0)};
}

namespace {

// One transported endpoint; endpoints at {0,1} map through directly.
double transport_endpoint(double anchor_u, double p, double eps_clip) {
    if (anchor_u <= 0.0 || p <= eps_clip) return 0.0;
    if (anchor_u >= 1.0 || p >= 1.0 - eps_clip) return 1.0;
    return sigmoid(logit(anchor_u) + logit(p));
}

} // namespace

UtilityInterval transport_interval(const UtilityInterval& anchor,
                                   const std::pair<double, double>& p_interval, double eps_clip) {
    anchor.check();
    double lo = transport_endpoint(anchor.lower, p_interval.first, eps_clip);
    double hi = transport_endpoint(anchor.upper, p_interval.second, eps_clip);
    if (hi < lo) hi = lo;
    return UtilityInterval::of(lo, hi, UtilityInterval::Source::transported);
}

std::optional<long> committee_size_explicit(double eta, double anchor_logodds_width, double kappa,
                                            double delta_call) {
    if (!(eta > 0.0)) throw std::invalid_argument("committee_size_explicit: eta must be positive");
    if (anchor_logodds_width >= 8.0 * eta) return std::nullopt;
    const double log_term = std::log(2.0 / delta_call);
    const double a = 8.0 * log_term / (kappa * kappa);
    const double gap = 8.0 * eta - anchor_logodds_width;
    const double b = 32.0 * log_term / (kappa * kappa * gap * gap);
    return static_cast<long>(std::ceil(std::max(a, b)));
}

long committee_size_epsf(int s, double c_u, double lipschitz_bound, double beta_s, double gamma_s,
                         double lambda, double delta_call) {
    if (s < 1) throw std::invalid_argument("committee_size_epsf: s must be >= 1");
    const double denom = 2.0 * c_u * c_u * c_lambda(lambda) * lipschitz_bound * lipschitz_bound *
                         beta_s * gamma_s;
    const double k = static_cast<double>(s) * std::log(2.0 / delta_call) / denom;
    return std::max(1L, static_cast<long>(std::ceil(k)));
}

} // namespace gsr
