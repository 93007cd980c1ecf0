#include "gmp_overbound/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace gmpbound {

namespace {

// 1 - exp(-x) without cancellation for small x.
double one_minus_exp_neg(double x) { return -std::expm1(-x); }

}  // namespace

double psd_continuous(double omega, const GmpSpec& spec) {
    if (!(omega >= 0.0)) throw InvalidInput("omega", "omega < 0");
    const double beta = spec.beta();
    return 2.0 * spec.sigma2() * beta / (omega * omega + beta * beta);
}

double psd_discrete(double omega, const GmpSpec& spec, const SamplingSpec& sampling) {
    if (!(omega >= 0.0)) throw InvalidInput("omega", "omega < 0");
    if (omega > sampling.nyquist() * (1.0 + 1e-12)) {
        throw InvalidInput("omega", "omega beyond the Nyquist frequency pi/dt");
    }
    const double dt = sampling.dt();
    const double alpha = std::exp(-dt / spec.tau());
    const double one_minus_a2 = one_minus_exp_neg(2.0 * dt / spec.tau());
    // 1 + a^2 - 2a cos(w dt) = (1 - a)^2 + 2a (1 - cos(w dt))
    const double one_minus_a = one_minus_exp_neg(dt / spec.tau());
    const double half = 0.5 * omega * dt;
    const double one_minus_cos = 2.0 * std::sin(half) * std::sin(half);
    const double denom = one_minus_a * one_minus_a + 2.0 * alpha * one_minus_cos;
    return spec.sigma2() * dt * one_minus_a2 / denom;
}

GmpSpec bound_process(const BoundModel& bound, double sigma2) {
    return GmpSpec(bound.k * sigma2, bound.tau_hat);
}

BoundModel continuous_bound(const TauInterval& interval, double sigma2) {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw InvalidInput("sigma2", "sigma2 < 0");
    BoundModel b;
    b.mode = BoundMode::ContinuousStationary;
    b.sigma2 = sigma2;
    if (interval.degenerate()) {
        b.tau_hat = interval.tau_min();
        b.k = 1.0;
        return b;
    }
    b.tau_hat = std::sqrt(interval.tau_min() * interval.tau_max());
    b.k = std::sqrt(interval.tau_max() / interval.tau_min());
    return b;
}

BoundModel continuous_bound(const TauInterval& interval, const VarianceInterval& variance) {
    return continuous_bound(interval, variance.sigma2_max());
}

BoundModel discrete_bound(const TauInterval& interval, const SamplingSpec& sampling, double sigma2) {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw InvalidInput("sigma2", "sigma2 < 0");
    BoundModel b;
    b.mode = BoundMode::DiscreteStationary;
    b.dt = sampling.dt();
    b.sigma2 = sigma2;
    if (interval.degenerate()) {
        b.tau_hat = interval.tau_min();
        b.k = 1.0;
        return b;
    }
    const double dt = sampling.dt();
    const double a_min = std::exp(-dt / interval.tau_min());
    const double a_max = std::exp(-dt / interval.tau_max());
    const double om_min = one_minus_exp_neg(dt / interval.tau_min());
    const double om_max = one_minus_exp_neg(dt / interval.tau_max());

    // Constraint 1 (omega -> 0, tau_max):  k (1+ah)/(1-ah) >= (1+a_max)/(1-a_max)
    // Constraint 2 (omega -> pi/dt, tau_min): k (1-ah)/(1+ah) >= (1-a_min)/(1+a_min)
    // Both active: k^2 = product of right-hand sides, and the ratio fixes ah.
    b.k = std::sqrt((1.0 + a_max) * om_min / (om_max * (1.0 + a_min)));
    const double r = std::sqrt(om_min * om_max / ((1.0 + a_min) * (1.0 + a_max)));
    // ah = (1 - r) / (1 + r)  =>  ln(ah) = log1p(-2r / (1 + r))
    b.tau_hat = -dt / std::log1p(-2.0 * r / (1.0 + r));
    return b;
}

double nonstationary_k0(const TauInterval& interval, const SamplingSpec& sampling,
                        const BoundModel& bound) {
    if (interval.degenerate()) return 1.0;
    const double dt = sampling.dt();
    const double k = bound.k;
    const double a_hat = std::exp(-dt / bound.tau_hat);
    const double w = k * one_minus_exp_neg(2.0 * dt / bound.tau_hat);  // k (1 - ah^2)
    const double one_minus_a2 = one_minus_exp_neg(2.0 * dt / interval.tau_min());
    const double one_minus_ah = one_minus_exp_neg(dt / bound.tau_hat);
    const double one_minus_a = one_minus_exp_neg(dt / interval.tau_min());
    // -1 - ah^2 + 2 ah a  ==  -(1 - ah)^2 - 2 ah (1 - a)
    const double num = w - one_minus_a2;
    const double den = w - one_minus_ah * one_minus_ah - 2.0 * a_hat * one_minus_a;
    // The (1,1) entry sigma0^2 - sigma^2 >= 0 forces k0 >= 1.
    return std::max(1.0, num / den);
}

BoundModel nonstationary_bound(const TauInterval& interval, const SamplingSpec& sampling,
                               double sigma2) {
    BoundModel b = continuous_bound(interval, sigma2);
    b.k0 = nonstationary_k0(interval, sampling, b);
    b.mode = BoundMode::NonStationary;
    b.dt = sampling.dt();
    return b;
}

DiscreteGmpParams gmp_discrete_params(const GmpSpec& spec, const SamplingSpec& sampling) {
    const double x = sampling.dt() / spec.tau();
    return {std::exp(-x), spec.sigma2() * one_minus_exp_neg(2.0 * x)};
}

double autocov_nonstationary(long n, long p, double sigma0_2, double sigma2, double alpha) {
    if (n < 0) throw InvalidInput("n", "time index n < 0");
    if (p < 0) throw InvalidInput("p", "time index p < 0");
    const long lag = std::labs(p - n);
    // stationary part plus initial transient
    return sigma2 * std::pow(alpha, static_cast<double>(lag)) +
           (sigma0_2 - sigma2) * std::pow(alpha, static_cast<double>(n + p));
}

Eigen::Matrix2d acm2(long n, long p, const BoundModel& bound, double sigma2) {
    if (!bound.dt) throw InvalidInput("dt", "bound model has no sampling interval");
    if (n < 0 || p < n) throw InvalidInput("n", "acm2 requires 0 <= n <= p");
    const double a_hat = std::exp(-*bound.dt / bound.tau_hat);
    const double var = bound.k * sigma2;
    const double var0 = bound.k0.value_or(bound.k) * sigma2;
    Eigen::Matrix2d r;
    r(0, 0) = autocov_nonstationary(n, n, var0, var, a_hat);
    r(0, 1) = autocov_nonstationary(n, p, var0, var, a_hat);
    r(1, 0) = r(0, 1);
    r(1, 1) = autocov_nonstationary(p, p, var0, var, a_hat);
    return r;
}

Eigen::Matrix2d truth_acm2(long n, long p, const GmpSpec& truth, const SamplingSpec& sampling) {
    if (n < 0 || p < n) throw InvalidInput("n", "truth_acm2 requires 0 <= n <= p");
    const double alpha = std::exp(-sampling.dt() / truth.tau());
    const double s2 = truth.sigma2();
    const double off = s2 * std::pow(alpha, static_cast<double>(p - n));
    Eigen::Matrix2d r;
    r << s2, off, off, s2;
    return r;
}

}  // namespace gmpbound
