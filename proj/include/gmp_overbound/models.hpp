#pragma once

#include <Eigen/Core>

#include "gmp_overbound/types.hpp"

namespace gmpbound {

/// Continuous-time GMP spectral density 2 sigma^2 / tau / (omega^2 + 1/tau^2).
double psd_continuous(double omega, const GmpSpec& spec);

/// Spectral density of the sampled GMP on [0, pi/dt].
double psd_discrete(double omega, const GmpSpec& spec, const SamplingSpec& sampling);

/// The GMP a bound model describes: variance k * sigma2, time constant tau_hat.
GmpSpec bound_process(const BoundModel& bound, double sigma2);

/// Tightest stationary continuous-time overbound for tau in `interval`.
BoundModel continuous_bound(const TauInterval& interval, double sigma2);
BoundModel continuous_bound(const TauInterval& interval, const VarianceInterval& variance);

/// Tightest stationary overbound of the sampled process, obtained at the
/// intersection of the omega = 0 and omega = pi/dt dominance constraints.
BoundModel discrete_bound(const TauInterval& interval, const SamplingSpec& sampling,
                          double sigma2 = 1.0);

/// Smallest initial-variance inflation k0 (sigma0^2 = k0 sigma^2) that keeps
/// the 2x2 autocovariance ordering for every n, p and tau. The binding point
/// is n = 0, p = 1, tau = tau_min. Degenerate intervals return 1.
double nonstationary_k0(const TauInterval& interval, const SamplingSpec& sampling,
                        const BoundModel& bound);

/// Continuous bound with its k0, in non-stationary mode.
BoundModel nonstationary_bound(const TauInterval& interval, const SamplingSpec& sampling,
                               double sigma2 = 1.0);

DiscreteGmpParams gmp_discrete_params(const GmpSpec& spec, const SamplingSpec& sampling);

/// E[a_n a_p] of a GMP started from a_0 ~ N(0, sigma0_2). Symmetric in (n, p).
double autocov_nonstationary(long n, long p, double sigma0_2, double sigma2, double alpha);

/// [[r_nn, r_np], [r_np, r_pp]] of the bound model. Uses k0 when the bound
/// carries one, otherwise the stationary initialization k. Requires bound.dt.
Eigen::Matrix2d acm2(long n, long p, const BoundModel& bound, double sigma2);

/// Autocovariance matrix of the stationary truth process.
Eigen::Matrix2d truth_acm2(long n, long p, const GmpSpec& truth, const SamplingSpec& sampling);

}  // namespace gmpbound
