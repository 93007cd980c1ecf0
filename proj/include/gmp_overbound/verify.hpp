#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gmp_overbound/types.hpp"

namespace gmpbound {

inline constexpr double kDominanceTolerance = 1e-12;
/// Relative slack for semidefiniteness, scaled by the trace of the bound ACM.
inline constexpr double kSemidefiniteTolerance = 1e-10;

struct ConstraintCheck {
    double residual_low_freq;   // k * tau_hat - tau_max
    double residual_high_freq;  // k / tau_hat - 1 / tau_min
    bool low_freq_pass;
    bool high_freq_pass;
    bool pass() const noexcept { return low_freq_pass && high_freq_pass; }
};

ConstraintCheck check_continuous_constraints(const BoundModel& bound, const TauInterval& interval,
                                             double tol = 1e-12);

/// A single grid point where the truth PSD exceeds the bound PSD.
struct Violation {
    double omega;
    double tau;
    double excess;
};

struct DominanceReport {
    double max_violation;  // max over the grid of S_truth - S_bound
    double argmax_omega;
    double argmax_tau;
    std::size_t freq_count;
    std::size_t tau_count;
    double tolerance;
    std::vector<Violation> violations;  // worst offenders, at most kMaxListed

    static constexpr std::size_t kMaxListed = 10;
    bool pass() const noexcept { return max_violation <= tolerance; }
};

DominanceReport psd_dominance_continuous(const BoundModel& bound, const TauInterval& interval,
                                         double sigma2, const FrequencyGrid& freq_grid,
                                         std::size_t tau_count,
                                         double tol = kDominanceTolerance);

/// Discrete-time check on [0, pi/dt]. The grid must not exceed the Nyquist
/// frequency; 0 and pi/dt are always evaluated.
DominanceReport psd_dominance_discrete(const BoundModel& bound, const TauInterval& interval,
                                       double sigma2, const SamplingSpec& sampling,
                                       const FrequencyGrid& freq_grid, std::size_t tau_count,
                                       double tol = kDominanceTolerance);

struct AcmScanReport {
    double min_eigenvalue;    // smallest eigenvalue of R_hat - R, worst case
    double min_determinant;   // det(R_hat - R), worst case
    double worst_normalized;  // min_eigenvalue / trace(R_hat) at the worst point
    long arg_n;
    long arg_p;
    double arg_tau;
    std::size_t points;
    double tolerance;
    bool pass() const noexcept { return worst_normalized >= -tolerance; }
};

/// Scans every 0 <= n <= p <= n_max and tau on a log grid for R_hat(n,p) >= R(n,p).
/// The eigenvalue used is the smaller of the direct eigenvalue and det / lambda_max.
AcmScanReport acm_bound_scan(const BoundModel& bound, const TauInterval& interval, double sigma2,
                             long n_max, std::size_t tau_count,
                             double tol = kSemidefiniteTolerance);

/// Smallest eigenvalue of R_hat(n,p) - R(n,p) for a truth with time constant tau.
double acm_difference_min_eigenvalue(long n, long p, double tau, const BoundModel& bound, double sigma2);

/// Smallest sigma0^2 / sigma^2 making R_hat(n,p) - R(n,p) semidefinite at one point.
/// `determinant_ok` is false when the determinant condition has a non-positive
/// slope in sigma0^2 (the point cannot be satisfied by a lower bound on k0).
struct K0Requirement {
    double value;
    bool determinant_ok;
};

K0Requirement k0_required(long n, long p, double tau, const SamplingSpec& sampling,
                          const BoundModel& bound);

struct K0Curve {
    double tau;
    std::vector<double> k0_by_p;  // index i is p = i + 1, at n = 0
};

struct K0ScanResult {
    double global_max;
    long arg_n;
    long arg_p;
    double arg_tau;
    std::size_t points;
    std::size_t flagged;  // excluded grid points with non-positive determinant slope
    std::vector<std::string> warnings;
    std::vector<K0Curve> curves;
};

K0ScanResult k0_binding_point_scan(const TauInterval& interval, const SamplingSpec& sampling,
                                   const BoundModel& bound, long n_max, long p_max,
                                   std::size_t tau_count);

/// Key-value header followed by a violation table.
std::string to_text(const DominanceReport& report);
std::string to_text(const AcmScanReport& report);
std::string to_text(const ConstraintCheck& check);

}  // namespace gmpbound
