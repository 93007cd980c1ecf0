#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmp_overbound/models.hpp"
#include "gmp_overbound/verify.hpp"
#include "oracles.hpp"

using namespace gmpbound;

namespace {

const TauInterval kInterval(10.0, 100.0);

BoundModel scaled(BoundModel b, double factor) {
    b.k *= factor;
    return b;
}

}  // namespace

// -----------------------------------------------------------------------------
// Constraint residuals
// -----------------------------------------------------------------------------

TEST(Constraints, OptimalBoundSatisfiesBoth) {
    const auto c = check_continuous_constraints(continuous_bound(kInterval, 1.0), kInterval);
    EXPECT_TRUE(c.pass());
    EXPECT_NEAR(c.residual_low_freq, 0.0, 1e-12);
    EXPECT_NEAR(c.residual_high_freq, 0.0, 1e-12);
}

TEST(Constraints, ShiftedTauViolatesOneSide) {
    BoundModel b = continuous_bound(kInterval, 1.0);
    b.tau_hat *= 1.01;
    auto c = check_continuous_constraints(b, kInterval);
    EXPECT_TRUE(c.low_freq_pass);
    EXPECT_FALSE(c.high_freq_pass);
    b.tau_hat /= 1.01 * 1.01;
    c = check_continuous_constraints(b, kInterval);
    EXPECT_FALSE(c.low_freq_pass);
    EXPECT_TRUE(c.high_freq_pass);
    EXPECT_NE(to_text(c).find("constraint_low_freq: FAIL"), std::string::npos);
}

// -----------------------------------------------------------------------------
// PSD dominance
// -----------------------------------------------------------------------------

TEST(Dominance, ContinuousOptimalPasses) {
    const BoundModel b = continuous_bound(kInterval, 1.0);
    const auto r = psd_dominance_continuous(b, kInterval, 1.0, FrequencyGrid::continuous_default(kInterval), 50);
    EXPECT_TRUE(r.pass()) << to_text(r);
    EXPECT_LE(r.max_violation, kDominanceTolerance);
    EXPECT_EQ(r.freq_count, 1000u);
    EXPECT_EQ(r.tau_count, 50u);
    EXPECT_TRUE(r.violations.empty());
}

TEST(Dominance, ContinuousUndersizedFailsAtLowFrequencyTauMax) {
    const BoundModel b = scaled(continuous_bound(kInterval, 1.0), 0.99);
    const auto grid = FrequencyGrid::continuous_default(kInterval);
    const auto r = psd_dominance_continuous(b, kInterval, 1.0, grid, 50);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.argmax_tau, 100.0);
    EXPECT_EQ(r.argmax_omega, grid.values().front());
    EXPECT_NEAR(r.max_violation, 2.0, 1e-3);
    EXPECT_EQ(r.violations.size(), DominanceReport::kMaxListed);
    EXPECT_NE(to_text(r).find("result: FAIL"), std::string::npos);
    EXPECT_NE(to_text(r).find("omega,tau,excess"), std::string::npos);
}

TEST(Dominance, ContinuousFailsForShiftedTau) {
    for (double f : {0.9, 1.1}) {
        BoundModel b = continuous_bound(kInterval, 1.0);
        b.tau_hat *= f;
        EXPECT_FALSE(
            psd_dominance_continuous(b, kInterval, 1.0, FrequencyGrid::continuous_default(kInterval), 50).pass());
    }
}

TEST(Dominance, ContinuousScalesWithVariance) {
    const auto grid = FrequencyGrid::continuous_default(kInterval);
    EXPECT_TRUE(psd_dominance_continuous(continuous_bound(kInterval, 4.0), kInterval, 4.0, grid, 20).pass());
    // k is a ratio, so a bound found at unit variance carries over to any sigma^2
    EXPECT_TRUE(psd_dominance_continuous(continuous_bound(kInterval, 1.0), kInterval, 4.0, grid, 20).pass());
    EXPECT_FALSE(psd_dominance_continuous(scaled(continuous_bound(kInterval, 1.0), 0.999), kInterval, 4.0, grid, 20).pass());
}

TEST(Dominance, ContinuousEqualityWitnesses) {
    const BoundModel b = continuous_bound(kInterval, 1.0);
    const GmpSpec bound = bound_process(b, 1.0);
    EXPECT_NEAR(psd_continuous(0.0, bound), psd_continuous(0.0, GmpSpec(1.0, 100.0)), 1e-12);
    const double w = 1e6;
    EXPECT_NEAR(psd_continuous(w, bound) / psd_continuous(w, GmpSpec(1.0, 10.0)), 1.0, 1e-9);
}

TEST(Dominance, ContinuousGridRefinementStable) {
    const BoundModel b = continuous_bound(kInterval, 1.0);
    for (std::size_t count : {100u, 1000u, 10000u}) {
        const auto r = psd_dominance_continuous(b, kInterval, 1.0, FrequencyGrid::continuous_default(kInterval, count), 25);
        EXPECT_TRUE(r.pass()) << count;
    }
}

TEST(Dominance, ContinuousSweepOfIntervals) {
    for (auto [lo, hi] : {std::pair{1.0, 10.0}, {0.1, 1000.0}, {7.0, 7.5}, {50.0, 50.0}}) {
        const TauInterval iv(lo, hi);
        const auto r = psd_dominance_continuous(continuous_bound(iv, 1.0), iv, 1.0,
                                                FrequencyGrid::continuous_default(iv), 25);
        EXPECT_TRUE(r.pass()) << lo << "," << hi << "\n" << to_text(r);
    }
}

TEST(Dominance, DiscreteOptimalPasses) {
    const TauInterval iv(1.0, 10.0);
    const SamplingSpec s(2.0);
    const auto r = psd_dominance_discrete(discrete_bound(iv, s), iv, 1.0, s, FrequencyGrid::discrete_default(s), 50);
    EXPECT_TRUE(r.pass()) << to_text(r);
}

TEST(Dominance, DiscreteUndersizedFails) {
    const TauInterval iv(1.0, 10.0);
    const SamplingSpec s(2.0);
    const auto r = psd_dominance_discrete(scaled(discrete_bound(iv, s), 0.99), iv, 1.0, s,
                                          FrequencyGrid::discrete_default(s), 50);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.argmax_omega, 0.0);
    EXPECT_EQ(r.argmax_tau, 10.0);
}

TEST(Dominance, DiscreteEndpointsAlwaysChecked) {
    // A grid strictly inside (0, pi/dt) still sees the violation at omega = 0.
    const TauInterval iv(1.0, 10.0);
    const SamplingSpec s(2.0);
    const FrequencyGrid interior = FrequencyGrid::linear(0.5, 1.0, 5);
    const auto r = psd_dominance_discrete(scaled(discrete_bound(iv, s), 0.99), iv, 1.0, s, interior, 10);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.argmax_omega, 0.0);
}

TEST(Dominance, DiscreteEqualityWitnesses) {
    const TauInterval iv(1.0, 10.0);
    const SamplingSpec s(2.0);
    const GmpSpec bound = bound_process(discrete_bound(iv, s), 1.0);
    EXPECT_NEAR(psd_discrete(0.0, bound, s) / psd_discrete(0.0, GmpSpec(1.0, 10.0), s), 1.0, 1e-12);
    const double nyq = s.nyquist();
    EXPECT_NEAR(psd_discrete(nyq, bound, s) / psd_discrete(nyq, GmpSpec(1.0, 1.0), s), 1.0, 1e-12);
}

TEST(Dominance, DiscreteRejectsGridBeyondNyquist) {
    const TauInterval iv(1.0, 10.0);
    const SamplingSpec s(2.0);
    EXPECT_THROW(psd_dominance_discrete(discrete_bound(iv, s), iv, 1.0, s, FrequencyGrid::linear(0.0, 2.0, 10), 5),
                 InvalidInput);
}

TEST(Dominance, DiscreteSweepOfSettings) {
    for (auto [lo, hi, dt] : {std::tuple{1.0, 10.0, 0.1}, {10.0, 100.0, 1.0}, {10.0, 100.0, 30.0}, {2.0, 3.0, 5.0}}) {
        const TauInterval iv(lo, hi);
        const SamplingSpec s(dt);
        const auto r = psd_dominance_discrete(discrete_bound(iv, s), iv, 1.0, s, FrequencyGrid::discrete_default(s), 25);
        EXPECT_TRUE(r.pass()) << lo << "," << hi << "," << dt << "\n" << to_text(r);
    }
}

// -----------------------------------------------------------------------------
// Autocovariance ordering
// -----------------------------------------------------------------------------

TEST(AcmScan, NonstationaryBoundPasses) {
    const SamplingSpec s(0.1);
    const BoundModel b = nonstationary_bound(kInterval, s);
    const auto r = acm_bound_scan(b, kInterval, 1.0, 60, 10);
    EXPECT_TRUE(r.pass()) << to_text(r);
    EXPECT_EQ(r.points, 61u * 62u / 2u * 10u);
}

TEST(AcmScan, StationaryInitializationPasses) {
    BoundModel b = continuous_bound(kInterval, 1.0);
    b.dt = 0.1;
    EXPECT_TRUE(acm_bound_scan(b, kInterval, 1.0, 60, 10).pass());
}

TEST(AcmScan, ReducedK0Fails) {
    const SamplingSpec s(0.1);
    BoundModel b = nonstationary_bound(kInterval, s);
    b.k0 = 0.99 * *b.k0;
    const auto r = acm_bound_scan(b, kInterval, 1.0, 60, 10);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.arg_n, 0);
    EXPECT_EQ(r.arg_tau, 10.0);
    EXPECT_LT(acm_difference_min_eigenvalue(0, 1, 10.0, b, 1.0), 0.0);
}

TEST(AcmScan, ExactK0IsBoundaryAtBindingPoint) {
    const SamplingSpec s(0.1);
    const BoundModel b = nonstationary_bound(kInterval, s);
    const double lam = acm_difference_min_eigenvalue(0, 1, 10.0, b, 1.0);
    EXPECT_NEAR(lam, 0.0, 1e-12);
    BoundModel above = b;
    above.k0 = *b.k0 * 1.001;
    EXPECT_GT(acm_difference_min_eigenvalue(0, 1, 10.0, above, 1.0), 0.0);
}

TEST(AcmScan, RequiresSamplingInterval) {
    const BoundModel b = continuous_bound(kInterval, 1.0);
    EXPECT_THROW(acm_bound_scan(b, kInterval, 1.0, 5, 3), InvalidInput);
}

// -----------------------------------------------------------------------------
// k0 requirement
// -----------------------------------------------------------------------------

TEST(K0Required, BindingPointMatchesClosedForm) {
    for (double dt : {0.01, 0.1, 1.0, 10.0}) {
        const SamplingSpec s(dt);
        const BoundModel b = continuous_bound(kInterval, 1.0);
        const auto req = k0_required(0, 1, 10.0, s, b);
        EXPECT_TRUE(req.determinant_ok);
        EXPECT_NEAR(req.value, nonstationary_k0(kInterval, s, b), 1e-12) << dt;
    }
}

TEST(K0Required, MatchesBisectionOracleOnGrid) {
    const SamplingSpec s(0.1);
    const BoundModel b = continuous_bound(kInterval, 1.0);
    int compared = 0;
    for (long n = 0; n <= 6; n += 2) {
        for (long p = n + 1; p <= n + 40; p += 3) {
            for (double tau : {10.0, 21.5, 46.4, 100.0}) {
                const auto req = k0_required(n, p, tau, s, b);
                if (!req.determinant_ok || req.value > 90.0) continue;
                const double ref = oracle::k0_by_bisection(n, p, tau, b.k, b.tau_hat, s.dt());
                EXPECT_NEAR(std::max(req.value, 0.0), ref, 1e-8) << n << "," << p << "," << tau;
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 100);
}

TEST(K0Required, RejectsBadIndices) {
    const BoundModel b = continuous_bound(kInterval, 1.0);
    EXPECT_THROW(k0_required(3, 2, 10.0, SamplingSpec(0.1), b), InvalidInput);
    EXPECT_THROW(k0_required(-1, 2, 10.0, SamplingSpec(0.1), b), InvalidInput);
}

TEST(K0Scan, BindingPointIsFirstLagAtTauMin) {
    const SamplingSpec s(0.1);
    const BoundModel b = continuous_bound(kInterval, 1.0);
    const auto r = k0_binding_point_scan(kInterval, s, b, 20, 100, 10);
    EXPECT_EQ(r.arg_n, 0);
    EXPECT_EQ(r.arg_p, 1);
    EXPECT_EQ(r.arg_tau, 10.0);
    EXPECT_NEAR(r.global_max, 1.5160422268212248, 1e-12);
    ASSERT_EQ(r.curves.size(), 10u);
    for (const auto& c : r.curves) {
        ASSERT_EQ(c.k0_by_p.size(), 100u);
        EXPECT_LE(*std::max_element(c.k0_by_p.begin(), c.k0_by_p.end()), r.global_max + 1e-12);
    }
    EXPECT_EQ(r.curves.front().k0_by_p.front(), r.global_max);
}

TEST(K0Scan, MaximumAcrossSettingsMatchesClosedForm) {
    for (auto [lo, hi, dt] : {std::tuple{1.0, 10.0, 0.1}, {1.0, 100.0, 0.5}, {10.0, 1000.0, 1.0}, {5.0, 6.0, 1.0}}) {
        const TauInterval iv(lo, hi);
        const SamplingSpec s(dt);
        const BoundModel b = continuous_bound(iv, 1.0);
        const auto r = k0_binding_point_scan(iv, s, b, 10, 50, 8);
        EXPECT_NEAR(r.global_max, nonstationary_k0(iv, s, b), 1e-10) << lo << "," << hi;
    }
}

TEST(K0Scan, DegenerateInterval) {
    const TauInterval iv(20.0, 20.0);
    const auto r = k0_binding_point_scan(iv, SamplingSpec(1.0), continuous_bound(iv, 1.0), 5, 5, 3);
    EXPECT_EQ(r.global_max, 1.0);
}

TEST(K0Scan, MonotoneInSamplingInterval) {
    const BoundModel b = continuous_bound(kInterval, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double dt = 0.01; dt <= 10.0; dt *= 1.5) {
        const double k0 = nonstationary_k0(kInterval, SamplingSpec(dt), b);
        EXPECT_LE(k0, prev + 1e-12);
        prev = k0;
    }
    EXPECT_NEAR(nonstationary_k0(kInterval, SamplingSpec(1e-5), b), 1.5195, 1e-3);
}
