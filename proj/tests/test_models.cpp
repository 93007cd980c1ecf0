#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <tuple>

#include <Eigen/LU>

#include "gmp_overbound/models.hpp"
#include "oracles.hpp"

using namespace gmpbound;

// =============================================================================
// Types
// =============================================================================

TEST(Types, RejectsInvalidValues) {
    EXPECT_THROW(GmpSpec(-1.0, 10.0), InvalidInput);
    EXPECT_THROW(GmpSpec(1.0, 0.0), InvalidInput);
    EXPECT_THROW(TauInterval(0.0, 10.0), InvalidInput);
    EXPECT_THROW(SamplingSpec(0.0), InvalidInput);
    EXPECT_THROW(VarianceInterval(2.0, 1.0), InvalidInput);
    EXPECT_THROW(FrequencyGrid({1.0, 1.0}), InvalidInput);
    EXPECT_THROW(FrequencyGrid({-1.0}), InvalidInput);
    EXPECT_THROW(FrequencyGrid({}), InvalidInput);
}

TEST(Types, InvalidIntervalNamesParameter) {
    try {
        TauInterval(100.0, 10.0);
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_EQ(e.parameter(), "tau_max");
        EXPECT_STREQ(e.what(), "tau_max < tau_min");
    }
}

TEST(Types, BetaIsDerived) {
    const GmpSpec spec(1.0, 8.0);
    EXPECT_DOUBLE_EQ(spec.beta(), 0.125);
}

TEST(Types, LogGridHitsEndpointsExactly) {
    const auto g = TauInterval(10.0, 100.0).log_grid(50);
    ASSERT_EQ(g.size(), 50u);
    EXPECT_EQ(g.front(), 10.0);
    EXPECT_EQ(g.back(), 100.0);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(Types, DiscreteDefaultGridIncludesZeroAndNyquist) {
    const SamplingSpec s(2.0);
    const auto g = FrequencyGrid::discrete_default(s, 1000);
    EXPECT_EQ(g.values().front(), 0.0);
    EXPECT_EQ(g.values().back(), s.nyquist());
}

// =============================================================================
// PSDs
// =============================================================================

TEST(PsdContinuous, PeakIsTwoSigmaSquaredTau) {
    EXPECT_NEAR(psd_continuous(0.0, GmpSpec(1.0, 100.0)), 200.0, 1e-12);
}

TEST(PsdContinuous, HalfPowerPoint) {
    EXPECT_NEAR(psd_continuous(0.1, GmpSpec(1.0, 10.0)), 10.0, 1e-12);
}

TEST(PsdContinuous, ZeroPowerProcess) {
    EXPECT_EQ(psd_continuous(3.0, GmpSpec(0.0, 50.0)), 0.0);
}

TEST(PsdContinuous, StrictlyDecreasing) {
    const GmpSpec spec(2.0, 7.0);
    double prev = psd_continuous(0.0, spec);
    for (double w = 1e-3; w < 1e3; w *= 1.5) {
        const double cur = psd_continuous(w, spec);
        EXPECT_LT(cur, prev);
        EXPECT_GT(cur, 0.0);
        prev = cur;
    }
}

TEST(PsdContinuous, NegativeFrequencyRejected) {
    EXPECT_THROW(psd_continuous(-1.0, GmpSpec(1.0, 1.0)), InvalidInput);
}

TEST(PsdDiscrete, ZeroFrequency) {
    // sigma^2 dt (1 - a^2) / (1 - a)^2 with a = e^-0.1
    EXPECT_NEAR(psd_discrete(0.0, GmpSpec(1.0, 10.0), SamplingSpec(1.0)), 20.0166638895502, 1e-11);
}

TEST(PsdDiscrete, NyquistFrequency) {
    EXPECT_NEAR(psd_discrete(std::numbers::pi, GmpSpec(1.0, 10.0), SamplingSpec(1.0)), 0.04995837495788002,
                1e-15);
}

TEST(PsdDiscrete, WhiteNoiseLimit) {
    const SamplingSpec s(1.0);
    const GmpSpec nearly_white(1.0, 1e-4);
    for (double w : {0.0, 1.0, std::numbers::pi}) {
        EXPECT_NEAR(psd_discrete(w, nearly_white, s), 1.0, 1e-12);
    }
}

TEST(PsdDiscrete, ApproachesContinuousForFineSampling) {
    const GmpSpec spec(1.0, 10.0);
    const SamplingSpec s(1e-4);
    for (double w : {0.0, 0.05, 0.5}) {
        EXPECT_NEAR(psd_discrete(w, spec, s) / psd_continuous(w, spec), 1.0, 1e-6);
    }
}

TEST(PsdDiscrete, BeyondNyquistRejected) {
    EXPECT_THROW(psd_discrete(3.2, GmpSpec(1.0, 10.0), SamplingSpec(1.0)), InvalidInput);
}

// =============================================================================
// Continuous bound
// =============================================================================

TEST(ContinuousBound, RunningExample) {
    const BoundModel b = continuous_bound(TauInterval(10.0, 100.0), 1.0);
    EXPECT_NEAR(b.tau_hat, 31.6227766016838, 1e-9);
    EXPECT_NEAR(b.k, 3.16227766016838, 1e-12);
    EXPECT_EQ(b.mode, BoundMode::ContinuousStationary);
}

TEST(ContinuousBound, MatchesBisectionOracle) {
    for (auto [lo, hi] : {std::pair{10.0, 100.0}, {1.0, 10.0}, {0.5, 700.0}, {3.0, 3.5}}) {
        const auto ref = oracle::continuous_by_bisection(lo, hi);
        const BoundModel b = continuous_bound(TauInterval(lo, hi), 1.0);
        EXPECT_NEAR(b.k / ref.k, 1.0, 1e-12);
        EXPECT_NEAR(b.tau_hat / ref.tau_hat, 1.0, 1e-12);
    }
}

TEST(ContinuousBound, DegenerateIntervalIsIdentity) {
    const BoundModel b = continuous_bound(TauInterval(42.0, 42.0), 3.0);
    EXPECT_EQ(b.tau_hat, 42.0);
    EXPECT_EQ(b.k, 1.0);
    EXPECT_EQ(b.variance(), 3.0);
}

TEST(ContinuousBound, LinearInVariance) {
    const BoundModel b = continuous_bound(TauInterval(10.0, 100.0), 2.0);
    EXPECT_NEAR(b.tau_hat, 31.6227766016838, 1e-9);
    EXPECT_NEAR(b.variance(), 6.32455532033676, 1e-12);
}

TEST(ContinuousBound, UncertainVarianceUsesMaximum) {
    const BoundModel b = continuous_bound(TauInterval(10.0, 100.0), VarianceInterval(0.5, 2.0));
    EXPECT_EQ(b.sigma2, 2.0);
    EXPECT_NEAR(b.variance(), 6.32455532033676, 1e-12);
}

TEST(ContinuousBound, ConstraintsActiveAndMonotone) {
    double prev_k = 0.0;
    for (double ratio = 1.0; ratio < 1e4; ratio *= 1.7) {
        const TauInterval iv(2.0, 2.0 * ratio);
        const BoundModel b = continuous_bound(iv, 1.0);
        EXPECT_NEAR(b.k * b.tau_hat / iv.tau_max(), 1.0, 1e-12);
        EXPECT_NEAR((b.k / b.tau_hat) * iv.tau_min(), 1.0, 1e-12);
        EXPECT_GE(b.k, prev_k);
        EXPECT_EQ(b.k == 1.0, ratio == 1.0);
        prev_k = b.k;
    }
}

// =============================================================================
// Discrete bound
// =============================================================================

TEST(DiscreteBound, CoarseSamplingExample) {
    const BoundModel b = discrete_bound(TauInterval(1.0, 10.0), SamplingSpec(2.0));
    const auto ref = oracle::discrete_by_bisection(1.0, 10.0, 2.0);
    EXPECT_NEAR(ref.k, 2.764292155907287, 1e-9);
    EXPECT_NEAR(b.k, ref.k, 1e-12);
    EXPECT_NEAR(b.tau_hat, ref.tau_hat, 1e-9);
    EXPECT_LT(b.k, continuous_bound(TauInterval(1.0, 10.0), 1.0).k);
}

TEST(DiscreteBound, AgreesWithExpTauForm) {
    for (auto [lo, hi, dt] : {std::tuple{1.0, 10.0, 2.0}, {10.0, 100.0, 1.0}, {10.0, 100.0, 0.1}, {2.0, 5.0, 7.0}}) {
        const BoundModel b = discrete_bound(TauInterval(lo, hi), SamplingSpec(dt));
        EXPECT_NEAR(b.tau_hat / oracle::tau_d_exp_form(lo, hi, dt), 1.0, 1e-9);
    }
}

TEST(DiscreteBound, NegatedKFormMirrorsBound) {
    for (auto [lo, hi, dt] : {std::tuple{1.0, 10.0, 2.0}, {10.0, 100.0, 1.0}}) {
        const BoundModel b = discrete_bound(TauInterval(lo, hi), SamplingSpec(dt));
        EXPECT_LT(oracle::k_d_negated_form(lo, hi, dt), 0.0);
        EXPECT_NEAR(-oracle::k_d_negated_form(lo, hi, dt), b.k, 1e-9);
    }
}

TEST(DiscreteBound, BothConstraintsActive) {
    const double dt = 2.0;
    const TauInterval iv(1.0, 10.0);
    const BoundModel b = discrete_bound(iv, SamplingSpec(dt));
    const double ah = std::exp(-dt / b.tau_hat);
    const double a_min = std::exp(-dt / iv.tau_min());
    const double a_max = std::exp(-dt / iv.tau_max());
    EXPECT_NEAR(b.k, (a_max + 1) * (1 - ah) / ((1 - a_max) * (ah + 1)), 1e-12);
    EXPECT_NEAR(b.k, (1 - a_min) * (ah + 1) / ((a_min + 1) * (1 - ah)), 1e-12);
}

TEST(DiscreteBound, ContinuousLimit) {
    const TauInterval iv(10.0, 100.0);
    const BoundModel c = continuous_bound(iv, 1.0);
    for (double dt : {1e-3, 1e-2}) {
        const BoundModel d = discrete_bound(iv, SamplingSpec(dt));
        EXPECT_LE(std::fabs(d.k - c.k) / c.k, 1e-3);
        EXPECT_LE(std::fabs(d.tau_hat - c.tau_hat) / c.tau_hat, 1e-3);
    }
    EXPECT_NEAR(discrete_bound(iv, SamplingSpec(1e-3)).k, 3.16228, 1e-4);
}

TEST(DiscreteBound, DegenerateIntervalIsIdentity) {
    const BoundModel b = discrete_bound(TauInterval(5.0, 5.0), SamplingSpec(0.3));
    EXPECT_EQ(b.k, 1.0);
    EXPECT_EQ(b.tau_hat, 5.0);
    EXPECT_EQ(b.mode, BoundMode::DiscreteStationary);
    ASSERT_TRUE(b.dt.has_value());
    EXPECT_EQ(*b.dt, 0.3);
}

// =============================================================================
// Non-stationary k0
// =============================================================================

TEST(NonstationaryK0, FrozenValues) {
    // Confirmed against the bisection oracle and the (n, p, tau) grid scan.
    const TauInterval iv(10.0, 100.0);
    const BoundModel b = continuous_bound(iv, 1.0);
    EXPECT_NEAR(nonstationary_k0(iv, SamplingSpec(0.1), b), 1.5160422268212248, 1e-12);
    EXPECT_NEAR(nonstationary_k0(iv, SamplingSpec(1.0), b), 1.4860040428160664, 1e-12);
}

TEST(NonstationaryK0, MatchesBisectionAtBindingPoint) {
    const TauInterval iv(10.0, 100.0);
    const BoundModel b = continuous_bound(iv, 1.0);
    for (double dt : {0.1, 1.0, 5.0}) {
        const double ref = oracle::k0_by_bisection(0, 1, iv.tau_min(), b.k, b.tau_hat, dt);
        EXPECT_NEAR(nonstationary_k0(iv, SamplingSpec(dt), b), ref, 1e-9) << "dt=" << dt;
    }
}

TEST(NonstationaryK0, DegenerateIntervalIsOne) {
    const TauInterval iv(20.0, 20.0);
    EXPECT_EQ(nonstationary_k0(iv, SamplingSpec(0.5), continuous_bound(iv, 1.0)), 1.0);
}

TEST(NonstationaryK0, BracketedByOneAndK) {
    for (auto [lo, hi] : {std::pair{1.0, 10.0}, {10.0, 100.0}, {1.0, 1000.0}, {5.0, 6.0}, {0.2, 30.0}}) {
        const TauInterval iv(lo, hi);
        const BoundModel b = continuous_bound(iv, 1.0);
        for (double dt : {1e-3, 0.1, 0.5 * lo, lo}) {
            const double k0 = nonstationary_k0(iv, SamplingSpec(dt), b);
            EXPECT_GE(k0, 1.0);
            EXPECT_LE(k0, b.k);
        }
    }
}

TEST(NonstationaryK0, IndependentOfVariance) {
    const TauInterval iv(10.0, 100.0);
    EXPECT_EQ(nonstationary_bound(iv, SamplingSpec(0.1), 1.0).k0, nonstationary_bound(iv, SamplingSpec(0.1), 7.5).k0);
}

// =============================================================================
// Discrete GMP parameters and autocovariance
// =============================================================================

TEST(GmpDiscreteParams, ExampleSetting) {
    const auto p = gmp_discrete_params(GmpSpec(1.0, 50.0), SamplingSpec(1.0));
    EXPECT_NEAR(p.alpha, 0.980198673306755, 1e-14);
    EXPECT_NEAR(p.q_d, 0.0392105608476768, 1e-15);
}

TEST(GmpDiscreteParams, Limits) {
    const auto slow = gmp_discrete_params(GmpSpec(1.0, 1e12), SamplingSpec(1.0));
    EXPECT_NEAR(slow.alpha, 1.0, 1e-11);
    EXPECT_NEAR(slow.q_d, 0.0, 1e-11);
    const auto fine = gmp_discrete_params(GmpSpec(1.0, 1.0), SamplingSpec(1e-12));
    EXPECT_NEAR(fine.alpha, 1.0, 1e-11);
    EXPECT_GT(fine.q_d, 0.0);
    EXPECT_NEAR(fine.q_d, 2e-12, 1e-20);
}

TEST(Autocov, Origin) { EXPECT_EQ(autocov_nonstationary(0, 0, 2.5, 1.0, 0.7), 2.5); }

TEST(Autocov, KnownCrossTerm) {
    EXPECT_NEAR(autocov_nonstationary(1, 3, 2.0, 1.0, 0.5), 0.3125, 1e-15);
    EXPECT_NEAR(oracle::autocov_by_expansion(1, 3, 2.0, 1.0, 0.5), 0.3125, 1e-15);
}

TEST(Autocov, StationaryReduction) {
    for (long n = 0; n <= 20; ++n) {
        for (long p = n; p <= 20; ++p) {
            EXPECT_NEAR(autocov_nonstationary(n, p, 1.3, 1.3, 0.9), 1.3 * std::pow(0.9, double(p - n)), 1e-14);
        }
    }
}

TEST(Autocov, MatchesExpansionOracleAndIsSymmetric) {
    for (double alpha : {0.1, 0.5, 0.9, 0.99}) {
        for (double ratio : {0.5, 1.0, 2.0}) {
            for (long n = 0; n <= 20; ++n) {
                for (long p = 0; p <= 20; ++p) {
                    const double got = autocov_nonstationary(n, p, ratio * 1.7, 1.7, alpha);
                    const double ref = oracle::autocov_by_expansion(n, p, ratio * 1.7, 1.7, alpha);
                    ASSERT_LE(std::fabs(got - ref), 1e-12 * std::fabs(ref)) << n << "," << p;
                    ASSERT_EQ(got, autocov_nonstationary(p, n, ratio * 1.7, 1.7, alpha));
                }
            }
        }
    }
}

TEST(Acm2, RepeatedIndexIsRankDeficient) {
    const BoundModel b = nonstationary_bound(TauInterval(10.0, 100.0), SamplingSpec(0.1));
    const auto r = acm2(4, 4, b, 1.0);
    EXPECT_EQ(r(0, 0), r(0, 1));
    EXPECT_EQ(r(0, 0), r(1, 1));
}

TEST(Acm2, StationaryTruthReduction) {
    BoundModel truth_as_bound;
    truth_as_bound.tau_hat = 50.0;
    truth_as_bound.k = 1.0;
    truth_as_bound.dt = 1.0;
    const GmpSpec truth(2.0, 50.0);
    for (auto [n, p] : {std::pair{0L, 0L}, {0L, 5L}, {3L, 9L}}) {
        EXPECT_TRUE(acm2(n, p, truth_as_bound, 2.0).isApprox(truth_acm2(n, p, truth, SamplingSpec(1.0)), 1e-14));
    }
}

TEST(Acm2, DirectSubstitution) {
    const BoundModel b = nonstationary_bound(TauInterval(10.0, 100.0), SamplingSpec(0.1));
    const auto r = acm2(0, 1, b, 1.0);
    EXPECT_NEAR(r(0, 0), 1.5160422268212248, 1e-12);
    EXPECT_NEAR(r(0, 1), 1.511255652582679, 1e-12);
    EXPECT_NEAR(r(1, 1), 1.5264210784828305, 1e-12);
    const double ah = std::exp(-0.1 / b.tau_hat);
    EXPECT_NEAR(r(0, 1), oracle::autocov_by_expansion(0, 1, *b.k0, b.k, ah), 1e-12);
    EXPECT_GE(r.determinant(), -1e-15);
}
