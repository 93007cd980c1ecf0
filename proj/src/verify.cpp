#include "gmp_overbound/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gmp_overbound/format.hpp"
#include "gmp_overbound/models.hpp"

namespace gmpbound {

namespace {

double one_minus_exp_neg(double x) { return -std::expm1(-x); }

void keep_worst(std::vector<Violation>& list, const Violation& v) {
    if (v.excess <= 0.0) return;
    if (list.size() < DominanceReport::kMaxListed) {
        list.push_back(v);
    } else {
        auto it = std::min_element(list.begin(), list.end(),
                                   [](const Violation& a, const Violation& b) { return a.excess < b.excess; });
        if (v.excess <= it->excess) return;
        *it = v;
    }
}

template <typename TruthPsd, typename BoundPsd>
DominanceReport dominance_scan(const std::vector<double>& omegas, const std::vector<double>& taus,
                               double tol, TruthPsd truth_psd, BoundPsd bound_psd) {
    DominanceReport rep{};
    rep.max_violation = -std::numeric_limits<double>::infinity();
    rep.freq_count = omegas.size();
    rep.tau_count = taus.size();
    rep.tolerance = tol;

    std::vector<double> bound_values(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) bound_values[i] = bound_psd(omegas[i]);

    for (double tau : taus) {
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            const double excess = truth_psd(omegas[i], tau) - bound_values[i];
            if (excess > rep.max_violation) {
                rep.max_violation = excess;
                rep.argmax_omega = omegas[i];
                rep.argmax_tau = tau;
            }
            keep_worst(rep.violations, {omegas[i], tau, excess});
        }
    }
    std::sort(rep.violations.begin(), rep.violations.end(),
              [](const Violation& a, const Violation& b) { return a.excess > b.excess; });
    return rep;
}

}  // namespace

ConstraintCheck check_continuous_constraints(const BoundModel& bound, const TauInterval& interval,
                                             double tol) {
    ConstraintCheck c{};
    c.residual_low_freq = bound.k * bound.tau_hat - interval.tau_max();
    c.residual_high_freq = bound.k / bound.tau_hat - 1.0 / interval.tau_min();
    // residuals are compared relative to the quantity they constrain
    c.low_freq_pass = c.residual_low_freq >= -tol * interval.tau_max();
    c.high_freq_pass = c.residual_high_freq >= -tol / interval.tau_min();
    return c;
}

DominanceReport psd_dominance_continuous(const BoundModel& bound, const TauInterval& interval,
                                         double sigma2, const FrequencyGrid& freq_grid,
                                         std::size_t tau_count, double tol) {
    const GmpSpec bound_spec = bound_process(bound, sigma2);
    return dominance_scan(
        freq_grid.values(), interval.log_grid(tau_count), tol,
        [sigma2](double w, double tau) { return psd_continuous(w, GmpSpec(sigma2, tau)); },
        [&bound_spec](double w) { return psd_continuous(w, bound_spec); });
}

DominanceReport psd_dominance_discrete(const BoundModel& bound, const TauInterval& interval,
                                       double sigma2, const SamplingSpec& sampling,
                                       const FrequencyGrid& freq_grid, std::size_t tau_count,
                                       double tol) {
    const double nyq = sampling.nyquist();
    if (freq_grid.values().back() > nyq * (1.0 + 1e-12)) {
        throw InvalidInput("freq_grid", "discrete frequency grid exceeds pi/dt");
    }
    std::vector<double> omegas = freq_grid.values();
    if (omegas.front() != 0.0) omegas.insert(omegas.begin(), 0.0);
    if (omegas.back() < nyq) {
        omegas.push_back(nyq);
    } else {
        omegas.back() = nyq;
    }
    const GmpSpec bound_spec = bound_process(bound, sigma2);
    return dominance_scan(
        omegas, interval.log_grid(tau_count), tol,
        [sigma2, &sampling](double w, double tau) {
            return psd_discrete(w, GmpSpec(sigma2, tau), sampling);
        },
        [&bound_spec, &sampling](double w) { return psd_discrete(w, bound_spec, sampling); });
}

AcmScanReport acm_bound_scan(const BoundModel& bound, const TauInterval& interval, double sigma2,
                             long n_max, std::size_t tau_count, double tol) {
    if (!bound.dt) throw InvalidInput("dt", "bound model has no sampling interval");
    if (n_max < 0) throw InvalidInput("n_max", "n_max < 0");
    const double dt = *bound.dt;
    const double var = bound.k * sigma2;
    const double var0 = bound.initial_variance();

    // a_hat^j and 1 - a_hat^j for j in [0, 2 n_max]
    const std::size_t len = static_cast<std::size_t>(2 * n_max + 1);
    std::vector<double> ah_pow(len), ah_om(len);
    for (std::size_t j = 0; j < len; ++j) {
        const double x = static_cast<double>(j) * dt / bound.tau_hat;
        ah_pow[j] = std::exp(-x);
        ah_om[j] = one_minus_exp_neg(x);
    }

    AcmScanReport rep{};
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    rep.min_determinant = std::numeric_limits<double>::infinity();
    rep.worst_normalized = std::numeric_limits<double>::infinity();
    rep.tolerance = tol;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver;
    for (double tau : interval.log_grid(tau_count)) {
        std::vector<double> a_pow(static_cast<std::size_t>(n_max + 1));
        for (std::size_t j = 0; j < a_pow.size(); ++j) {
            a_pow[j] = std::exp(-static_cast<double>(j) * dt / tau);
        }
        for (long n = 0; n <= n_max; ++n) {
            const auto nn = static_cast<std::size_t>(2 * n);
            const double r_nn = ah_pow[nn] * var0 + var * ah_om[nn];
            for (long p = n; p <= n_max; ++p) {
                const auto pp = static_cast<std::size_t>(2 * p);
                const auto lag = static_cast<std::size_t>(p - n);
                const double r_pp = ah_pow[pp] * var0 + var * ah_om[pp];
                const double r_np = ah_pow[static_cast<std::size_t>(n + p)] * var0 +
                                    var * ah_om[nn] * ah_pow[lag];
                Eigen::Matrix2d d;
                d(0, 0) = r_nn - sigma2;
                d(1, 1) = r_pp - sigma2;
                d(0, 1) = d(1, 0) = r_np - a_pow[lag] * sigma2;

                solver.computeDirect(d, Eigen::EigenvaluesOnly);
                const double lmin = solver.eigenvalues()(0);
                const double lmax = solver.eigenvalues()(1);
                const double det = d(0, 0) * d(1, 1) - d(0, 1) * d(0, 1);
                double eig = lmin;
                if (lmax > 0.0) eig = std::min(eig, det / lmax);

                const double scale = std::max(r_nn + r_pp, std::numeric_limits<double>::min());
                const double normalized = eig / scale;
                ++rep.points;
                rep.min_determinant = std::min(rep.min_determinant, det);
                if (normalized < rep.worst_normalized) {
                    rep.worst_normalized = normalized;
                    rep.min_eigenvalue = eig;
                    rep.arg_n = n;
                    rep.arg_p = p;
                    rep.arg_tau = tau;
                }
            }
        }
    }
    return rep;
}

double acm_difference_min_eigenvalue(long n, long p, double tau, const BoundModel& bound, double sigma2) {
    if (!bound.dt) throw InvalidInput("dt", "bound model has no sampling interval");
    const Eigen::Matrix2d d =
        acm2(n, p, bound, sigma2) - truth_acm2(n, p, GmpSpec(sigma2, tau), SamplingSpec(*bound.dt));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver;
    solver.computeDirect(d, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

K0Requirement k0_required(long n, long p, double tau, const SamplingSpec& sampling,
                          const BoundModel& bound) {
    if (n < 0 || p < n) throw InvalidInput("n", "k0_required needs 0 <= n <= p");
    const double dt = sampling.dt();
    const double k = bound.k;
    const double m = static_cast<double>(p - n);
    const double a_n2 = std::exp(-2.0 * static_cast<double>(n) * dt / bound.tau_hat);   // ah^{2n}
    const double u = one_minus_exp_neg(2.0 * static_cast<double>(n) * dt / bound.tau_hat);
    const double c_hat = std::exp(-m * dt / bound.tau_hat);                             // ah^{p-n}

    // Diagonal entries of R_hat - R, each linear in s = sigma0^2 / sigma^2.
    double required = (1.0 - k * u) / a_n2;
    const double a_p2 = a_n2 * c_hat * c_hat;
    const double om_p2 = one_minus_exp_neg(2.0 * static_cast<double>(p) * dt / bound.tau_hat);
    required = std::max(required, (1.0 - k * om_p2) / a_p2);
    if (p == n) return {required, true};

    // The quadratic term of the determinant cancels, leaving
    //   det = ah^{2n} (W - G) s - ...  with
    //   W = k (1 - c_hat^2),  G = (1 - c_hat)^2 + 2 c_hat (1 - c_true).
    const double w = k * one_minus_exp_neg(2.0 * m * dt / bound.tau_hat);
    const double om_chat = one_minus_exp_neg(m * dt / bound.tau_hat);
    const double g = om_chat * om_chat + 2.0 * c_hat * one_minus_exp_neg(m * dt / tau);
    const double slope = w - g;
    if (!(slope > 0.0)) return {required, false};
    const double om_c2 = one_minus_exp_neg(2.0 * m * dt / tau);
    const double det_bound = (w - om_c2) / (a_n2 * slope) - k * u / a_n2;
    return {std::max(required, det_bound), true};
}

K0ScanResult k0_binding_point_scan(const TauInterval& interval, const SamplingSpec& sampling,
                                   const BoundModel& bound, long n_max, long p_max,
                                   std::size_t tau_count) {
    if (n_max < 0) throw InvalidInput("n_max", "n_max < 0");
    if (p_max < 1) throw InvalidInput("p_max", "p_max < 1");
    K0ScanResult res{};
    res.global_max = -std::numeric_limits<double>::infinity();
    const auto taus = interval.log_grid(tau_count);

    if (interval.degenerate()) {
        res.global_max = 1.0;
        res.arg_n = 0;
        res.arg_p = 1;
        res.arg_tau = interval.tau_min();
        for (double tau : taus) {
            res.curves.push_back({tau, std::vector<double>(static_cast<std::size_t>(p_max), 1.0)});
        }
        res.points = taus.size() * static_cast<std::size_t>(p_max);
        return res;
    }

    for (double tau : taus) {
        K0Curve curve{tau, {}};
        curve.k0_by_p.reserve(static_cast<std::size_t>(p_max));
        for (long n = 0; n <= n_max; ++n) {
            for (long p = std::max(n, 1L); p <= p_max; ++p) {
                const K0Requirement req = k0_required(n, p, tau, sampling, bound);
                ++res.points;
                if (n == 0) curve.k0_by_p.push_back(req.value);
                if (!req.determinant_ok) {
                    ++res.flagged;
                    if (res.warnings.size() < 20) {
                        std::ostringstream os;
                        os << "non-positive determinant slope at n=" << n << " p=" << p
                           << " tau=" << fmt_human(tau) << " (excluded)";
                        res.warnings.push_back(os.str());
                    }
                    continue;
                }
                if (req.value > res.global_max) {
                    res.global_max = req.value;
                    res.arg_n = n;
                    res.arg_p = p;
                    res.arg_tau = tau;
                }
            }
        }
        res.curves.push_back(std::move(curve));
    }
    return res;
}

std::string to_text(const DominanceReport& r) {
    std::ostringstream os;
    os << "result: " << (r.pass() ? "PASS" : "FAIL") << '\n'
       << "max_violation: " << fmt_machine(r.max_violation) << '\n'
       << "argmax_omega: " << fmt_machine(r.argmax_omega) << '\n'
       << "argmax_tau: " << fmt_machine(r.argmax_tau) << '\n'
       << "freq_count: " << r.freq_count << '\n'
       << "tau_count: " << r.tau_count << '\n'
       << "tolerance: " << fmt_machine(r.tolerance) << '\n';
    if (!r.violations.empty()) {
        os << "violations:\n" << "omega,tau,excess\n";
        for (const auto& v : r.violations) {
            os << fmt_machine(v.omega) << ',' << fmt_machine(v.tau) << ',' << fmt_machine(v.excess)
               << '\n';
        }
    }
    return os.str();
}

std::string to_text(const AcmScanReport& r) {
    std::ostringstream os;
    os << "result: " << (r.pass() ? "PASS" : "FAIL") << '\n'
       << "min_eigenvalue: " << fmt_machine(r.min_eigenvalue) << '\n'
       << "min_determinant: " << fmt_machine(r.min_determinant) << '\n'
       << "worst_normalized: " << fmt_machine(r.worst_normalized) << '\n'
       << "arg_n: " << r.arg_n << '\n'
       << "arg_p: " << r.arg_p << '\n'
       << "arg_tau: " << fmt_machine(r.arg_tau) << '\n'
       << "points: " << r.points << '\n'
       << "tolerance: " << fmt_machine(r.tolerance) << '\n';
    return os.str();
}

std::string to_text(const ConstraintCheck& c) {
    std::ostringstream os;
    os << "result: " << (c.pass() ? "PASS" : "FAIL") << '\n'
       << "constraint_low_freq: " << (c.low_freq_pass ? "PASS" : "FAIL") << '\n'
       << "residual_low_freq: " << fmt_machine(c.residual_low_freq) << '\n'
       << "constraint_high_freq: " << (c.high_freq_pass ? "PASS" : "FAIL") << '\n'
       << "residual_high_freq: " << fmt_machine(c.residual_high_freq) << '\n';
    return os.str();
}

}  // namespace gmpbound
