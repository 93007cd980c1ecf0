#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmpbound {

/// Raised when an input violates a type invariant. Carries the offending
/// parameter name so front ends can produce a one-line diagnostic.
class InvalidInput : public std::invalid_argument {
public:
    InvalidInput(std::string parameter, const std::string& what)
        : std::invalid_argument(what), parameter_(std::move(parameter)) {}

    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

/// First-order Gauss-Markov process: stationary variance and correlation time.
class GmpSpec {
public:
    GmpSpec(double sigma2, double tau);

    double sigma2() const noexcept { return sigma2_; }
    double tau() const noexcept { return tau_; }
    double beta() const noexcept { return 1.0 / tau_; }

private:
    double sigma2_;
    double tau_;
};

/// Closed interval of admissible correlation time constants.
class TauInterval {
public:
    TauInterval(double tau_min, double tau_max);

    double tau_min() const noexcept { return tau_min_; }
    double tau_max() const noexcept { return tau_max_; }
    bool degenerate() const noexcept { return tau_min_ == tau_max_; }

    /// `count` log-spaced values from tau_min to tau_max inclusive.
    std::vector<double> log_grid(std::size_t count) const;

private:
    double tau_min_;
    double tau_max_;
};

/// Variance known only to lie in [min, max]. Bounds use the maximum.
class VarianceInterval {
public:
    VarianceInterval(double sigma2_min, double sigma2_max);

    double sigma2_min() const noexcept { return min_; }
    double sigma2_max() const noexcept { return max_; }

private:
    double min_;
    double max_;
};

class SamplingSpec {
public:
    explicit SamplingSpec(double dt);

    double dt() const noexcept { return dt_; }
    double nyquist() const noexcept;

private:
    double dt_;
};

enum class BoundMode { ContinuousStationary, DiscreteStationary, NonStationary };

std::string to_string(BoundMode mode);

/// Overbounding GMP model. `variance()` is the inflated stationary variance
/// k * sigma2; `initial_variance()` is the variance of the first sample.
struct BoundModel {
    double tau_hat = 1.0;
    double k = 1.0;
    std::optional<double> k0;
    BoundMode mode = BoundMode::ContinuousStationary;
    std::optional<double> dt;
    double sigma2 = 1.0;

    double variance() const noexcept { return k * sigma2; }
    double initial_variance() const noexcept { return k0.value_or(k) * sigma2; }
};

/// Strictly increasing, non-negative angular frequencies (rad/s).
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> values);

    static FrequencyGrid log_spaced(double omega_lo, double omega_hi, std::size_t count);
    static FrequencyGrid linear(double omega_lo, double omega_hi, std::size_t count);

    /// Default continuous grid: [1e-3 / tau_max, 1e3 / tau_min], log spaced.
    static FrequencyGrid continuous_default(const TauInterval& interval,
                                            std::size_t count = 1000);
    /// Default discrete grid: [0, pi/dt], linear, both endpoints exact.
    static FrequencyGrid discrete_default(const SamplingSpec& sampling,
                                          std::size_t count = 1000);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<double> values_;
};

struct DiscreteGmpParams {
    double alpha;
    double q_d;
};

}  // namespace gmpbound
