#include "gmp_overbound/types.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gmpbound {

namespace {

void require_finite(const std::string& name, double value) {
    if (!std::isfinite(value)) {
        throw InvalidInput(name, name + " must be finite");
    }
}

}  // namespace

GmpSpec::GmpSpec(double sigma2, double tau) : sigma2_(sigma2), tau_(tau) {
    require_finite("sigma2", sigma2);
    require_finite("tau", tau);
    if (sigma2 < 0.0) throw InvalidInput("sigma2", "sigma2 < 0");
    if (tau <= 0.0) throw InvalidInput("tau", "tau <= 0");
}

TauInterval::TauInterval(double tau_min, double tau_max) : tau_min_(tau_min), tau_max_(tau_max) {
    require_finite("tau_min", tau_min);
    require_finite("tau_max", tau_max);
    if (tau_min <= 0.0) throw InvalidInput("tau_min", "tau_min <= 0");
    if (tau_max < tau_min) throw InvalidInput("tau_max", "tau_max < tau_min");
}

std::vector<double> TauInterval::log_grid(std::size_t count) const {
    if (count == 0) throw InvalidInput("tau_count", "tau_count must be >= 1");
    if (count == 1 || degenerate()) return std::vector<double>(count, tau_min_);
    std::vector<double> taus(count);
    const double lo = std::log(tau_min_);
    const double hi = std::log(tau_max_);
    for (std::size_t i = 0; i < count; ++i) {
        taus[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    // endpoints exactly, they are the binding values
    taus.front() = tau_min_;
    taus.back() = tau_max_;
    return taus;
}

VarianceInterval::VarianceInterval(double sigma2_min, double sigma2_max)
    : min_(sigma2_min), max_(sigma2_max) {
    require_finite("sigma2_min", sigma2_min);
    require_finite("sigma2_max", sigma2_max);
    if (sigma2_min < 0.0) throw InvalidInput("sigma2_min", "sigma2_min < 0");
    if (sigma2_max < sigma2_min) throw InvalidInput("sigma2_max", "sigma2_max < sigma2_min");
}

SamplingSpec::SamplingSpec(double dt) : dt_(dt) {
    require_finite("dt", dt);
    if (dt <= 0.0) throw InvalidInput("dt", "dt <= 0");
}

double SamplingSpec::nyquist() const noexcept { return std::numbers::pi / dt_; }

std::string to_string(BoundMode mode) {
    switch (mode) {
        case BoundMode::ContinuousStationary: return "continuous-stationary";
        case BoundMode::DiscreteStationary: return "discrete-stationary";
        case BoundMode::NonStationary: return "non-stationary";
    }
    return "unknown";
}

FrequencyGrid::FrequencyGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InvalidInput("freq_grid", "frequency grid is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            std::ostringstream os;
            os << "frequency grid value " << values_[i] << " is not a finite non-negative number";
            throw InvalidInput("freq_grid", os.str());
        }
        if (i > 0 && values_[i] <= values_[i - 1]) {
            throw InvalidInput("freq_grid", "frequency grid must be strictly increasing");
        }
    }
}

FrequencyGrid FrequencyGrid::log_spaced(double omega_lo, double omega_hi, std::size_t count) {
    if (!(omega_lo > 0.0) || !(omega_hi >= omega_lo)) {
        throw InvalidInput("omega", "log grid needs 0 < omega_lo <= omega_hi");
    }
    if (count == 0) throw InvalidInput("freq_count", "freq_count must be >= 1");
    if (count == 1) return FrequencyGrid({omega_lo});
    std::vector<double> v(count);
    const double lo = std::log(omega_lo);
    const double hi = std::log(omega_hi);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    v.front() = omega_lo;
    v.back() = omega_hi;
    return FrequencyGrid(std::move(v));
}

FrequencyGrid FrequencyGrid::linear(double omega_lo, double omega_hi, std::size_t count) {
    if (!(omega_lo >= 0.0) || !(omega_hi >= omega_lo)) {
        throw InvalidInput("omega", "linear grid needs 0 <= omega_lo <= omega_hi");
    }
    if (count == 0) throw InvalidInput("freq_count", "freq_count must be >= 1");
    if (count == 1) return FrequencyGrid({omega_lo});
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    v.front() = omega_lo;
    v.back() = omega_hi;
    return FrequencyGrid(std::move(v));
}

FrequencyGrid FrequencyGrid::continuous_default(const TauInterval& interval, std::size_t count) {
    return log_spaced(1e-3 / interval.tau_max(), 1e3 / interval.tau_min(), count);
}

FrequencyGrid FrequencyGrid::discrete_default(const SamplingSpec& sampling, std::size_t count) {
    return linear(0.0, sampling.nyquist(), std::max<std::size_t>(count, 2));
}

}  // namespace gmpbound
