#pragma once

#include <Eigen/Core>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmp_overbound/types.hpp"

namespace gmpbound {

/// Raised when the Riccati recursion meets a non-positive innovation variance.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Discrete-time linear model with an observation row that may grow linearly
/// with the step index: h(step) = h_const + step * h_rate.
struct LinearModel {
    Eigen::MatrixXd phi;
    Eigen::RowVectorXd h_const;
    Eigen::RowVectorXd h_rate;
    Eigen::MatrixXd q;
    double r = 1.0;
    Eigen::MatrixXd p0;

    Eigen::Index state_size() const { return phi.rows(); }
    Eigen::RowVectorXd h(long step) const { return h_const + static_cast<double>(step) * h_rate; }

    /// Throws InvalidInput on inconsistent dimensions, asymmetric or
    /// indefinite q / p0, or r <= 0. Truth models may allow r == 0.
    void validate(bool allow_noiseless = false) const;
};

struct GainSchedule {
    std::vector<Eigen::VectorXd> gains;  // gains[i] is used at step i + 1
    long horizon() const noexcept { return static_cast<long>(gains.size()); }
};

/// Updated covariances for steps 1..N (entries[i] belongs to step i + 1).
struct CovarianceTrace {
    std::vector<Eigen::MatrixXd> entries;
    std::vector<std::string> labels;
    double max_asymmetry = 0.0;  // relative, measured before each re-symmetrization

    double variance(std::size_t index, Eigen::Index state) const { return entries.at(index)(state, state); }
    std::vector<double> sigma(Eigen::Index state) const;
};

/// Truth process of the example: a GMP measurement error with known time constant.
struct TruthSpec {
    double tau_true = 50.0;
    double sigma_xi2 = 1.0;
    double sigma_nu2 = 1.0;
};

/// Priors on the initial position and velocity. The truth initial error
/// covariance uses the same values.
struct DemoPriors {
    double prior_p = 100.0;
    double prior_v = 1.0;
};

inline const std::vector<std::string> kExampleLabels{"p0", "v", "xi"};
inline constexpr Eigen::Index kPositionState = 0;

/// Three-state example system: initial position, constant velocity and a GMP
/// measurement error xi. z_step = p0 + step * dt * v + xi + nu.
LinearModel build_example_lds(double model_tau, double model_sigma_xi2, double model_sigma0_2,
                              double sigma_nu2, const SamplingSpec& sampling,
                              const DemoPriors& priors = {});

struct RiccatiResult {
    CovarianceTrace trace;
    GainSchedule gains;
};

/// Predict/update covariance recursion (Joseph form) for `steps` steps.
RiccatiResult riccati_run(const LinearModel& model, long steps);

/// Covariance of the actual estimation error x_hat - x when the filter runs the
/// design model's gains while the data come from `truth`. The joint covariance of
/// (x, x_hat - x) is propagated with x_hat_0 = 0 and x_0 ~ N(0, truth.p0).
CovarianceTrace true_error_covariance(const LinearModel& design, const GainSchedule& gains,
                                      const LinearModel& truth, long steps);

CovarianceTrace true_error_covariance(const LinearModel& design, const GainSchedule& gains,
                                      const TruthSpec& truth, const SamplingSpec& sampling,
                                      long steps, const DemoPriors& priors = {});

/// Externally supplied comparison model for the demo suite.
struct DesignSpec {
    std::string name;
    double tau;
    double sigma_xi2;  // stationary variance used by the model
    double sigma0_2;   // initial variance of xi
};

struct DemoTrace {
    std::vector<double> predicted_sigma_pos;
    std::vector<double> true_sigma_pos;
};

/// Runs stationary_continuous, stationary_discrete, nonstationary and oracle
/// designs (plus any `extra` models) against the truth.
std::map<std::string, DemoTrace> run_demo_suite(const TauInterval& interval,
                                                const SamplingSpec& sampling,
                                                const TruthSpec& truth, long steps,
                                                const DemoPriors& priors = {},
                                                const std::vector<DesignSpec>& extra = {});

/// The design models used by run_demo_suite, in emission order.
std::vector<DesignSpec> demo_design_models(const TauInterval& interval, const SamplingSpec& sampling,
                                           const TruthSpec& truth);

}  // namespace gmpbound
