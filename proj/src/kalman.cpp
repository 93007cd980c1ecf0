#include "gmp_overbound/kalman.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gmp_overbound/models.hpp"

namespace gmpbound {

namespace {

bool is_psd(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(m.diagonal().cwiseAbs().sum(), 1e-300);
    return es.eigenvalues().minCoeff() >= -1e-10 * scale;
}

bool is_symmetric(const Eigen::MatrixXd& m) {
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// Re-symmetrize in place; returns the relative asymmetry removed.
double symmetrize(Eigen::MatrixXd& m) {
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    m = 0.5 * (m + m.transpose()).eval();
    return scale > 0.0 ? asym / scale : 0.0;
}

}  // namespace

void LinearModel::validate(bool allow_noiseless) const {
    const Eigen::Index n = phi.rows();
    if (n == 0 || phi.cols() != n) throw InvalidInput("phi", "transition matrix must be square and non-empty");
    if (h_const.size() != n || h_rate.size() != n) throw InvalidInput("h", "observation row size mismatch");
    if (q.rows() != n || q.cols() != n) throw InvalidInput("q", "process noise size mismatch");
    if (p0.rows() != n || p0.cols() != n) throw InvalidInput("p0", "initial covariance size mismatch");
    if (allow_noiseless ? !(r >= 0.0) : !(r > 0.0)) {
        throw InvalidInput("r", "measurement variance must be > 0");
    }
    if (!is_symmetric(q) || !is_psd(q)) throw InvalidInput("q", "process noise must be symmetric PSD");
    if (!is_symmetric(p0) || !is_psd(p0)) throw InvalidInput("p0", "initial covariance must be symmetric PSD");
}

std::vector<double> CovarianceTrace::sigma(Eigen::Index state) const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& m : entries) out.push_back(std::sqrt(std::max(m(state, state), 0.0)));
    return out;
}

LinearModel build_example_lds(double model_tau, double model_sigma_xi2, double model_sigma0_2,
                              double sigma_nu2, const SamplingSpec& sampling, const DemoPriors& priors) {
    if (!(model_sigma0_2 >= 0.0)) throw InvalidInput("sigma0_2", "sigma0_2 < 0");
    if (!(sigma_nu2 > 0.0)) throw InvalidInput("sigma_nu2", "sigma_nu2 must be > 0");
    if (!(priors.prior_p >= 0.0)) throw InvalidInput("prior_p", "prior_p < 0");
    if (!(priors.prior_v >= 0.0)) throw InvalidInput("prior_v", "prior_v < 0");
    const DiscreteGmpParams xi = gmp_discrete_params(GmpSpec(model_sigma_xi2, model_tau), sampling);

    LinearModel m;
    m.phi = Eigen::Vector3d(1.0, 1.0, xi.alpha).asDiagonal();
    m.q = Eigen::Vector3d(0.0, 0.0, xi.q_d).asDiagonal();
    m.h_const = Eigen::RowVector3d(1.0, 0.0, 1.0);
    m.h_rate = Eigen::RowVector3d(0.0, sampling.dt(), 0.0);
    m.r = sigma_nu2;
    m.p0 = Eigen::Vector3d(priors.prior_p, priors.prior_v, model_sigma0_2).asDiagonal();
    return m;
}

RiccatiResult riccati_run(const LinearModel& model, long steps) {
    if (steps < 1) throw InvalidInput("steps", "steps must be >= 1");
    model.validate();
    const Eigen::Index n = model.state_size();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    RiccatiResult out;
    out.trace.entries.reserve(static_cast<std::size_t>(steps));
    out.gains.gains.reserve(static_cast<std::size_t>(steps));

    Eigen::MatrixXd p = model.p0;
    for (long step = 1; step <= steps; ++step) {
        Eigen::MatrixXd pred = model.phi * p * model.phi.transpose() + model.q;
        const Eigen::RowVectorXd h = model.h(step);
        const double s = (h * pred * h.transpose())(0, 0) + model.r;
        if (!(s > 0.0)) throw NumericalFailure("innovation variance <= 0 at step " + std::to_string(step));
        const Eigen::VectorXd gain = pred * h.transpose() / s;
        const Eigen::MatrixXd ikh = eye - gain * h;
        p = ikh * pred * ikh.transpose() + model.r * gain * gain.transpose();
        out.trace.max_asymmetry = std::max(out.trace.max_asymmetry, symmetrize(p));
        out.trace.entries.push_back(p);
        out.gains.gains.push_back(gain);
    }
    return out;
}

CovarianceTrace true_error_covariance(const LinearModel& design, const GainSchedule& gains,
                                      const LinearModel& truth, long steps) {
    if (steps < 1) throw InvalidInput("steps", "steps must be >= 1");
    if (gains.horizon() < steps) throw InvalidInput("gains", "gain schedule horizon < steps");
    design.validate();
    truth.validate(true);
    const Eigen::Index n = design.state_size();
    if (truth.state_size() != n) throw InvalidInput("truth", "truth and design state sizes differ");

    // Joint state (x, e) with e = x_hat - x. Propagating e directly avoids the
    // cancellation of Var(x) + Var(x_hat) - 2 Cov when the priors are large.
    //   e_n = (I - K h_d) phi_d e + [(I - K h_d) phi_d + K h_t phi_t - phi_t] x + (K h_t - I) w + K nu
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd sigma(2 * n, 2 * n);
    sigma << truth.p0, -truth.p0, -truth.p0, truth.p0;  // x_hat_0 = 0, so e_0 = -x_0

    CovarianceTrace out;
    out.entries.reserve(static_cast<std::size_t>(steps));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::MatrixXd g(2 * n, n);
    Eigen::MatrixXd kv = Eigen::MatrixXd::Zero(2 * n, 1);
    for (long step = 1; step <= steps; ++step) {
        const Eigen::VectorXd& gain = gains.gains[static_cast<std::size_t>(step - 1)];
        if (gain.size() != n) throw InvalidInput("gains", "gain dimension mismatch");
        const Eigen::MatrixXd filter_map = (eye - gain * design.h(step)) * design.phi;
        const Eigen::MatrixXd kh = gain * truth.h(step);

        a.topLeftCorner(n, n) = truth.phi;
        a.bottomLeftCorner(n, n) = filter_map + kh * truth.phi - truth.phi;
        a.bottomRightCorner(n, n) = filter_map;
        g.topRows(n) = eye;
        g.bottomRows(n) = kh - eye;
        kv.bottomRows(n) = gain;

        sigma = a * sigma * a.transpose() + g * truth.q * g.transpose() + truth.r * kv * kv.transpose();
        out.max_asymmetry = std::max(out.max_asymmetry, symmetrize(sigma));
        out.entries.push_back(sigma.bottomRightCorner(n, n));
    }
    return out;
}

CovarianceTrace true_error_covariance(const LinearModel& design, const GainSchedule& gains,
                                      const TruthSpec& truth, const SamplingSpec& sampling,
                                      long steps, const DemoPriors& priors) {
    const LinearModel truth_model = build_example_lds(truth.tau_true, truth.sigma_xi2, truth.sigma_xi2,
                                                      truth.sigma_nu2, sampling, priors);
    CovarianceTrace out = true_error_covariance(design, gains, truth_model, steps);
    out.labels = kExampleLabels;
    return out;
}

std::vector<DesignSpec> demo_design_models(const TauInterval& interval, const SamplingSpec& sampling,
                                           const TruthSpec& truth) {
    const double s2 = truth.sigma_xi2;
    const BoundModel cont = continuous_bound(interval, s2);
    const BoundModel disc = discrete_bound(interval, sampling, s2);
    const BoundModel nonst = nonstationary_bound(interval, sampling, s2);
    return {
        {"stationary_continuous", cont.tau_hat, cont.variance(), cont.initial_variance()},
        {"stationary_discrete", disc.tau_hat, disc.variance(), disc.initial_variance()},
        {"nonstationary", nonst.tau_hat, nonst.variance(), nonst.initial_variance()},
        {"oracle", truth.tau_true, s2, s2},
    };
}

std::map<std::string, DemoTrace> run_demo_suite(const TauInterval& interval, const SamplingSpec& sampling,
                                                const TruthSpec& truth, long steps,
                                                const DemoPriors& priors,
                                                const std::vector<DesignSpec>& extra) {
    std::vector<DesignSpec> models = demo_design_models(interval, sampling, truth);
    models.insert(models.end(), extra.begin(), extra.end());

    std::map<std::string, DemoTrace> out;
    for (const auto& spec : models) {
        if (out.count(spec.name)) throw InvalidInput("model", "duplicate design model name: " + spec.name);
        const LinearModel design =
            build_example_lds(spec.tau, spec.sigma_xi2, spec.sigma0_2, truth.sigma_nu2, sampling, priors);
        const RiccatiResult run = riccati_run(design, steps);
        const CovarianceTrace actual = true_error_covariance(design, run.gains, truth, sampling, steps, priors);
        out[spec.name] = {run.trace.sigma(kPositionState), actual.sigma(kPositionState)};
    }
    return out;
}

}  // namespace gmpbound
