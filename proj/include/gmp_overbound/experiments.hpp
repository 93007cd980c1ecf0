#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gmp_overbound/kalman.hpp"
#include "gmp_overbound/types.hpp"

namespace gmpbound {

/// CSV file with a fixed header; every row must match the header width.
class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, std::vector<std::string> header);

    void row(const std::vector<std::string>& cells);
    void close();
    const std::filesystem::path& path() const noexcept { return path_; }
    std::size_t rows() const noexcept { return rows_; }

private:
    std::filesystem::path path_;
    std::size_t width_;
    std::size_t rows_ = 0;
    std::ofstream out_;
};

/// Seedable Gaussian source. Each (seed, stream) pair gives an independent,
/// platform-stable sequence: mt19937_64 seeded through std::seed_seq, 53-bit
/// uniforms and the Box-Muller transform.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    double uniform();  // in (0, 1)
    double gaussian();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// All parameters of the reproducible experiments. Loaded from a flat INI file
/// ([interval], [sampling], [psd], [k0], [kf], [mc], [output]).
struct ExperimentConfig {
    std::string id = "default";
    // [interval]
    double tau_min = 10.0;
    double tau_max = 100.0;
    double sigma2 = 1.0;
    // [sampling]
    double dt = 1.0;
    // [psd]
    double psd_disc_tau_min = 1.0;
    double psd_disc_tau_max = 10.0;
    double psd_disc_dt = 2.0;
    std::size_t freq_count = 400;
    std::size_t psd_tau_count = 10;
    double psd_f_min_hz = 1e-4;
    double psd_f_max_hz = 1.0;
    // [k0]
    double k0_dt = 0.1;
    long k0_p_max = 100;
    std::size_t k0_tau_count = 10;
    double k0_dt_min = 0.01;
    double k0_dt_max = 10.0;
    std::size_t k0_dt_count = 40;
    std::vector<std::pair<double, double>> k0_intervals{{1, 10}, {1, 100}, {10, 100}, {10, 1000}, {100, 1000}};
    // [kf]
    double tau_true = 50.0;
    double sigma_nu2 = 1.0;
    double prior_p = 100.0;
    double prior_v = 1.0;
    long steps = 1000;
    // [mc]
    std::uint64_t seed = 20210501;
    long realizations = 20000;
    std::vector<long> mc_check_steps{10, 100, 500, 1000};
    std::vector<long> mc_lags{0, 1, 2, 5, 10};
    std::vector<long> mc_origins{0, 1};
    double mc_sigma0_2 = 2.0;
    std::string mc_design = "stationary_continuous";
    // [output]
    std::filesystem::path output_dir = ".";

    TauInterval interval() const { return {tau_min, tau_max}; }
    SamplingSpec sampling() const { return SamplingSpec(dt); }
    TruthSpec truth() const { return {tau_true, sigma2, sigma_nu2}; }
    DemoPriors priors() const { return {prior_p, prior_v}; }

    /// Checks every field against its type invariant; throws InvalidInput.
    void validate() const;
    /// Flat key = value text, used in manifests.
    std::string to_ini() const;

    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig parse(const std::string& ini_text);
};

/// Writes `<dir>/manifest.json` with the config, seed, library version and outputs.
std::filesystem::path write_manifest(const ExperimentConfig& config,
                                     const std::vector<std::filesystem::path>& outputs);

/// psd_continuous.csv and psd_discrete.csv: frequency_hz,model,tau_s,psd.
std::vector<std::filesystem::path> exp_psd_curves(const ExperimentConfig& config);

/// k0_vs_p.csv (p,tau_s,k0_required) and k0_vs_dt.csv (dt_s,interval,k0_min).
std::vector<std::filesystem::path> exp_k0_sweeps(const ExperimentConfig& config);

/// kf_demo.csv: step,time_s,model,predicted_sigma_pos,true_sigma_pos,diff.
std::vector<std::filesystem::path> exp_kf_demo(const ExperimentConfig& config,
                                               const std::vector<DesignSpec>& extra = {});

struct GmpRealization {
    std::vector<double> samples;  // a_0 .. a_steps
    double sigma2;
    double tau;
    double sigma0_2;
    double dt;
};

/// a_n = alpha a_{n-1} + sqrt(sigma^2 (1 - alpha^2)) w_n with a_0 ~ N(0, sigma0_2).
/// Realization i draws from RandomStream(seed, i).
std::vector<GmpRealization> simulate_gmp(const GmpSpec& spec, double sigma0_2, const SamplingSpec& sampling,
                                         long steps, std::uint64_t seed, long count);

/// Ensemble estimate of a second moment with its standard error.
struct MomentCheck {
    long n;  // time index (or step)
    long p;
    double analytic;
    double ensemble;
    double standard_error;
    bool pass(double bands = 4.0) const noexcept;
};

/// Sample mean of a_n * a_p across realizations.
MomentCheck ensemble_autocov(const std::vector<GmpRealization>& runs, long n, long p, double analytic);

/// Position-error variance across `count` simulated runs of a filter that uses
/// the given gains, at each of `check_steps`. `analytic` is filled from
/// true_error_covariance.
std::vector<MomentCheck> kf_error_ensemble(const LinearModel& design, const GainSchedule& gains,
                                           const LinearModel& truth, const std::vector<long>& check_steps,
                                           long count, std::uint64_t seed, Eigen::Index state = kPositionState);

struct McReport {
    std::vector<MomentCheck> autocov;
    std::vector<MomentCheck> kf;
    double bands = 4.0;
    bool pass() const noexcept;
};

/// (a) ensemble GMP autocovariance vs. the closed form on config.mc_lags,
/// (b) ensemble KF position-error variance vs. the analytic true covariance.
McReport monte_carlo_validate(const ExperimentConfig& config);

std::string to_text(const McReport& report);

/// mc_autocov.csv and mc_kf.csv: n,p,analytic,ensemble,standard_error,pass.
std::vector<std::filesystem::path> write_mc_report(const McReport& report, const ExperimentConfig& config);

}  // namespace gmpbound
