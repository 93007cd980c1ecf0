#include "gmp_overbound/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gmp_overbound/experiments.hpp"
#include "gmp_overbound/format.hpp"
#include "gmp_overbound/models.hpp"
#include "gmp_overbound/verify.hpp"

namespace gmpbound::cli {

namespace fs = std::filesystem;

namespace {

/// Prints `key: value` (6 digits) or, with --machine, `key=value` (15 digits).
class Printer {
public:
    Printer(std::ostream& out, const bool& machine) : out_(out), machine_(machine) {}

    void value(const std::string& key, double v) {
        if (machine_) {
            out_ << key << '=' << fmt_machine(v) << '\n';
        } else {
            out_ << key << ": " << fmt_human(v) << '\n';
        }
    }
    void text(const std::string& key, const std::string& v) {
        out_ << key << (machine_ ? "=" : ": ") << v << '\n';
    }

private:
    std::ostream& out_;
    const bool& machine_;
};

struct IntervalArgs {
    double tau_min = 0.0;
    double tau_max = 0.0;
};

void add_interval(CLI::App* cmd, IntervalArgs& a) {
    cmd->add_option("--tau-min", a.tau_min, "Smallest correlation time constant [s]")->required();
    cmd->add_option("--tau-max", a.tau_max, "Largest correlation time constant [s]")->required();
}

fs::path resolve_out(const std::string& flag_value, const fs::path& fallback) {
    if (const char* env = std::getenv("GMP_OVERBOUND_OUT"); env && *env) return env;
    if (!flag_value.empty()) return flag_value;
    return fallback;
}

ExperimentConfig load_config(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : ExperimentConfig::load(path);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gauss-Markov overbound models for linear estimators", "gmp-overbound"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    bool machine = false;
    app.add_flag("--machine", machine, "Print key=value records with 15 significant digits");
    Printer print(out, machine);
    int exit_code = kExitOk;

    // bound ------------------------------------------------------------------
    auto* bound = app.add_subcommand("bound", "Compute bound model parameters");
    bound->require_subcommand(1);

    IntervalArgs bc_iv;
    double bc_sigma2 = 1.0;
    std::optional<double> bc_sigma2_max;
    auto* bc = bound->add_subcommand("continuous", "Tightest stationary continuous-time bound");
    add_interval(bc, bc_iv);
    bc->add_option("--sigma2", bc_sigma2, "GMP variance")->capture_default_str();
    bc->add_option("--sigma2-max", bc_sigma2_max, "Upper end of an uncertain variance; replaces --sigma2");
    bc->callback([&] {
        const TauInterval iv(bc_iv.tau_min, bc_iv.tau_max);
        const BoundModel b = bc_sigma2_max ? continuous_bound(iv, VarianceInterval(bc_sigma2, *bc_sigma2_max))
                                           : continuous_bound(iv, bc_sigma2);
        print.value("tau_hat", b.tau_hat);
        print.value("k", b.k);
        print.value("sigma_hat2", b.variance());
    });

    IntervalArgs bd_iv;
    double bd_dt = 0.0, bd_sigma2 = 1.0;
    auto* bd = bound->add_subcommand("discrete", "Tightest stationary bound of the sampled process");
    add_interval(bd, bd_iv);
    bd->add_option("--dt", bd_dt, "Sampling interval [s]")->required();
    bd->add_option("--sigma2", bd_sigma2, "GMP variance")->capture_default_str();
    bd->callback([&] {
        const BoundModel b = discrete_bound(TauInterval(bd_iv.tau_min, bd_iv.tau_max), SamplingSpec(bd_dt), bd_sigma2);
        print.value("tau_hat_d", b.tau_hat);
        print.value("k_d", b.k);
        print.value("sigma_hat2", b.variance());
    });

    IntervalArgs bk_iv;
    double bk_dt = 0.0;
    auto* bk = bound->add_subcommand("k0", "Initial variance inflation of the non-stationary bound");
    add_interval(bk, bk_iv);
    bk->add_option("--dt", bk_dt, "Sampling interval [s]")->required();
    bk->callback([&] {
        const BoundModel b = nonstationary_bound(TauInterval(bk_iv.tau_min, bk_iv.tau_max), SamplingSpec(bk_dt));
        print.value("tau_hat", b.tau_hat);
        print.value("k", b.k);
        print.value("k0", *b.k0);
    });

    // psd --------------------------------------------------------------------
    std::string psd_mode = "cont";
    double psd_tau = 0.0, psd_sigma2 = 1.0;
    std::optional<double> psd_dt;
    std::vector<double> psd_omegas;
    auto* psd = app.add_subcommand("psd", "Evaluate a GMP power spectral density");
    psd->add_option("--mode", psd_mode, "cont or disc")->check(CLI::IsMember({"cont", "disc"}))->capture_default_str();
    psd->add_option("--tau", psd_tau, "Correlation time constant [s]")->required();
    psd->add_option("--sigma2", psd_sigma2, "GMP variance")->capture_default_str();
    psd->add_option("--dt", psd_dt, "Sampling interval [s] (disc)");
    psd->add_option("--omega", psd_omegas, "Angular frequencies [rad/s]")->required();
    psd->callback([&] {
        const GmpSpec spec(psd_sigma2, psd_tau);
        if (psd_mode == "disc" && !psd_dt) throw InvalidInput("dt", "--dt is required with --mode disc");
        out << "omega,psd\n";
        for (double w : psd_omegas) {
            const double s = psd_mode == "cont" ? psd_continuous(w, spec) : psd_discrete(w, spec, SamplingSpec(*psd_dt));
            out << (machine ? fmt_machine(w) : fmt_human(w)) << ',' << (machine ? fmt_machine(s) : fmt_human(s)) << '\n';
        }
    });

    // verify -----------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "Numerically verify bounding conditions");
    verify->require_subcommand(1);

    IntervalArgs vd_iv;
    std::string vd_mode = "cont";
    double vd_sigma2 = 1.0;
    std::optional<double> vd_dt, vd_k, vd_tau_hat;
    std::size_t vd_freq = 1000, vd_taus = 50;
    auto* vd = verify->add_subcommand("dominance", "PSD dominance over a frequency x tau grid");
    add_interval(vd, vd_iv);
    vd->add_option("--mode", vd_mode, "cont or disc")->check(CLI::IsMember({"cont", "disc"}))->capture_default_str();
    vd->add_option("--sigma2", vd_sigma2, "GMP variance")->capture_default_str();
    vd->add_option("--dt", vd_dt, "Sampling interval [s] (disc)");
    vd->add_option("--k", vd_k, "Bound inflation factor (default: optimal)");
    vd->add_option("--tau-hat", vd_tau_hat, "Bound time constant [s] (default: optimal)");
    vd->add_option("--freq-count", vd_freq, "Number of frequencies")->capture_default_str();
    vd->add_option("--tau-count", vd_taus, "Number of truth time constants")->capture_default_str();
    vd->callback([&] {
        const TauInterval iv(vd_iv.tau_min, vd_iv.tau_max);
        if (vd_mode == "disc" && !vd_dt) throw InvalidInput("dt", "--dt is required with --mode disc");
        BoundModel b = vd_mode == "cont" ? continuous_bound(iv, vd_sigma2)
                                         : discrete_bound(iv, SamplingSpec(*vd_dt), vd_sigma2);
        if (vd_k) {
            if (!(*vd_k > 0.0)) throw InvalidInput("k", "k must be > 0");
            b.k = *vd_k;
        }
        if (vd_tau_hat) b.tau_hat = GmpSpec(1.0, *vd_tau_hat).tau();
        const DominanceReport rep =
            vd_mode == "cont"
                ? psd_dominance_continuous(b, iv, vd_sigma2, FrequencyGrid::continuous_default(iv, vd_freq), vd_taus)
                : psd_dominance_discrete(b, iv, vd_sigma2, SamplingSpec(*vd_dt),
                                         FrequencyGrid::discrete_default(SamplingSpec(*vd_dt), vd_freq), vd_taus);
        out << "tau_hat: " << fmt_machine(b.tau_hat) << "\nk: " << fmt_machine(b.k) << '\n' << to_text(rep);
        if (!rep.pass()) exit_code = kExitVerifyFail;
    });

    IntervalArgs va_iv;
    double va_dt = 0.0, va_sigma2 = 1.0, va_scale = 1.0;
    std::optional<double> va_k0;
    bool va_stationary = false;
    long va_n_max = 500;
    std::size_t va_taus = 25;
    auto* va = verify->add_subcommand("acm", "Autocovariance-matrix ordering scan");
    add_interval(va, va_iv);
    va->add_option("--dt", va_dt, "Sampling interval [s]")->required();
    va->add_option("--sigma2", va_sigma2, "GMP variance")->capture_default_str();
    va->add_option("--k0", va_k0, "Initial inflation (default: closed form)");
    va->add_option("--k0-scale", va_scale, "Multiplier applied to k0")->capture_default_str();
    va->add_flag("--stationary", va_stationary, "Use the stationary initialization sigma0^2 = k sigma^2");
    va->add_option("--n-max", va_n_max, "Largest time index")->capture_default_str();
    va->add_option("--tau-count", va_taus, "Number of truth time constants")->capture_default_str();
    va->callback([&] {
        const TauInterval iv(va_iv.tau_min, va_iv.tau_max);
        const SamplingSpec s(va_dt);
        BoundModel b = nonstationary_bound(iv, s, va_sigma2);
        if (va_stationary) {
            b.k0.reset();
        } else {
            if (va_k0) b.k0 = *va_k0;
            b.k0 = *b.k0 * va_scale;
        }
        const AcmScanReport rep = acm_bound_scan(b, iv, va_sigma2, va_n_max, va_taus);
        out << "k: " << fmt_machine(b.k) << "\nk0: " << fmt_machine(b.k0.value_or(b.k)) << '\n' << to_text(rep);
        if (!rep.pass()) exit_code = kExitVerifyFail;
    });

    IntervalArgs vk_iv;
    double vk_dt = 0.0;
    long vk_n_max = 50, vk_p_max = 500;
    std::size_t vk_taus = 25;
    auto* vk = verify->add_subcommand("k0", "Grid scan of the initial-inflation requirement");
    add_interval(vk, vk_iv);
    vk->add_option("--dt", vk_dt, "Sampling interval [s]")->required();
    vk->add_option("--n-max", vk_n_max, "Largest n")->capture_default_str();
    vk->add_option("--p-max", vk_p_max, "Largest p")->capture_default_str();
    vk->add_option("--tau-count", vk_taus, "Number of truth time constants")->capture_default_str();
    vk->callback([&] {
        const TauInterval iv(vk_iv.tau_min, vk_iv.tau_max);
        const SamplingSpec s(vk_dt);
        const BoundModel b = continuous_bound(iv, 1.0);
        const double closed = nonstationary_k0(iv, s, b);
        const K0ScanResult scan = k0_binding_point_scan(iv, s, b, vk_n_max, vk_p_max, vk_taus);
        const bool agree = std::fabs(scan.global_max - closed) <= 1e-10;
        print.text("result", agree ? "PASS" : "FAIL");
        print.value("k0_closed_form", closed);
        print.value("k0_scan_max", scan.global_max);
        print.text("arg_n", std::to_string(scan.arg_n));
        print.text("arg_p", std::to_string(scan.arg_p));
        print.value("arg_tau", scan.arg_tau);
        print.text("flagged", std::to_string(scan.flagged));
        for (const auto& w : scan.warnings) err << "warning: " << w << '\n';
        if (!agree) exit_code = kExitVerifyFail;
    });

    // demo -------------------------------------------------------------------
    auto* demo = app.add_subcommand("demo", "Reproduce experiment datasets as CSV");
    demo->require_subcommand(1);
    std::string demo_config, demo_out;
    const auto add_demo = [&](const std::string& name, const std::string& help,
                              std::function<std::vector<fs::path>(const ExperimentConfig&)> fn) {
        auto* cmd = demo->add_subcommand(name, help);
        cmd->add_option("--config", demo_config, "INI config file");
        cmd->add_option("--out", demo_out, "Output directory (GMP_OVERBOUND_OUT overrides)");
        cmd->callback([&, fn] {
            ExperimentConfig cfg = load_config(demo_config);
            cfg.output_dir = resolve_out(demo_out, cfg.output_dir);
            std::vector<fs::path> files = fn(cfg);
            files.push_back(write_manifest(cfg, files));
            for (const auto& f : files) print.text("wrote", f.string());
        });
    };
    add_demo("kf", "Kalman filter predicted vs. true position sigma",
             [](const ExperimentConfig& c) { return exp_kf_demo(c); });
    add_demo("psd", "PSD families with bound curves", exp_psd_curves);
    add_demo("k0", "k0 sweeps over p, tau and dt", exp_k0_sweeps);
    add_demo("all", "Every figure dataset", [](const ExperimentConfig& c) {
        std::vector<fs::path> all = exp_psd_curves(c);
        for (auto&& p : exp_k0_sweeps(c)) all.push_back(p);
        for (auto&& p : exp_kf_demo(c)) all.push_back(p);
        return all;
    });

    // simulate ---------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Simulate processes");
    simulate->require_subcommand(1);
    double sg_sigma2 = 1.0, sg_tau = 0.0, sg_dt = 1.0;
    std::optional<double> sg_sigma0_2;
    long sg_steps = 100, sg_count = 1;
    std::uint64_t sg_seed = 1;
    std::string sg_out;
    auto* sg = simulate->add_subcommand("gmp", "Sample GMP realizations to CSV (realization,n,a)");
    sg->add_option("--sigma2", sg_sigma2, "Stationary variance")->capture_default_str();
    sg->add_option("--tau", sg_tau, "Correlation time constant [s]")->required();
    sg->add_option("--dt", sg_dt, "Sampling interval [s]")->capture_default_str();
    sg->add_option("--sigma0-2", sg_sigma0_2, "Variance of a_0 (default: sigma2)");
    sg->add_option("--steps", sg_steps, "Samples after a_0")->capture_default_str();
    sg->add_option("--seed", sg_seed, "Random seed")->capture_default_str();
    sg->add_option("--count", sg_count, "Number of realizations")->capture_default_str();
    sg->add_option("--out", sg_out, "Output CSV file")->required();
    sg->callback([&] {
        const auto runs = simulate_gmp(GmpSpec(sg_sigma2, sg_tau), sg_sigma0_2.value_or(sg_sigma2), SamplingSpec(sg_dt),
                                       sg_steps, sg_seed, sg_count);
        fs::path path = sg_out;
        if (const char* env = std::getenv("GMP_OVERBOUND_OUT"); env && *env) path = fs::path(env) / path.filename();
        CsvWriter csv(path, {"realization", "n", "a"});
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (std::size_t n = 0; n < runs[i].samples.size(); ++n) {
                csv.row({std::to_string(i), std::to_string(n), fmt_machine(runs[i].samples[n])});
            }
        }
        csv.close();
        print.text("wrote", path.string());
    });

    // validate ---------------------------------------------------------------
    auto* validate = app.add_subcommand("validate", "Monte Carlo validation");
    validate->require_subcommand(1);
    std::string mc_config, mc_out;
    auto* mc = validate->add_subcommand("mc", "Ensemble checks of autocovariance and true error covariance");
    mc->add_option("--config", mc_config, "INI config file")->required();
    mc->add_option("--out", mc_out, "Write mc_autocov.csv and mc_kf.csv here");
    mc->callback([&] {
        ExperimentConfig cfg = load_config(mc_config);
        const McReport rep = monte_carlo_validate(cfg);
        out << to_text(rep);
        const char* env = std::getenv("GMP_OVERBOUND_OUT");
        if (!mc_out.empty() || (env && *env)) {
            cfg.output_dir = resolve_out(mc_out, cfg.output_dir);
            auto files = write_mc_report(rep, cfg);
            files.push_back(write_manifest(cfg, files));
        }
        if (!rep.pass()) exit_code = kExitVerifyFail;
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }
    return exit_code;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace gmpbound::cli
