#include "gmp_overbound/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gmp_overbound/format.hpp"
#include "gmp_overbound/models.hpp"
#include "gmp_overbound/verify.hpp"
#include "json.hpp"

namespace gmpbound {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// CSV

CsvWriter::CsvWriter(fs::path path, std::vector<std::string> header)
    : path_(std::move(path)), width_(header.size()) {
    if (header.empty()) throw std::invalid_argument("csv header is empty");
    if (path_.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path_.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + path_.parent_path().string() + ": " + ec.message());
    }
    out_.open(path_, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!out_) throw std::runtime_error("cannot open " + path_.string() + " for writing");
    row(header);
    rows_ = 0;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw std::logic_error(path_.string() + ": row has " + std::to_string(cells.size()) +
                               " columns, header has " + std::to_string(width_));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw std::runtime_error("write failed on " + path_.string());
    ++rows_;
}

void CsvWriter::close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("close failed on " + path_.string());
}

// ---------------------------------------------------------------------------
// RNG

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double RandomStream::uniform() {
    // (k + 0.5) / 2^53 lies strictly inside (0, 1)
    const std::uint64_t k = engine_() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RandomStream::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

// ---------------------------------------------------------------------------
// Config

namespace {

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidInput(key, key + ": cannot parse '" + text + "' as a number");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size() || !std::isfinite(v)) {
        throw InvalidInput(key, key + ": cannot parse '" + text + "' as a number");
    }
    return v;
}

long parse_long(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
        throw InvalidInput(key, key + ": '" + text + "' is not an integer");
    }
    return static_cast<long>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) parts.push_back(item.substr(b, e - b + 1));
    }
    return parts;
}

std::string join_longs(const std::vector<long>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string interval_label(double lo, double hi) { return fmt_human(lo) + "-" + fmt_human(hi); }

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& config_setters() {
    auto dbl = [](double ExperimentConfig::*m) -> Setter {
        return [m](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*m = parse_double(k, v); };
    };
    auto lng = [](long ExperimentConfig::*m) -> Setter {
        return [m](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*m = parse_long(k, v); };
    };
    auto cnt = [](std::size_t ExperimentConfig::*m) -> Setter {
        return [m](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const long n = parse_long(k, v);
            if (n < 1) throw InvalidInput(k, k + " must be >= 1");
            c.*m = static_cast<std::size_t>(n);
        };
    };
    auto lst = [](std::vector<long> ExperimentConfig::*m) -> Setter {
        return [m](ExperimentConfig& c, const std::string& k, const std::string& v) {
            std::vector<long> out;
            for (const auto& part : split(v, ',')) out.push_back(parse_long(k, part));
            c.*m = std::move(out);
        };
    };
    static const std::map<std::string, Setter> setters{
        {"experiment.id", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.id = v; }},
        {"interval.tau_min", dbl(&ExperimentConfig::tau_min)},
        {"interval.tau_max", dbl(&ExperimentConfig::tau_max)},
        {"interval.sigma2", dbl(&ExperimentConfig::sigma2)},
        {"sampling.dt", dbl(&ExperimentConfig::dt)},
        {"psd.disc_tau_min", dbl(&ExperimentConfig::psd_disc_tau_min)},
        {"psd.disc_tau_max", dbl(&ExperimentConfig::psd_disc_tau_max)},
        {"psd.disc_dt", dbl(&ExperimentConfig::psd_disc_dt)},
        {"psd.freq_count", cnt(&ExperimentConfig::freq_count)},
        {"psd.tau_count", cnt(&ExperimentConfig::psd_tau_count)},
        {"psd.f_min_hz", dbl(&ExperimentConfig::psd_f_min_hz)},
        {"psd.f_max_hz", dbl(&ExperimentConfig::psd_f_max_hz)},
        {"k0.dt", dbl(&ExperimentConfig::k0_dt)},
        {"k0.p_max", lng(&ExperimentConfig::k0_p_max)},
        {"k0.tau_count", cnt(&ExperimentConfig::k0_tau_count)},
        {"k0.dt_min", dbl(&ExperimentConfig::k0_dt_min)},
        {"k0.dt_max", dbl(&ExperimentConfig::k0_dt_max)},
        {"k0.dt_count", cnt(&ExperimentConfig::k0_dt_count)},
        {"k0.intervals",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             std::vector<std::pair<double, double>> out;
             for (const auto& part : split(v, ',')) {
                 const auto ends = split(part, ':');
                 if (ends.size() != 2) throw InvalidInput(k, k + ": expected tau_min:tau_max, got '" + part + "'");
                 out.emplace_back(parse_double(k, ends[0]), parse_double(k, ends[1]));
             }
             c.k0_intervals = std::move(out);
         }},
        {"kf.tau_true", dbl(&ExperimentConfig::tau_true)},
        {"kf.sigma_nu2", dbl(&ExperimentConfig::sigma_nu2)},
        {"kf.prior_p", dbl(&ExperimentConfig::prior_p)},
        {"kf.prior_v", dbl(&ExperimentConfig::prior_v)},
        {"kf.steps", lng(&ExperimentConfig::steps)},
        {"mc.seed",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             try {
                 std::size_t used = 0;
                 if (v.empty() || !std::isdigit(static_cast<unsigned char>(v[0]))) throw std::invalid_argument(v);
                 c.seed = std::stoull(v, &used);
                 if (used != v.size()) throw std::invalid_argument(v);
             } catch (const std::exception&) {
                 throw InvalidInput(k, k + ": cannot parse '" + v + "' as an unsigned integer");
             }
         }},
        {"mc.realizations", lng(&ExperimentConfig::realizations)},
        {"mc.check_steps", lst(&ExperimentConfig::mc_check_steps)},
        {"mc.lags", lst(&ExperimentConfig::mc_lags)},
        {"mc.origins", lst(&ExperimentConfig::mc_origins)},
        {"mc.sigma0_2", dbl(&ExperimentConfig::mc_sigma0_2)},
        {"mc.design", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mc_design = v; }},
        {"output.dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
    };
    return setters;
}

}  // namespace

void ExperimentConfig::validate() const {
    (void)interval();
    (void)sampling();
    if (!(sigma2 >= 0.0)) throw InvalidInput("interval.sigma2", "sigma2 < 0");
    (void)TauInterval(psd_disc_tau_min, psd_disc_tau_max);
    (void)SamplingSpec(psd_disc_dt);
    if (!(psd_f_min_hz > 0.0) || !(psd_f_max_hz > psd_f_min_hz)) {
        throw InvalidInput("psd.f_min_hz", "psd frequency range must satisfy 0 < f_min < f_max");
    }
    (void)SamplingSpec(k0_dt);
    if (k0_p_max < 1) throw InvalidInput("k0.p_max", "k0.p_max must be >= 1");
    if (!(k0_dt_min > 0.0) || !(k0_dt_max >= k0_dt_min)) {
        throw InvalidInput("k0.dt_min", "k0 dt range must satisfy 0 < dt_min <= dt_max");
    }
    for (const auto& [lo, hi] : k0_intervals) (void)TauInterval(lo, hi);
    (void)GmpSpec(sigma2, tau_true);
    if (!(sigma_nu2 > 0.0)) throw InvalidInput("kf.sigma_nu2", "sigma_nu2 must be > 0");
    if (!(prior_p >= 0.0)) throw InvalidInput("kf.prior_p", "prior_p < 0");
    if (!(prior_v >= 0.0)) throw InvalidInput("kf.prior_v", "prior_v < 0");
    if (steps < 1) throw InvalidInput("kf.steps", "steps must be >= 1");
    if (realizations < 1) throw InvalidInput("mc.realizations", "realizations must be >= 1");
    for (long s : mc_check_steps) {
        if (s < 1) throw InvalidInput("mc.check_steps", "check steps must be >= 1");
    }
    for (long l : mc_lags) {
        if (l < 0) throw InvalidInput("mc.lags", "lags must be >= 0");
    }
    for (long o : mc_origins) {
        if (o < 0) throw InvalidInput("mc.origins", "origins must be >= 0");
    }
    if (!(mc_sigma0_2 >= 0.0)) throw InvalidInput("mc.sigma0_2", "sigma0_2 < 0");
}

std::string ExperimentConfig::to_ini() const {
    std::ostringstream os;
    os << "[experiment]\nid = " << id << "\n\n"
       << "[interval]\ntau_min = " << fmt_machine(tau_min) << "\ntau_max = " << fmt_machine(tau_max)
       << "\nsigma2 = " << fmt_machine(sigma2) << "\n\n"
       << "[sampling]\ndt = " << fmt_machine(dt) << "\n\n"
       << "[psd]\ndisc_tau_min = " << fmt_machine(psd_disc_tau_min) << "\ndisc_tau_max = "
       << fmt_machine(psd_disc_tau_max) << "\ndisc_dt = " << fmt_machine(psd_disc_dt)
       << "\nfreq_count = " << freq_count << "\ntau_count = " << psd_tau_count
       << "\nf_min_hz = " << fmt_machine(psd_f_min_hz) << "\nf_max_hz = " << fmt_machine(psd_f_max_hz) << "\n\n"
       << "[k0]\ndt = " << fmt_machine(k0_dt) << "\np_max = " << k0_p_max << "\ntau_count = " << k0_tau_count
       << "\ndt_min = " << fmt_machine(k0_dt_min) << "\ndt_max = " << fmt_machine(k0_dt_max)
       << "\ndt_count = " << k0_dt_count << "\nintervals = ";
    for (std::size_t i = 0; i < k0_intervals.size(); ++i) {
        os << (i ? "," : "") << fmt_machine(k0_intervals[i].first) << ':' << fmt_machine(k0_intervals[i].second);
    }
    os << "\n\n[kf]\ntau_true = " << fmt_machine(tau_true) << "\nsigma_nu2 = " << fmt_machine(sigma_nu2)
       << "\nprior_p = " << fmt_machine(prior_p) << "\nprior_v = " << fmt_machine(prior_v)
       << "\nsteps = " << steps << "\n\n"
       << "[mc]\nseed = " << seed << "\nrealizations = " << realizations
       << "\ncheck_steps = " << join_longs(mc_check_steps) << "\nlags = " << join_longs(mc_lags)
       << "\norigins = " << join_longs(mc_origins) << "\nsigma0_2 = " << fmt_machine(mc_sigma0_2)
       << "\ndesign = " << mc_design << "\n\n"
       << "[output]\ndir = " << output_dir.string() << "\n";
    return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& ini_text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(ini_text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidInput("config", "config: " + e.message() + " at line " + std::to_string(e.line()));
    }
    ExperimentConfig cfg;
    const auto& setters = config_setters();
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw InvalidInput(section, "config: key '" + section + "' must be inside a [section]");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            const auto it = setters.find(full);
            if (it == setters.end()) throw InvalidInput(full, "config: unknown key '" + full + "'");
            it->second(cfg, full, value.data());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("config", "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

fs::path write_manifest(const ExperimentConfig& config, const std::vector<fs::path>& outputs) {
    nlohmann::ordered_json j;
    j["library"] = "gmp_overbound";
    j["library_version"] = kVersion;
    j["experiment"] = config.id;
    j["seed"] = config.seed;
    j["config"] = config.to_ini();
    std::vector<std::string> files;
    for (const auto& p : outputs) files.push_back(p.filename().string());
    j["outputs"] = files;
    fs::create_directories(config.output_dir);
    const fs::path path = config.output_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed on " + path.string());
    return path;
}

// ---------------------------------------------------------------------------
// Figure datasets

namespace {

struct Curve {
    std::string model;
    double tau;
    std::vector<double> psd;
};

// Every bound curve must dominate every truth curve on the shared grid.
void assert_dominates(const std::vector<Curve>& truths, const std::vector<Curve>& bounds, const fs::path& where) {
    for (const auto& b : bounds) {
        for (const auto& t : truths) {
            for (std::size_t i = 0; i < b.psd.size(); ++i) {
                if (t.psd[i] - b.psd[i] > kDominanceTolerance * std::max(1.0, b.psd[i])) {
                    throw std::logic_error(where.string() + ": curve " + b.model +
                                           " does not dominate truth tau=" + fmt_human(t.tau));
                }
            }
        }
    }
}

void emit_curves(CsvWriter& csv, const std::vector<double>& freqs_hz, const std::vector<Curve>& curves) {
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
            csv.row({fmt_machine(freqs_hz[i]), c.model, fmt_machine(c.tau), fmt_machine(c.psd[i])});
        }
    }
}

}  // namespace

std::vector<fs::path> exp_psd_curves(const ExperimentConfig& config) {
    config.validate();
    const std::vector<std::string> header{"frequency_hz", "model", "tau_s", "psd"};
    std::vector<fs::path> written;

    {
        const TauInterval interval = config.interval();
        std::vector<double> freqs{0.0};
        const auto grid = FrequencyGrid::log_spaced(config.psd_f_min_hz, config.psd_f_max_hz, config.freq_count);
        freqs.insert(freqs.end(), grid.values().begin(), grid.values().end());

        std::vector<Curve> truths;
        for (double tau : interval.log_grid(config.psd_tau_count)) {
            Curve c{"truth", tau, {}};
            for (double f : freqs) c.psd.push_back(psd_continuous(2.0 * std::numbers::pi * f, GmpSpec(config.sigma2, tau)));
            truths.push_back(std::move(c));
        }
        const BoundModel bound = continuous_bound(interval, config.sigma2);
        Curve b{"bound_continuous", bound.tau_hat, {}};
        const GmpSpec bspec = bound_process(bound, config.sigma2);
        for (double f : freqs) b.psd.push_back(psd_continuous(2.0 * std::numbers::pi * f, bspec));

        CsvWriter csv(config.output_dir / "psd_continuous.csv", header);
        assert_dominates(truths, {b}, csv.path());
        emit_curves(csv, freqs, truths);
        emit_curves(csv, freqs, {b});
        csv.close();
        written.push_back(csv.path());
    }
    {
        const TauInterval interval(config.psd_disc_tau_min, config.psd_disc_tau_max);
        const SamplingSpec sampling(config.psd_disc_dt);
        const auto grid = FrequencyGrid::discrete_default(sampling, config.freq_count);
        std::vector<double> freqs;
        for (double w : grid.values()) freqs.push_back(w / (2.0 * std::numbers::pi));

        std::vector<Curve> truths;
        for (double tau : interval.log_grid(config.psd_tau_count)) {
            Curve c{"truth", tau, {}};
            for (double w : grid.values()) c.psd.push_back(psd_discrete(w, GmpSpec(config.sigma2, tau), sampling));
            truths.push_back(std::move(c));
        }
        std::vector<Curve> bounds;
        const BoundModel disc = discrete_bound(interval, sampling, config.sigma2);
        const BoundModel cont = continuous_bound(interval, config.sigma2);
        for (const auto& [name, bound] : {std::pair{"bound_discrete", disc}, std::pair{"bound_continuous_params", cont}}) {
            Curve c{name, bound.tau_hat, {}};
            const GmpSpec bspec = bound_process(bound, config.sigma2);
            for (double w : grid.values()) c.psd.push_back(psd_discrete(w, bspec, sampling));
            bounds.push_back(std::move(c));
        }

        CsvWriter csv(config.output_dir / "psd_discrete.csv", header);
        assert_dominates(truths, bounds, csv.path());
        emit_curves(csv, freqs, truths);
        emit_curves(csv, freqs, bounds);
        csv.close();
        written.push_back(csv.path());
    }
    return written;
}

std::vector<fs::path> exp_k0_sweeps(const ExperimentConfig& config) {
    config.validate();
    std::vector<fs::path> written;
    {
        const TauInterval interval = config.interval();
        const SamplingSpec sampling(config.k0_dt);
        const BoundModel bound = continuous_bound(interval, config.sigma2);
        // n = 0 only: the curves are the figure data, the full scan lives in verify
        const K0ScanResult scan =
            k0_binding_point_scan(interval, sampling, bound, 0, config.k0_p_max, config.k0_tau_count);
        CsvWriter csv(config.output_dir / "k0_vs_p.csv", {"p", "tau_s", "k0_required"});
        for (const auto& curve : scan.curves) {
            for (std::size_t i = 0; i < curve.k0_by_p.size(); ++i) {
                csv.row({std::to_string(i + 1), fmt_machine(curve.tau), fmt_machine(curve.k0_by_p[i])});
            }
        }
        csv.close();
        written.push_back(csv.path());
    }
    {
        CsvWriter csv(config.output_dir / "k0_vs_dt.csv", {"dt_s", "interval", "k0_min"});
        const auto dts = TauInterval(config.k0_dt_min, config.k0_dt_max).log_grid(config.k0_dt_count);
        for (const auto& [lo, hi] : config.k0_intervals) {
            const TauInterval interval(lo, hi);
            const BoundModel bound = continuous_bound(interval, config.sigma2);
            for (double dt : dts) {
                if (dt > lo) continue;  // beyond tau_min the process is better modeled as white
                csv.row({fmt_machine(dt), interval_label(lo, hi),
                         fmt_machine(nonstationary_k0(interval, SamplingSpec(dt), bound))});
            }
        }
        csv.close();
        written.push_back(csv.path());
    }
    return written;
}

std::vector<fs::path> exp_kf_demo(const ExperimentConfig& config, const std::vector<DesignSpec>& extra) {
    config.validate();
    const auto traces = run_demo_suite(config.interval(), config.sampling(), config.truth(), config.steps,
                                       config.priors(), extra);
    std::vector<std::string> order;
    for (const auto& m : demo_design_models(config.interval(), config.sampling(), config.truth())) {
        order.push_back(m.name);
    }
    for (const auto& m : extra) order.push_back(m.name);

    CsvWriter csv(config.output_dir / "kf_demo.csv",
                  {"step", "time_s", "model", "predicted_sigma_pos", "true_sigma_pos", "diff"});
    for (const auto& name : order) {
        const DemoTrace& t = traces.at(name);
        for (std::size_t i = 0; i < t.predicted_sigma_pos.size(); ++i) {
            const long step = static_cast<long>(i) + 1;
            csv.row({std::to_string(step), fmt_machine(static_cast<double>(step) * config.dt), name,
                     fmt_machine(t.predicted_sigma_pos[i]), fmt_machine(t.true_sigma_pos[i]),
                     fmt_machine(t.predicted_sigma_pos[i] - t.true_sigma_pos[i])});
        }
    }
    csv.close();
    return {csv.path()};
}

// ---------------------------------------------------------------------------
// Simulation and Monte Carlo

std::vector<GmpRealization> simulate_gmp(const GmpSpec& spec, double sigma0_2, const SamplingSpec& sampling,
                                         long steps, std::uint64_t seed, long count) {
    if (count < 1) throw InvalidInput("count", "count must be >= 1");
    if (steps < 0) throw InvalidInput("steps", "steps must be >= 0");
    if (!(sigma0_2 >= 0.0)) throw InvalidInput("sigma0_2", "sigma0_2 < 0");
    const DiscreteGmpParams params = gmp_discrete_params(spec, sampling);
    const double drive = std::sqrt(params.q_d);
    const double init = std::sqrt(sigma0_2);

    std::vector<GmpRealization> runs;
    runs.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        GmpRealization r{{}, spec.sigma2(), spec.tau(), sigma0_2, sampling.dt()};
        r.samples.resize(static_cast<std::size_t>(steps + 1));
        r.samples[0] = sigma0_2 == 0.0 ? 0.0 : init * rng.gaussian();
        for (long n = 1; n <= steps; ++n) {
            const auto idx = static_cast<std::size_t>(n);
            r.samples[idx] = params.alpha * r.samples[idx - 1] + drive * rng.gaussian();
        }
        runs.push_back(std::move(r));
    }
    return runs;
}

bool MomentCheck::pass(double bands) const noexcept {
    return std::fabs(ensemble - analytic) <= bands * standard_error;
}

MomentCheck ensemble_autocov(const std::vector<GmpRealization>& runs, long n, long p, double analytic) {
    if (runs.empty()) throw InvalidInput("runs", "no realizations");
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& r : runs) {
        const double prod = r.samples.at(static_cast<std::size_t>(n)) * r.samples.at(static_cast<std::size_t>(p));
        sum += prod;
        sum_sq += prod * prod;
    }
    const double count = static_cast<double>(runs.size());
    const double mean = sum / count;
    const double var = runs.size() > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0)) : 0.0;
    return {n, p, analytic, mean, std::sqrt(var / count)};
}

namespace {

// Symmetric square root of a PSD matrix.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::vector<MomentCheck> kf_error_ensemble(const LinearModel& design, const GainSchedule& gains,
                                           const LinearModel& truth, const std::vector<long>& check_steps,
                                           long count, std::uint64_t seed, Eigen::Index state) {
    if (count < 2) throw InvalidInput("count", "count must be >= 2");
    if (check_steps.empty()) throw InvalidInput("check_steps", "no check steps");
    const long steps = *std::max_element(check_steps.begin(), check_steps.end());
    if (*std::min_element(check_steps.begin(), check_steps.end()) < 1) {
        throw InvalidInput("check_steps", "check steps must be >= 1");
    }
    const CovarianceTrace analytic = true_error_covariance(design, gains, truth, steps);
    const Eigen::Index n = design.state_size();

    std::vector<Eigen::MatrixXd> filter_maps;
    std::vector<Eigen::RowVectorXd> h_truth;
    for (long s = 1; s <= steps; ++s) {
        filter_maps.push_back((Eigen::MatrixXd::Identity(n, n) - gains.gains[static_cast<std::size_t>(s - 1)] * design.h(s)) *
                              design.phi);
        h_truth.push_back(truth.h(s));
    }
    const Eigen::MatrixXd p0_sqrt = psd_sqrt(truth.p0);
    const Eigen::MatrixXd q_sqrt = psd_sqrt(truth.q);
    const double r_sqrt = std::sqrt(truth.r);

    std::vector<char> is_check(static_cast<std::size_t>(steps + 1), 0);
    for (long s : check_steps) is_check[static_cast<std::size_t>(s)] = 1;
    std::map<long, std::pair<double, double>> moments;  // sum e^2, sum e^4

    Eigen::VectorXd x(n), xhat(n), g(n);
    for (long i = 0; i < count; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < n; ++j) g(j) = rng.gaussian();
        x = p0_sqrt * g;
        xhat.setZero();
        for (long s = 1; s <= steps; ++s) {
            for (Eigen::Index j = 0; j < n; ++j) g(j) = rng.gaussian();
            x = truth.phi * x + q_sqrt * g;
            const double z = h_truth[static_cast<std::size_t>(s - 1)].dot(x) + r_sqrt * rng.gaussian();
            xhat = filter_maps[static_cast<std::size_t>(s - 1)] * xhat +
                   gains.gains[static_cast<std::size_t>(s - 1)] * z;
            if (is_check[static_cast<std::size_t>(s)]) {
                const double e = xhat(state) - x(state);
                auto& m = moments[s];
                m.first += e * e;
                m.second += e * e * e * e;
            }
        }
    }

    std::vector<MomentCheck> out;
    const double c = static_cast<double>(count);
    for (long s : check_steps) {
        const auto& [s2, s4] = moments[s];
        const double mean = s2 / c;
        const double var = std::max(0.0, (s4 - c * mean * mean) / (c - 1.0));
        out.push_back({s, s, analytic.variance(static_cast<std::size_t>(s - 1), state), mean, std::sqrt(var / c)});
    }
    return out;
}

bool McReport::pass() const noexcept {
    const auto ok = [this](const MomentCheck& m) { return m.pass(bands); };
    return std::all_of(autocov.begin(), autocov.end(), ok) && std::all_of(kf.begin(), kf.end(), ok);
}

McReport monte_carlo_validate(const ExperimentConfig& config) {
    config.validate();
    McReport rep;

    // (a) autocovariance of the truth GMP started from sigma0^2
    const GmpSpec gmp(config.sigma2, config.tau_true);
    const SamplingSpec sampling = config.sampling();
    long last = 0;
    for (long o : config.mc_origins) {
        for (long l : config.mc_lags) last = std::max(last, o + l);
    }
    const auto runs = simulate_gmp(gmp, config.mc_sigma0_2, sampling, last, config.seed, config.realizations);
    const double alpha = gmp_discrete_params(gmp, sampling).alpha;
    for (long o : config.mc_origins) {
        for (long l : config.mc_lags) {
            rep.autocov.push_back(ensemble_autocov(
                runs, o, o + l, autocov_nonstationary(o, o + l, config.mc_sigma0_2, config.sigma2, alpha)));
        }
    }

    // (b) filter error variance; the KF stream is offset so it does not reuse (a)'s draws
    const auto models = demo_design_models(config.interval(), sampling, config.truth());
    const auto it = std::find_if(models.begin(), models.end(),
                                 [&](const DesignSpec& d) { return d.name == config.mc_design; });
    if (it == models.end()) throw InvalidInput("mc.design", "unknown design model '" + config.mc_design + "'");
    const LinearModel design =
        build_example_lds(it->tau, it->sigma_xi2, it->sigma0_2, config.sigma_nu2, sampling, config.priors());
    const LinearModel truth =
        build_example_lds(config.tau_true, config.sigma2, config.sigma2, config.sigma_nu2, sampling, config.priors());
    const long steps = *std::max_element(config.mc_check_steps.begin(), config.mc_check_steps.end());
    const RiccatiResult run = riccati_run(design, steps);
    rep.kf = kf_error_ensemble(design, run.gains, truth, config.mc_check_steps, config.realizations,
                               config.seed ^ 0x5bd1e995ULL);
    return rep;
}

std::string to_text(const McReport& report) {
    std::ostringstream os;
    os << "result: " << (report.pass() ? "PASS" : "FAIL") << '\n' << "bands: " << fmt_machine(report.bands) << '\n';
    const auto table = [&os, &report](const char* title, const std::vector<MomentCheck>& rows) {
        os << title << ":\n" << "n,p,analytic,ensemble,standard_error,pass\n";
        for (const auto& m : rows) {
            os << m.n << ',' << m.p << ',' << fmt_machine(m.analytic) << ',' << fmt_machine(m.ensemble) << ','
               << fmt_machine(m.standard_error) << ',' << (m.pass(report.bands) ? "PASS" : "FAIL") << '\n';
        }
    };
    table("autocov", report.autocov);
    table("kf_position_variance", report.kf);
    return os.str();
}

std::vector<fs::path> write_mc_report(const McReport& report, const ExperimentConfig& config) {
    std::vector<fs::path> written;
    for (const auto& [name, rows] :
         {std::pair{"mc_autocov.csv", &report.autocov}, std::pair{"mc_kf.csv", &report.kf}}) {
        CsvWriter csv(config.output_dir / name, {"n", "p", "analytic", "ensemble", "standard_error", "pass"});
        for (const auto& m : *rows) {
            csv.row({std::to_string(m.n), std::to_string(m.p), fmt_machine(m.analytic), fmt_machine(m.ensemble),
                     fmt_machine(m.standard_error), m.pass(report.bands) ? "1" : "0"});
        }
        csv.close();
        written.push_back(csv.path());
    }
    return written;
}

}  // namespace gmpbound
