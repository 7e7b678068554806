#include "spinecho/runner.hpp"

#include "spinecho/closedform.hpp"
#include "spinecho/error.hpp"
#include "spinecho/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <sstream>

namespace spinecho {

using nlohmann::json;

namespace {

constexpr std::pair<std::string_view, Experiment> kExperiments[] = {
    {"hahn", Experiment::Hahn},
    {"cpmg", Experiment::CPMG},
    {"apcp", Experiment::APCP},
    {"longitudinal", Experiment::Longitudinal},
    {"floquet", Experiment::Floquet},
    {"calibrate", Experiment::Calibrate},
    {"tables", Experiment::Tables}};

std::vector<Axis> parse_axes(std::string_view text) {
    std::vector<Axis> out;
    std::string token;
    std::istringstream in{std::string(text)};
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(parse_axis(token));
    }
    if (out.empty()) throw ConfigError("empty axis list");
    return out;
}

json axes_json(const std::vector<Axis>& axes) {
    json a = json::array();
    for (Axis x : axes) a.push_back(std::string(1, axis_label(x)));
    return a;
}

std::vector<Axis> axes_from_json(const json& j) {
    std::vector<Axis> out;
    for (const auto& a : j) out.push_back(parse_axis(a.get<std::string>()));
    return out;
}

std::string series_file(const ResponseSeries& s) {
    return std::string("series_") + axis_label(s.alpha) + ".csv";
}

class Progress {
public:
    Progress(bool quiet, std::string label) : quiet_(quiet), label_(std::move(label)) {}
    ProgressFn callback() {
        if (quiet_) return {};
        return [this](int done, int total) {
            const int pct = 100 * done / total;
            if (pct / 10 != last_ / 10 || done == total) {
                std::cerr << label_ << ": " << done << "/" << total << " realizations\n";
                last_ = pct;
            }
        };
    }

private:
    bool quiet_;
    std::string label_;
    int last_ = -10;
};

struct Writer {
    std::filesystem::path dir;
    std::vector<std::string> files;

    void put(const std::string& name, std::string_view content) {
        write_atomic(dir / name, content);
        files.push_back(name);
    }
};

json run_floquet(const RunConfig& config, const ExperimentConfig& exp, Writer& out,
                 std::vector<ResponseSeries>& series_out) {
    const auto& opt = config.floquet;
    const double tau = config.sequence.tau;
    const int n_real = exp.n_realizations;
    QuasienergyHistogram p_hist = make_histogram(opt.beta);
    std::vector<QuasienergyHistogram> sigma(opt.axes.size(), make_histogram(opt.beta));
    std::vector<Eigen::MatrixXd> responses(opt.axes.size(),
                                           Eigen::MatrixXd(n_real, opt.m_max + 1));
    json per_realization = json::array();
    for (int r = 0; r < n_real; ++r) {
        const auto index = static_cast<std::uint64_t>(r);
        const DisorderRealization real = make_realization(exp.ensemble, index);
        const SpinModel model = build_model(real, exp.variant);
        PulseModel pulse = exp.pulse;
        pulse.seed = realization_pulse_seed(exp.pulse.seed, index);
        const FloquetSpectrum spectrum = diagonalize(build_floquet(model, pulse, tau, exp.plan));
        p_hist.accumulate(histogram_P(spectrum, opt.beta));
        json info = spectrum.metadata;
        for (std::size_t a = 0; a < opt.axes.size(); ++a) {
            const MatrixElementMap map = matrix_elements(spectrum, opt.axes[a], opt.threshold);
            sigma[a].accumulate(weighted_sigma(spectrum, map, opt.beta));
            const auto m_series = reconstruct_series(spectrum, map, opt.m_max);
            for (int m = 0; m <= opt.m_max; ++m) responses[a](r, m) = m_series[static_cast<std::size_t>(m)];
            const std::string label(1, axis_label(opt.axes[a]));
            info["sum_rule_" + label] = map.total();
            info["diagonal_fraction_" + label] = map.diagonal_fraction();
            if (r == 0) out.put("map_" + label + ".csv", matrix_map_csv(spectrum, map));
        }
        if (r == 0) {
            out.put("quasienergies.csv", quasienergies_csv(spectrum));
            if (opt.dump_eigenvectors) {
                write_eigenvectors(out.dir / "eigenvectors.bin", spectrum);
                out.files.push_back("eigenvectors.bin");
            }
        }
        per_realization.push_back(std::move(info));
        if (!config.quiet) std::cerr << "floquet: " << (r + 1) << "/" << n_real << " realizations\n";
    }
    p_hist.scale(1.0 / n_real);
    out.put("histogram_P.csv", histogram_csv(p_hist));
    for (std::size_t a = 0; a < opt.axes.size(); ++a) {
        sigma[a].scale(1.0 / n_real);
        const std::string label(1, axis_label(opt.axes[a]));
        out.put("sigma_" + label + ".csv", histogram_csv(sigma[a]));

        ResponseSeries s;
        s.alpha = opt.axes[a];
        s.n_realizations = n_real;
        s.samples = responses[a];
        for (int m = 0; m <= opt.m_max; ++m) {
            const auto col = s.samples.col(m);
            const double mean = col.mean();
            const double se = n_real > 1 ? std::sqrt((col.array() - mean).square().sum() /
                                                     (n_real - 1) / n_real)
                                         : 0.0;
            s.times.push_back(2.0 * tau * m);
            s.mean.push_back(mean);
            s.std_error.push_back(se);
            s.echo_index.push_back(m);
        }
        out.put("response_" + label + ".csv", series_csv(s));
        series_out.push_back(std::move(s));
    }
    return {{"beta", opt.beta},
            {"threshold", opt.threshold},
            {"pair_count_per_realization", p_hist.total()},
            {"realizations", per_realization}};
}

}  // namespace

std::string experiment_name(Experiment e) {
    for (const auto& [name, v] : kExperiments) {
        if (v == e) return std::string(name);
    }
    return "?";
}

Experiment parse_experiment(std::string_view text) {
    for (const auto& [name, v] : kExperiments) {
        if (name == text) return v;
    }
    throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

std::vector<double> HahnGrid::times() const {
    if (!(t_max > 0.0) || points < 1) {
        throw ConfigError("Hahn grid needs t_max > 0 and at least one point");
    }
    std::vector<double> t;
    for (int k = 1; k <= points; ++k) t.push_back(t_max * k / points);
    return t;
}

void RunConfig::validate() const {
    const auto& e = experiment_config;
    e.ensemble.validate();
    if (e.n_realizations < 1) throw ConfigError("--samples must be >= 1");
    if (e.threads < 0) throw ConfigError("--threads must be >= 0");
    switch (experiment) {
        case Experiment::Hahn:
            (void)hahn.times();
            break;
        case Experiment::CPMG:
        case Experiment::APCP:
        case Experiment::Longitudinal:
            sequence.validate();
            if (channels.empty()) throw ConfigError("no channels requested");
            break;
        case Experiment::Floquet:
            if (!(sequence.tau > 0.0)) throw ConfigError("tau must be positive");
            if (!e.pulse.is_periodic()) {
                throw ConfigError("floquet needs identical pulses (uniform or per-spin epsilon, fixed axis)");
            }
            if (floquet.m_max < 0 || !(floquet.beta > 0.0)) throw ConfigError("invalid floquet options");
            break;
        case Experiment::Calibrate:
            if (e.ensemble.d.is_infinite()) {
                throw ConfigError("calibrate needs a finite dimension");
            }
            break;
        case Experiment::Tables:
            for (double f : tables.densities) {
                if (!(f > 0.0)) throw ConfigError("table densities must be positive");
            }
            break;
    }
}

json to_json(const RunConfig& c) {
    json j = to_json(c.experiment_config);
    j["experiment"] = experiment_name(c.experiment);
    j["sequence"] = to_json(c.sequence);
    j["channels"] = axes_json(c.channels);
    j["hahn"] = {{"t_max", c.hahn.t_max}, {"points", c.hahn.points}};
    j["floquet"] = {{"axes", axes_json(c.floquet.axes)},
                    {"threshold", c.floquet.threshold},
                    {"beta", c.floquet.beta},
                    {"m_max", c.floquet.m_max},
                    {"dump_eigenvectors", c.floquet.dump_eigenvectors}};
    j["tables"] = {{"densities", c.tables.densities}};
    j["output"] = c.output ? json(c.output->string()) : json(nullptr);
    return j;
}

RunConfig run_config_from_json(const json& doc, RunConfig c) {
    const json& j = doc.contains("run_config") ? doc.at("run_config") : doc;
    try {
        c.experiment_config = experiment_from_json(j, c.experiment_config);
        if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
        if (j.contains("sequence")) c.sequence = sequence_from_json(j.at("sequence"), c.sequence);
        if (j.contains("channels")) c.channels = axes_from_json(j.at("channels"));
        if (j.contains("hahn")) {
            const auto& h = j.at("hahn");
            if (h.contains("t_max")) c.hahn.t_max = h.at("t_max").get<double>();
            if (h.contains("points")) c.hahn.points = h.at("points").get<int>();
        }
        if (j.contains("floquet")) {
            const auto& f = j.at("floquet");
            if (f.contains("axes")) c.floquet.axes = axes_from_json(f.at("axes"));
            if (f.contains("threshold")) c.floquet.threshold = f.at("threshold").get<double>();
            if (f.contains("beta")) c.floquet.beta = f.at("beta").get<double>();
            if (f.contains("m_max")) c.floquet.m_max = f.at("m_max").get<int>();
            if (f.contains("dump_eigenvectors")) {
                c.floquet.dump_eigenvectors = f.at("dump_eigenvectors").get<bool>();
            }
        }
        if (j.contains("tables") && j.at("tables").contains("densities")) {
            c.tables.densities = j.at("tables").at("densities").get<std::vector<double>>();
        }
        if (j.contains("output") && !j.at("output").is_null()) {
            c.output = j.at("output").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed run configuration: ") + e.what());
    }
    return c;
}

void set_master_seed(RunConfig& config, std::uint64_t seed) {
    config.experiment_config.ensemble.seed = seed;
    config.experiment_config.pulse.seed = seed;
}

std::filesystem::path default_output_directory() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    std::filesystem::path base = std::filesystem::path("results") / stamp;
    std::filesystem::path dir = base;
    for (int k = 1; std::filesystem::exists(dir); ++k) {
        dir = base;
        dir += "-" + std::to_string(k);
    }
    return dir;
}

ResultRecord run(const RunConfig& input) {
    input.validate();
    const auto start = std::chrono::steady_clock::now();
    ResultRecord record;
    record.config = input;
    record.directory = input.output ? *input.output : default_output_directory();
    std::error_code ec;
    std::filesystem::create_directories(record.directory, ec);
    if (ec || !std::filesystem::is_directory(record.directory)) {
        throw IoError("cannot create output directory " + record.directory.string());
    }
    Writer out{record.directory, {}};
    json extra = json::object();

    ExperimentConfig exp = input.experiment_config;
    const bool needs_ensemble = input.experiment != Experiment::Tables &&
                                input.experiment != Experiment::Calibrate;
    if (needs_ensemble) {
        const bool calibrating = exp.ensemble.d.is_finite() && !exp.ensemble.density;
        exp = resolve_experiment(exp);
        if (calibrating) extra["calibrated_density"] = *exp.ensemble.density;
    }
    record.config.experiment_config = exp;
    Progress progress(input.quiet, experiment_name(input.experiment));

    switch (input.experiment) {
        case Experiment::Hahn: {
            const auto times = input.hahn.times();
            record.series.push_back(run_hahn(exp, times, progress.callback()));
            break;
        }
        case Experiment::CPMG:
        case Experiment::APCP:
        case Experiment::Longitudinal: {
            SequenceSpec seq = input.sequence;
            seq.kind = input.experiment == Experiment::APCP ? SequenceKind::APCP : SequenceKind::CPMG;
            record.config.sequence = seq;
            if (input.experiment == Experiment::Longitudinal) {
                record.series.push_back(run_longitudinal(exp, seq, progress.callback()));
            } else {
                record.series = run_cpmg(exp, seq, input.channels, progress.callback());
            }
            break;
        }
        case Experiment::Floquet:
            extra["floquet"] = run_floquet(input, exp, out, record.series);
            break;
        case Experiment::Calibrate: {
            const CalibrationResult c = calibrate_density(exp.ensemble, exp.calibration);
            json cj = {{"density", c.density},
                       {"t2", c.t2},
                       {"iterations", c.iterations},
                       {"warning", c.warning},
                       {"d", exp.ensemble.d.to_string()},
                       {"n_spins", exp.ensemble.n_spins}};
            cj["closed_form_density"] =
                c.closed_form_density ? json(*c.closed_form_density) : json(nullptr);
            out.put("calibration.json", cj.dump(2) + "\n");
            extra["calibration"] = cj;
            record.config.experiment_config.ensemble.density = c.density;
            break;
        }
        case Experiment::Tables: {
            std::string csv = "d,lambda_closed,lambda_quadrature,sphere_factor,density,t2\n";
            for (int d = 1; d <= 5; ++d) {
                for (double f : input.tables.densities) {
                    csv += std::to_string(d) + ',' + format_double(lambda_integral(d)) + ',' +
                           format_double(lambda_quadrature(d)) + ',' +
                           format_double(sphere_factor(d, exp.ensemble.axis_mode)) + ',' +
                           format_double(f) + ',';
                    if (d >= 2) csv += format_double(t2_from_density(d, f, exp.ensemble.axis_mode));
                    csv += '\n';
                }
            }
            out.put("tables.csv", csv);
            break;
        }
    }

    if (input.experiment != Experiment::Floquet) {
        for (const auto& s : record.series) out.put(series_file(s), series_csv(s));
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunConfig persisted = record.config;
    persisted.output.reset();
    json meta = {{"schema_version", kSchemaVersion},
                 {"experiment", experiment_name(input.experiment)},
                 {"run_config", to_json(persisted)},
                 {"wall_seconds", record.wall_seconds},
                 {"n_realizations", exp.n_realizations}};
    meta.update(extra);
    json files = json::array();
    for (const auto& f : out.files) files.push_back(f);
    files.push_back("metadata.json");
    meta["files"] = files;
    record.metadata = meta;
    out.put("metadata.json", meta.dump(2) + "\n");
    record.files = out.files;
    return record;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Flags {
    std::string config, d, model, axis, epsilon_policy, out, method, channels, field_dist, axis_mode;
    int ns = 0, pulses = 0, samples = 0, threads = 0, points = 0, interior = 0, m_max = 0;
    double tau = 0, epsilon = 0, density = 0, t2 = 0, gamma = 0, tmax = 0, beta = 0, threshold = 0,
           trotter_step = 0;
    std::vector<double> epsilon_range, densities;
    std::uint64_t seed = 0;
    bool dump = false, quiet = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON run configuration (or a metadata.json to rerun)");
    sub->add_option("--d", f.d, "dimension: positive integer or inf");
    sub->add_option("--ns", f.ns, "number of spins");
    sub->add_option("--density", f.density, "spins per unit volume (default: calibrate to --t2)");
    sub->add_option("--t2", f.t2, "target Hahn-echo time for calibration");
    sub->add_option("--gamma", f.gamma, "local-field width Gamma");
    sub->add_option("--field-dist", f.field_dist, "gaussian|lorentzian|exponential");
    sub->add_option("--axis-mode", f.axis_mode, "d = 2 quantization axis: normal|in-plane");
    sub->add_option("--tau", f.tau, "half pulse spacing");
    sub->add_option("--epsilon", f.epsilon,
                    "pulse error; for random policies the interval is [-epsilon, epsilon]");
    sub->add_option("--epsilon-range", f.epsilon_range, "interval for random policies")
        ->expected(2);
    sub->add_option("--epsilon-policy", f.epsilon_policy, "uniform|per-spin|per-pulse");
    sub->add_option("--axis", f.axis, "x|apcp|random-fixed");
    sub->add_option("--pulses", f.pulses, "number of pulses");
    sub->add_option("--interior", f.interior, "extra samples inside each free interval");
    sub->add_option("--samples", f.samples, "disorder realizations");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--model", f.model, "full|reduced");
    sub->add_option("--method", f.method, "trotter|chebyshev|exact");
    sub->add_option("--trotter-step", f.trotter_step, "Trotter step (default: per-realization convergence gate)");
    sub->add_option("--tmax", f.tmax, "hahn: largest total time; cpmg: run length");
    sub->add_option("--points", f.points, "hahn: number of time points");
    sub->add_option("--channels", f.channels, "comma-separated axes, e.g. x,y,z");
    sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    sub->add_option("--beta", f.beta, "floquet: histogram bin half-width");
    sub->add_option("--threshold", f.threshold, "floquet: matrix-map threshold");
    sub->add_option("--m-max", f.m_max, "floquet: periods in the reconstructed response");
    sub->add_flag("--dump-eigenvectors", f.dump, "floquet: write eigenvectors.bin");
    sub->add_option("--densities", f.densities, "tables: densities to tabulate");
    sub->add_option("--out", f.out, "output directory (default ./results/<timestamp>/)");
    sub->add_flag("--quiet", f.quiet, "no progress output");
}

template <class Fn>
void wrap(const char* flag, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

}  // namespace

RunConfig cli_parse(int argc, const char* const* argv) {
    CLI::App app{"Dipolar spin-echo ensemble simulator", "spinecho"};
    app.require_subcommand(1, 1);
    Flags f;
    std::vector<std::pair<CLI::App*, Experiment>> subs;
    const char* help[] = {"Hahn echo versus total time",
                          "CPMG echo train",
                          "alternating-phase CPMG echo train",
                          "CPMG train observed in M_z",
                          "Floquet spectrum, matrix maps and histograms",
                          "calibrate the density to the target T2",
                          "closed-form Lambda and T2 tables"};
    for (std::size_t k = 0; k < std::size(kExperiments); ++k) {
        auto* sub = app.add_subcommand(std::string(kExperiments[k].first), help[k]);
        add_flags(sub, f);
        subs.emplace_back(sub, kExperiments[k].second);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    CLI::App* sub = nullptr;
    Experiment experiment = Experiment::Hahn;
    for (const auto& [s, e] : subs) {
        if (s->parsed()) {
            sub = s;
            experiment = e;
        }
    }
    if (sub == nullptr) throw UsageError("a subcommand is required");
    auto given = [sub](const char* flag) { return sub->count(flag) > 0; };

    RunConfig c;
    bool config_sets_method = false;
    if (given("--config")) {
        wrap("--config", [&] {
            json j;
            try {
                j = json::parse(read_text(f.config));
            } catch (const json::exception& e) {
                throw ConfigError(std::string("invalid JSON: ") + e.what());
            } catch (const IoError& e) {
                throw ConfigError(e.what());
            }
            c = run_config_from_json(j);
            const json& doc = j.contains("run_config") ? j.at("run_config") : j;
            config_sets_method = doc.contains("plan") && doc.at("plan").contains("method");
        });
    }
    c.experiment = experiment;
    if (experiment == Experiment::Floquet && !given("--method") && !config_sets_method) {
        c.experiment_config.plan.method = EvolutionMethod::Exact;
    }
    auto& e = c.experiment_config;
    auto& ens = e.ensemble;
    if (given("--seed")) set_master_seed(c, f.seed);
    if (given("--d")) {
        wrap("--d", [&] { ens.d = Dimension::parse(f.d); });
        if (!given("--density")) ens.density.reset();
    }
    if (given("--density")) {
        if (ens.d.is_infinite()) throw UsageError("--density cannot be used with --d inf");
        ens.density = f.density;
    }
    if (ens.d.is_infinite() && ens.density) {
        throw UsageError("d = inf takes no density (configuration file sets one)");
    }
    if (given("--ns")) ens.n_spins = f.ns;
    if (given("--t2")) ens.target_t2 = f.t2;
    if (given("--gamma")) ens.field_sigma = f.gamma;
    if (given("--field-dist")) wrap("--field-dist", [&] { ens.field_distribution = parse_field_distribution(f.field_dist); });
    if (given("--axis-mode")) wrap("--axis-mode", [&] { ens.axis_mode = parse_axis_mode(f.axis_mode); });
    if (given("--model")) wrap("--model", [&] { e.variant = parse_variant(f.model); });
    if (given("--method")) wrap("--method", [&] { e.plan.method = parse_method(f.method); });
    if (given("--trotter-step")) e.plan.trotter_step = f.trotter_step;
    if (given("--samples")) e.n_realizations = f.samples;
    if (given("--threads")) e.threads = f.threads;

    auto& pulse = e.pulse;
    if (given("--epsilon-policy")) {
        wrap("--epsilon-policy", [&] { pulse.epsilon.kind = parse_epsilon_policy(f.epsilon_policy); });
    }
    if (given("--epsilon")) {
        pulse.epsilon.epsilon = f.epsilon;
        if (pulse.epsilon.kind != EpsilonPolicyKind::Uniform) {
            pulse.epsilon.lower = -std::abs(f.epsilon);
            pulse.epsilon.upper = std::abs(f.epsilon);
        }
    }
    if (given("--epsilon-range")) {
        pulse.epsilon.lower = f.epsilon_range[0];
        pulse.epsilon.upper = f.epsilon_range[1];
        if (!(pulse.epsilon.lower <= pulse.epsilon.upper)) {
            throw UsageError("--epsilon-range: lower bound exceeds upper bound");
        }
    }
    if (given("--axis")) wrap("--axis", [&] { pulse.axis = parse_axis_policy(f.axis); });
    if (experiment == Experiment::APCP) pulse.axis = AxisPolicy::AlternatingX;

    auto& seq = c.sequence;
    if (given("--tau")) seq.tau = f.tau;
    if (given("--pulses")) seq.n_pulses = f.pulses;
    if (given("--interior")) seq.points_per_interval = f.interior;
    if (given("--tmax")) {
        c.hahn.t_max = f.tmax;
        if (!given("--pulses") && f.tmax > 0.0 && seq.tau > 0.0) {
            seq.n_pulses = static_cast<int>(std::ceil(f.tmax / (2.0 * seq.tau) - 1e-9));
        }
    }
    if (given("--points")) c.hahn.points = f.points;
    if (given("--channels")) {
        wrap("--channels", [&] {
            c.channels = parse_axes(f.channels);
            c.floquet.axes = c.channels;
        });
    }
    if (given("--beta")) c.floquet.beta = f.beta;
    if (given("--threshold")) c.floquet.threshold = f.threshold;
    if (given("--m-max")) c.floquet.m_max = f.m_max;
    if (given("--dump-eigenvectors")) c.floquet.dump_eigenvectors = true;
    if (given("--densities")) c.tables.densities = f.densities;
    if (given("--out")) c.output = f.out;
    c.quiet = f.quiet;

    wrap("configuration", [&] { c.validate(); });
    return c;
}

int cli_main(int argc, const char* const* argv) {
    RunConfig config;
    try {
        config = cli_parse(argc, argv);
    } catch (const HelpRequested& h) {
        std::cout << h.what();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "spinecho: " << e.what() << "\n";
        return 2;
    }
    try {
        const ResultRecord r = run(config);
        std::cout << r.directory.string() << "\n";
        return 0;
    } catch (const ResourceError& e) {
        std::cerr << "spinecho: resource limit: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "spinecho: numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "spinecho: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedGeometry& e) {
        std::cerr << "spinecho: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "spinecho: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "spinecho: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace spinecho
