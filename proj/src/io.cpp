#include "spinecho/io.hpp"

#include "spinecho/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace spinecho {

using nlohmann::json;

namespace {

template <class Enum, std::size_t N>
Enum lookup(std::string_view text, const std::pair<std::string_view, Enum> (&table)[N],
            std::string_view what) {
    for (const auto& [name, value] : table) {
        if (name == text) return value;
    }
    std::string msg = "invalid " + std::string(what) + " '" + std::string(text) + "' (expected";
    for (const auto& entry : table) msg += " " + std::string(entry.first);
    throw ConfigError(msg + ")");
}

template <class Enum, std::size_t N>
std::string name_of(Enum value, const std::pair<std::string_view, Enum> (&table)[N]) {
    for (const auto& [name, v] : table) {
        if (v == value) return std::string(name);
    }
    return "?";
}

constexpr std::pair<std::string_view, ModelVariant> kVariants[] = {
    {"full", ModelVariant::Full}, {"reduced", ModelVariant::Reduced}};
constexpr std::pair<std::string_view, EpsilonPolicyKind> kEpsilonPolicies[] = {
    {"uniform", EpsilonPolicyKind::Uniform},
    {"per-spin", EpsilonPolicyKind::PerSpinConstant},
    {"per-pulse", EpsilonPolicyKind::PerPulseRandom}};
constexpr std::pair<std::string_view, AxisPolicy> kAxisPolicies[] = {
    {"x", AxisPolicy::PlusX},
    {"apcp", AxisPolicy::AlternatingX},
    {"random-fixed", AxisPolicy::PerSpinRandomFixed}};
constexpr std::pair<std::string_view, EvolutionMethod> kMethods[] = {
    {"trotter", EvolutionMethod::Trotter2},
    {"chebyshev", EvolutionMethod::Chebyshev},
    {"exact", EvolutionMethod::Exact}};
constexpr std::pair<std::string_view, SequenceKind> kSequences[] = {
    {"hahn", SequenceKind::Hahn}, {"cpmg", SequenceKind::CPMG}, {"apcp", SequenceKind::APCP}};
constexpr std::pair<std::string_view, FieldDistribution> kFieldDistributions[] = {
    {"gaussian", FieldDistribution::Gaussian},
    {"lorentzian", FieldDistribution::Lorentzian},
    {"exponential", FieldDistribution::Exponential}};
constexpr std::pair<std::string_view, AxisMode> kAxisModes[] = {
    {"normal", AxisMode::NormalToPlane}, {"in-plane", AxisMode::InPlane}};

template <class T>
void read_key(const json& j, const char* key, T& out) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string variant_name(ModelVariant v) { return name_of(v, kVariants); }
ModelVariant parse_variant(std::string_view t) { return lookup(t, kVariants, "model"); }
std::string epsilon_policy_name(EpsilonPolicyKind k) { return name_of(k, kEpsilonPolicies); }
EpsilonPolicyKind parse_epsilon_policy(std::string_view t) {
    return lookup(t, kEpsilonPolicies, "epsilon policy");
}
std::string axis_policy_name(AxisPolicy a) { return name_of(a, kAxisPolicies); }
AxisPolicy parse_axis_policy(std::string_view t) { return lookup(t, kAxisPolicies, "axis policy"); }
std::string method_name(EvolutionMethod m) { return name_of(m, kMethods); }
EvolutionMethod parse_method(std::string_view t) { return lookup(t, kMethods, "method"); }
std::string sequence_name(SequenceKind k) { return name_of(k, kSequences); }
SequenceKind parse_sequence(std::string_view t) { return lookup(t, kSequences, "sequence"); }
std::string field_distribution_name(FieldDistribution f) { return name_of(f, kFieldDistributions); }
FieldDistribution parse_field_distribution(std::string_view t) {
    return lookup(t, kFieldDistributions, "field distribution");
}
std::string axis_mode_name(AxisMode m) { return name_of(m, kAxisModes); }
AxisMode parse_axis_mode(std::string_view t) { return lookup(t, kAxisModes, "axis mode"); }

json to_json(const EnsembleConfig& c) {
    json j = {{"d", c.d.to_string()},
              {"n_spins", c.n_spins},
              {"target_t2", c.target_t2},
              {"field_sigma", c.field_sigma},
              {"field_distribution", field_distribution_name(c.field_distribution)},
              {"axis_mode", axis_mode_name(c.axis_mode)},
              {"seed", c.seed}};
    j["density"] = c.density ? json(*c.density) : json(nullptr);
    return j;
}

EnsembleConfig ensemble_from_json(const json& j, EnsembleConfig c) {
    if (j.contains("d")) {
        const auto& d = j.at("d");
        c.d = d.is_number_integer() ? Dimension(d.get<int>()) : Dimension::parse(d.get<std::string>());
    }
    read_key(j, "n_spins", c.n_spins);
    if (j.contains("density")) {
        c.density = j.at("density").is_null() ? std::nullopt
                                              : std::optional<double>(j.at("density").get<double>());
    }
    read_key(j, "target_t2", c.target_t2);
    read_key(j, "field_sigma", c.field_sigma);
    if (j.contains("field_distribution")) {
        c.field_distribution = parse_field_distribution(j.at("field_distribution").get<std::string>());
    }
    if (j.contains("axis_mode")) c.axis_mode = parse_axis_mode(j.at("axis_mode").get<std::string>());
    read_key(j, "seed", c.seed);
    return c;
}

json to_json(const PulseModel& p) {
    return {{"epsilon_policy", epsilon_policy_name(p.epsilon.kind)},
            {"epsilon", p.epsilon.epsilon},
            {"epsilon_lower", p.epsilon.lower},
            {"epsilon_upper", p.epsilon.upper},
            {"axis", axis_policy_name(p.axis)},
            {"seed", p.seed}};
}

PulseModel pulse_from_json(const json& j, PulseModel p) {
    if (j.contains("epsilon_policy")) {
        p.epsilon.kind = parse_epsilon_policy(j.at("epsilon_policy").get<std::string>());
    }
    read_key(j, "epsilon", p.epsilon.epsilon);
    read_key(j, "epsilon_lower", p.epsilon.lower);
    read_key(j, "epsilon_upper", p.epsilon.upper);
    if (j.contains("axis")) p.axis = parse_axis_policy(j.at("axis").get<std::string>());
    read_key(j, "seed", p.seed);
    return p;
}

json to_json(const EvolutionPlan& p) {
    return {{"method", method_name(p.method)},
            {"trotter_step", p.trotter_step},
            {"chebyshev_order", p.chebyshev_order},
            {"spectral_bound", p.spectral_bound}};
}

EvolutionPlan plan_from_json(const json& j, EvolutionPlan p) {
    if (j.contains("method")) p.method = parse_method(j.at("method").get<std::string>());
    read_key(j, "trotter_step", p.trotter_step);
    read_key(j, "chebyshev_order", p.chebyshev_order);
    read_key(j, "spectral_bound", p.spectral_bound);
    return p;
}

json to_json(const SequenceSpec& s) {
    return {{"kind", sequence_name(s.kind)},
            {"tau", s.tau},
            {"n_pulses", s.n_pulses},
            {"record_times", s.record_times},
            {"points_per_interval", s.points_per_interval}};
}

SequenceSpec sequence_from_json(const json& j, SequenceSpec s) {
    if (j.contains("kind")) s.kind = parse_sequence(j.at("kind").get<std::string>());
    read_key(j, "tau", s.tau);
    read_key(j, "n_pulses", s.n_pulses);
    read_key(j, "record_times", s.record_times);
    read_key(j, "points_per_interval", s.points_per_interval);
    return s;
}

json to_json(const CalibrationOptions& c) {
    return {{"n_realizations", c.n_realizations},
            {"tolerance", c.tolerance},
            {"max_iterations", c.max_iterations},
            {"seed", c.seed}};
}

CalibrationOptions calibration_from_json(const json& j, CalibrationOptions c) {
    read_key(j, "n_realizations", c.n_realizations);
    read_key(j, "tolerance", c.tolerance);
    read_key(j, "max_iterations", c.max_iterations);
    read_key(j, "seed", c.seed);
    return c;
}

json to_json(const ExperimentConfig& c) {
    return {{"ensemble", to_json(c.ensemble)},
            {"model", variant_name(c.variant)},
            {"pulse", to_json(c.pulse)},
            {"plan", to_json(c.plan)},
            {"n_realizations", c.n_realizations},
            {"threads", c.threads},
            {"calibration", to_json(c.calibration)}};
}

ExperimentConfig experiment_from_json(const json& j, ExperimentConfig c) {
    if (j.contains("ensemble")) c.ensemble = ensemble_from_json(j.at("ensemble"), c.ensemble);
    if (j.contains("model")) c.variant = parse_variant(j.at("model").get<std::string>());
    if (j.contains("pulse")) c.pulse = pulse_from_json(j.at("pulse"), c.pulse);
    if (j.contains("plan")) c.plan = plan_from_json(j.at("plan"), c.plan);
    read_key(j, "n_realizations", c.n_realizations);
    read_key(j, "threads", c.threads);
    if (j.contains("calibration")) {
        c.calibration = calibration_from_json(j.at("calibration"), c.calibration);
    }
    return c;
}

json to_json(const DisorderRealization& r) {
    json fields = json::array();
    for (Eigen::Index k = 0; k < r.fields.size(); ++k) fields.push_back(r.fields(k));
    return {{"config", to_json(r.config)},
            {"seed", r.seed},
            {"index", r.index},
            {"positions", matrix_to_json(r.positions)},
            {"couplings", matrix_to_json(r.couplings)},
            {"fields", std::move(fields)}};
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string series_csv(const ResponseSeries& s) {
    std::string out = "time,mean,stderr,echo_index,parity\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        const int n = s.echo_index.empty() ? -1 : s.echo_index[k];
        out += format_double(s.times[k]);
        out += ',';
        out += format_double(s.mean[k]);
        out += ',';
        out += format_double(s.std_error[k]);
        out += ',';
        out += std::to_string(n);
        out += ',';
        if (n >= 0) out += (n % 2 == 0 ? "even" : "odd");
        out += '\n';
    }
    return out;
}

ResponseSeries parse_series_csv(std::string_view text) {
    ResponseSeries s;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("time,mean,stderr,echo_index", 0) != 0) {
        throw IoError("not a response-series CSV");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell[5];
        for (auto& c : cell) std::getline(row, c, ',');
        try {
            s.times.push_back(std::stod(cell[0]));
            s.mean.push_back(std::stod(cell[1]));
            s.std_error.push_back(std::stod(cell[2]));
            s.echo_index.push_back(std::stoi(cell[3]));
        } catch (const std::exception&) {
            throw IoError("malformed CSV row: " + line);
        }
    }
    return s;
}

}  // namespace spinecho
