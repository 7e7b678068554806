#pragma once

#include "spinecho/error.hpp"
#include "spinecho/floquet.hpp"
#include "spinecho/protocol.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spinecho {

enum class Experiment { Hahn, CPMG, APCP, Longitudinal, Floquet, Calibrate, Tables };

std::string experiment_name(Experiment e);
Experiment parse_experiment(std::string_view text);

struct HahnGrid {
    double t_max = 2.0;
    int points = 40;

    /// t_max k / points for k = 1 .. points.
    [[nodiscard]] std::vector<double> times() const;
};

struct FloquetOptions {
    std::vector<Axis> axes{Axis::X};
    double threshold = 0.25;
    double beta = kDefaultHalfBinWidth;
    /// Periods for the reconstructed response.
    int m_max = 50;
    bool dump_eigenvectors = false;
};

struct TablesOptions {
    std::vector<double> densities{1.0};
};

/// Complete, serializable description of one run.
struct RunConfig {
    Experiment experiment = Experiment::Hahn;
    ExperimentConfig experiment_config;
    SequenceSpec sequence;
    std::vector<Axis> channels{Axis::X};
    HahnGrid hahn;
    FloquetOptions floquet;
    TablesOptions tables;
    /// Unset: ./results/<timestamp>/
    std::optional<std::filesystem::path> output;
    bool quiet = false;

    void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Accepts a run-config document or a metadata sidecar containing "run_config".
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Applies the master seed to every seeded component.
void set_master_seed(RunConfig& config, std::uint64_t seed);

struct ResultRecord {
    RunConfig config;
    std::filesystem::path directory;
    std::vector<ResponseSeries> series;
    std::vector<std::string> files;
    nlohmann::json metadata;
    double wall_seconds = 0.0;
};

/// Dispatches the experiment, writes every artifact atomically into the
/// output directory and returns what was written.
ResultRecord run(const RunConfig& config);

std::filesystem::path default_output_directory();

/// Raised for command-line problems (exit code 2).
class UsageError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Parses argv into a RunConfig. --config values are applied first and
/// explicit flags override them. Throws UsageError; --help throws
/// HelpRequested carrying the text.
RunConfig cli_parse(int argc, const char* const* argv);

class HelpRequested : public std::exception {
public:
    explicit HelpRequested(std::string text) : text_(std::move(text)) {}
    [[nodiscard]] const char* what() const noexcept override { return text_.c_str(); }

private:
    std::string text_;
};

/// Exit codes: 0 success, 2 usage, 3 resource limit, 4 numerical divergence,
/// 1 anything else (e.g. unwritable output).
int cli_main(int argc, const char* const* argv);

}  // namespace spinecho
