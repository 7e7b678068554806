#pragma once

#include "spinecho/disorder.hpp"
#include "spinecho/engine.hpp"
#include "spinecho/model.hpp"
#include "spinecho/protocol.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace spinecho {

/// Version of the CSV/JSON output contract.
inline constexpr int kSchemaVersion = 1;

std::string variant_name(ModelVariant v);
ModelVariant parse_variant(std::string_view text);

std::string epsilon_policy_name(EpsilonPolicyKind k);
EpsilonPolicyKind parse_epsilon_policy(std::string_view text);

/// "x", "apcp", "random-fixed".
std::string axis_policy_name(AxisPolicy a);
AxisPolicy parse_axis_policy(std::string_view text);

std::string method_name(EvolutionMethod m);
EvolutionMethod parse_method(std::string_view text);

std::string sequence_name(SequenceKind k);
SequenceKind parse_sequence(std::string_view text);

std::string field_distribution_name(FieldDistribution f);
FieldDistribution parse_field_distribution(std::string_view text);

std::string axis_mode_name(AxisMode m);
AxisMode parse_axis_mode(std::string_view text);

// JSON round trips. The *_from_json functions start from `base` and override
// only the keys present, so partial documents are accepted.
nlohmann::json to_json(const EnsembleConfig& c);
EnsembleConfig ensemble_from_json(const nlohmann::json& j, EnsembleConfig base = {});

nlohmann::json to_json(const PulseModel& p);
PulseModel pulse_from_json(const nlohmann::json& j, PulseModel base = {});

nlohmann::json to_json(const EvolutionPlan& p);
EvolutionPlan plan_from_json(const nlohmann::json& j, EvolutionPlan base = {});

nlohmann::json to_json(const SequenceSpec& s);
SequenceSpec sequence_from_json(const nlohmann::json& j, SequenceSpec base = {});

nlohmann::json to_json(const CalibrationOptions& c);
CalibrationOptions calibration_from_json(const nlohmann::json& j, CalibrationOptions base = {});

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// {config, seed, index, positions, couplings, fields}
nlohmann::json to_json(const DisorderRealization& r);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// Columns: time, mean, stderr, echo_index, parity (parity empty off-echo).
std::string series_csv(const ResponseSeries& series);
/// Parses series_csv output; samples and metadata stay empty.
ResponseSeries parse_series_csv(std::string_view text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace spinecho
