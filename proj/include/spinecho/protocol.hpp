#pragma once

#include "spinecho/disorder.hpp"
#include "spinecho/engine.hpp"
#include "spinecho/model.hpp"
#include "spinecho/types.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace spinecho {

/// Everything that defines an ensemble experiment except the pulse sequence.
struct ExperimentConfig {
    EnsembleConfig ensemble;
    ModelVariant variant = ModelVariant::Full;
    PulseModel pulse;
    EvolutionPlan plan;
    int n_realizations = 100;
    /// Worker threads; 0 uses the hardware concurrency.
    int threads = 1;
    CalibrationOptions calibration;
};

/// Normalized response M_alpha(t). Row r of `samples` is realization r
/// normalized by its own t = 0 value, so mean[0] == 1 exactly.
struct ResponseSeries {
    Axis alpha = Axis::X;
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
    /// n for the echo at 2 n tau (0 at t = 0), -1 for samples between echoes.
    std::vector<int> echo_index;
    int n_realizations = 0;
    Eigen::MatrixXd samples;
    nlohmann::json metadata;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    /// Indices of records that are echoes (echo_index >= 0).
    [[nodiscard]] std::vector<std::size_t> echo_records() const;
};

/// Mean and standard error of per-realization window averages.
struct WindowStat {
    double mean = 0.0;
    double std_error = 0.0;
    int n_points = 0;
};

/// Averages each realization over records with t_min <= t <= t_max (echoes
/// only when echoes_only), then takes the realization mean and standard error.
WindowStat window_mean(const ResponseSeries& series, double t_min, double t_max,
                       bool echoes_only = true);

struct AsymmetryMetric {
    double even_mean = 0.0;
    double odd_mean = 0.0;
    double ratio = 0.0;
    /// Delta-method standard error of the ratio from per-realization values;
    /// zero when the series carries no samples.
    double ratio_std_error = 0.0;
    int n_even = 0;
    int n_odd = 0;
};

/// Mean of even- and odd-indexed echoes (n >= 1) with t in [t_min, t_max].
/// Throws ConfigError for an empty window and DomainError when
/// |odd_mean| <= floor.
AsymmetryMetric even_odd_asymmetry(const ResponseSeries& series, double t_min, double t_max,
                                   double floor = 1e-12);

/// Called after every finished realization with (done, total).
using ProgressFn = std::function<void(int, int)>;

/// Resolves the density (calibrating when unset) and returns the config used.
ExperimentConfig resolve_experiment(ExperimentConfig config);

/// Hahn echo with an ideal pulse at t/2 for every total time t (strictly
/// increasing, positive). The returned series starts with t = 0.
ResponseSeries run_hahn(const ExperimentConfig& config, std::span<const double> total_times,
                        const ProgressFn& progress = {});

/// CPMG or APCP train (APCP forces the alternating pulse axis). One series per
/// channel, all from the same random vectors.
std::vector<ResponseSeries> run_cpmg(const ExperimentConfig& config, const SequenceSpec& sequence,
                                     std::span<const Axis> channels,
                                     const ProgressFn& progress = {});

/// CPMG train observed in M_z.
ResponseSeries run_longitudinal(const ExperimentConfig& config, const SequenceSpec& sequence,
                                const ProgressFn& progress = {});

/// Realization-level seeds used by the protocols.
std::uint64_t realization_state_seed(std::uint64_t master, std::uint64_t index);
std::uint64_t realization_pulse_seed(std::uint64_t master, std::uint64_t index);

/// JSON description of an experiment (used in metadata sidecars).
nlohmann::json describe(const ExperimentConfig& config);

}  // namespace spinecho
