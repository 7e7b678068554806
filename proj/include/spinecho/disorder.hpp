#pragma once

#include "spinecho/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace spinecho {

/// Default inhomogeneous field width: Gaussian free decay exp(-Gamma^2 t^2 / 2)
/// with T2* = 0.02 gives Gamma = sqrt(2) / 0.02.
inline constexpr double kDefaultT2Star = 0.02;
inline constexpr double kDefaultFieldSigma = 1.4142135623730951 / kDefaultT2Star;

/// Realizations with any pair closer than this fraction of the box edge are redrawn.
inline constexpr double kMinSeparationFraction = 1e-6;

enum class FieldDistribution { Gaussian, Lorentzian, Exponential };

struct EnsembleConfig {
    Dimension d{2};
    int n_spins = 20;
    /// Spins per unit d-volume. Unset means "calibrate to target_t2".
    std::optional<double> density;
    double target_t2 = 1.0;
    double field_sigma = kDefaultFieldSigma;
    FieldDistribution field_distribution = FieldDistribution::Gaussian;
    AxisMode axis_mode = AxisMode::NormalToPlane;
    std::uint64_t seed = 0;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Cube edge L = (N_s / f_s)^(1/d). Requires a finite d and a density.
    [[nodiscard]] double edge_length() const;
};

struct DisorderRealization {
    EnsembleConfig config;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    /// n_spins x d; empty for d = infinity.
    Eigen::MatrixXd positions;
    /// Symmetric, zero diagonal, angular-frequency units. Entry (i, j) is the
    /// coefficient of the secular dipolar pair term.
    Eigen::MatrixXd couplings;
    Eigen::VectorXd fields;

    [[nodiscard]] int n_spins() const { return static_cast<int>(fields.size()); }
};

/// Uniform positions in [0, L]^d, deterministic in (config.seed, index).
Eigen::MatrixXd sample_positions(const EnsembleConfig& config, std::uint64_t index = 0);

/// J_ij = (1 - 3 cos^2 theta_ij) / r_ij^3. theta is measured from the first
/// coordinate axis, except for d = 2 with NormalToPlane where every pair is
/// perpendicular to the axis. Pairs closer than min_separation throw
/// DegenerateGeometry.
Eigen::MatrixXd compute_couplings(const Eigen::MatrixXd& positions, const EnsembleConfig& config,
                                  double min_separation = 0.0);

/// Uniform all-to-all coupling J for d = infinity, normalized so that
/// cos^(N_s - 1)(2 J t) first falls to 1/e at t = target_t2.
double couplings_infinite_d(int n_spins, double target_t2);

/// Pair coefficient entering the Hamiltonian for a given d = infinity J.
/// With this mapping the reduced-model Hahn echo equals cos^(N_s - 1)(2 J t).
constexpr double infinite_d_pair_coupling(double j) { return 4.0 * j; }

/// Local fields h_j, i.i.d. from the configured distribution with scale field_sigma.
Eigen::VectorXd sample_fields(const EnsembleConfig& config, std::uint64_t index = 0);

/// Realization `index` of the ensemble. Finite d requires a density; draws with
/// near-coincident spins are rejected and redrawn from the same stream.
DisorderRealization make_realization(const EnsembleConfig& config, std::uint64_t index);

struct CalibrationOptions {
    /// The d = 2 ensemble 1/e time scatters by ~6% between 100-geometry draws.
    int n_realizations = 4000;
    /// Stop when |T2 - target| < tolerance * target.
    double tolerance = 0.02;
    int max_iterations = 80;
    std::uint64_t seed = 0x5eed;
};

struct CalibrationResult {
    double density = 0.0;
    /// Ensemble 1/e time of the simulated Hahn echo at `density`.
    double t2 = 0.0;
    /// Closed-form starting value; unset for d >= 6.
    std::optional<double> closed_form_density;
    int iterations = 0;
    std::string warning;
};

/// Ensemble 1/e crossing time of the reduced-model Hahn echo, averaged over
/// `n_realizations` geometries drawn at the given density.
double simulated_hahn_t2(const EnsembleConfig& config, double density, int n_realizations,
                         std::uint64_t seed);

/// Density giving an ensemble-averaged Hahn-echo 1/e time of target_t2.
/// Starts from the continuum closed form (2 <= d <= 5) and refines by bisection.
CalibrationResult calibrate_density(const EnsembleConfig& config,
                                    const CalibrationOptions& options = {});

/// Fills in the density of a finite-d config by calibration when it is unset.
EnsembleConfig resolve_density(EnsembleConfig config, const CalibrationOptions& options = {});

}  // namespace spinecho
