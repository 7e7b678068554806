#pragma once

#include "spinecho/engine.hpp"
#include "spinecho/model.hpp"
#include "spinecho/types.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace spinecho {

/// Default dense limit for Floquet matrices (2^14 x 2^14 complex is ~4.3 GB).
inline constexpr int kMaxFloquetSpins = 14;

/// Default bin width 2 beta = pi * 1e-5.
inline constexpr double kDefaultHalfBinWidth = 3.14159265358979323846 * 0.5e-5;

struct FloquetOperator {
    int n_spins = 0;
    double tau = 0.0;
    Eigen::MatrixXcd matrix;
    nlohmann::json metadata;
};

/// U_F = U(tau) R U(tau) for a periodic pulse model (every pulse identical).
/// The Exact plan assembles U(tau) from sector blocks; other plans propagate
/// each basis column through the engine.
FloquetOperator build_floquet(const SpinModel& model, const PulseModel& pulse, double tau,
                              const EvolutionPlan& plan = {EvolutionMethod::Exact},
                              int max_spins = kMaxFloquetSpins);

/// max |(U^dagger U - I)_ij|
double unitarity_defect(const Eigen::MatrixXcd& u);

struct FloquetSpectrum {
    int n_spins = 0;
    /// phi_k in (-pi, pi], eigenvalues exp(i phi_k).
    Eigen::VectorXd quasienergies;
    /// Columns are |psi_k>.
    Eigen::MatrixXcd eigenvectors;
    /// max |(sum_k e^{i phi_k} |psi_k><psi_k| - U)_ij|
    double reconstruction_residual = 0.0;
    nlohmann::json metadata;

    [[nodiscard]] Eigen::Index dimension() const { return quasienergies.size(); }
};

/// Complex Schur decomposition of a unitary matrix. Input further than
/// `tolerance` from unitarity raises NumericalError.
FloquetSpectrum diagonalize(const Eigen::MatrixXcd& u, double tolerance = 1e-8);
FloquetSpectrum diagonalize(const FloquetOperator& op, double tolerance = 1e-8);

struct MatrixElement {
    Eigen::Index j = 0;
    Eigen::Index k = 0;
    double value = 0.0;
};

/// M^{jk} = |<psi_j|M_alpha|psi_k>|^2. `values` keeps every entry; `entries`
/// lists those strictly above the threshold.
struct MatrixElementMap {
    Axis alpha = Axis::X;
    double threshold = 0.0;
    Eigen::MatrixXd values;
    std::vector<MatrixElement> entries;

    /// sum_{jk} M^{jk}, equal to Tr M_alpha^2.
    [[nodiscard]] double total() const { return values.sum(); }
    /// sum_j M^{jj} / sum_{jk} M^{jk}
    [[nodiscard]] double diagonal_fraction() const { return values.trace() / values.sum(); }
};

MatrixElementMap matrix_elements(const FloquetSpectrum& spectrum, Axis alpha, double threshold);

/// (4 / (N 2^N)) sum_{jk} e^{i (phi_j - phi_k) m} M^{jk} after m periods.
/// Throws NumericalError when the imaginary part exceeds 1e-8.
double reconstruct_response(const FloquetSpectrum& spectrum, const MatrixElementMap& map, int m);
std::vector<double> reconstruct_series(const FloquetSpectrum& spectrum, const MatrixElementMap& map,
                                       int m_max);

/// |phi_j - phi_k| mapped onto [0, pi].
double downfold(double delta);

struct QuasienergyHistogram {
    double beta = 0.0;
    std::vector<double> centers;
    std::vector<double> values;

    [[nodiscard]] double total() const;
    /// sum of values * 2 beta
    [[nodiscard]] double integral() const { return total() * 2.0 * beta; }
    /// Adds another histogram with the same binning.
    void accumulate(const QuasienergyHistogram& other);
    void scale(double factor);
};

/// Bin centers 2 beta i for i = 0 .. round(pi / (2 beta)); a difference goes
/// to bin round(delta / (2 beta)).
QuasienergyHistogram make_histogram(double beta);

/// Counts of unordered pairs j <= k by downfolded difference; the total is
/// D (D + 1) / 2.
QuasienergyHistogram histogram_P(const FloquetSpectrum& spectrum, double beta = kDefaultHalfBinWidth);

/// Differences weighted by M^{jk} over all ordered pairs, normalized so that the
/// histogram integrates to one. With this weighting the m-th cosine moment of
/// Sigma equals reconstruct_response(m) up to the binning error.
QuasienergyHistogram weighted_sigma(const FloquetSpectrum& spectrum, const MatrixElementMap& map,
                                    double beta = kDefaultHalfBinWidth);

/// Sum of `values` over bins with centers in [lo, hi].
double histogram_mass(const QuasienergyHistogram& h, double lo, double hi);

std::string quasienergies_csv(const FloquetSpectrum& spectrum);
/// phi_j, phi_k, value for entries above the threshold.
std::string matrix_map_csv(const FloquetSpectrum& spectrum, const MatrixElementMap& map);
/// bin_center, value; empty bins are skipped unless keep_empty.
std::string histogram_csv(const QuasienergyHistogram& h, bool keep_empty = false);

/// Header of two little-endian uint64 (D, D), then column-major interleaved
/// real/imaginary little-endian doubles.
void write_eigenvectors(const std::filesystem::path& path, const FloquetSpectrum& spectrum);
Eigen::MatrixXcd read_eigenvectors(const std::filesystem::path& path);

}  // namespace spinecho
