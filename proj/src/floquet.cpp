#include "spinecho/floquet.hpp"

#include "spinecho/error.hpp"
#include "spinecho/io.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace spinecho {

namespace {

constexpr double kPi = std::numbers::pi;

std::span<Complex> column(Eigen::MatrixXcd& m, Eigen::Index c) {
    return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

std::size_t bin_count(double beta) {
    if (!(beta > 0.0)) {
        throw ConfigError("bin half-width must be positive");
    }
    return static_cast<std::size_t>(std::lround(kPi / (2.0 * beta))) + 1;
}

std::size_t bin_of(double delta, double beta, std::size_t bins) {
    const auto b = static_cast<std::size_t>(std::lround(downfold(delta) / (2.0 * beta)));
    return std::min(b, bins - 1);
}

}  // namespace

FloquetOperator build_floquet(const SpinModel& model, const PulseModel& pulse, double tau,
                              const EvolutionPlan& plan, int max_spins) {
    const int n = model.n_spins;
    if (!pulse.is_periodic()) {
        throw ConfigError("Floquet operator needs identical pulses (no per-pulse randomness or APCP)");
    }
    if (!(tau > 0.0)) {
        throw ConfigError("tau must be positive");
    }
    if (n > max_spins) {
        throw ResourceError("dense Floquet matrix for " + std::to_string(n) +
                            " spins exceeds the limit of " + std::to_string(max_spins));
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    Propagator propagator(model, plan);
    const auto rotations = PulseTrain(pulse, n).rotations(0);

    FloquetOperator op;
    op.n_spins = n;
    op.tau = tau;
    op.matrix.resize(dim, dim);
    if (plan.method == EvolutionMethod::Exact) {
        const auto blocks = propagator.sector_propagators(tau);
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& b : blocks) {
            const auto size = static_cast<Eigen::Index>(b.states.size());
            for (Eigen::Index c = 0; c < size; ++c) {
                const auto col = static_cast<Eigen::Index>(b.states[static_cast<std::size_t>(c)]);
                for (Eigen::Index r = 0; r < size; ++r) {
                    a(static_cast<Eigen::Index>(b.states[static_cast<std::size_t>(r)]), col) =
                        b.propagator(r, c);
                }
            }
        }
        for (Eigen::Index c = 0; c < dim; ++c) apply_pulse(column(a, c), n, rotations);
        for (const auto& b : blocks) {
            const auto size = static_cast<Eigen::Index>(b.states.size());
            Eigen::MatrixXcd rows(size, dim);
            for (Eigen::Index r = 0; r < size; ++r) {
                rows.row(r) = a.row(static_cast<Eigen::Index>(b.states[static_cast<std::size_t>(r)]));
            }
            const Eigen::MatrixXcd out = b.propagator * rows;
            for (Eigen::Index r = 0; r < size; ++r) {
                op.matrix.row(static_cast<Eigen::Index>(b.states[static_cast<std::size_t>(r)])) =
                    out.row(r);
            }
        }
    } else {
        for (Eigen::Index c = 0; c < dim; ++c) {
            StateVector v = StateVector::basis(n, static_cast<std::size_t>(c));
            propagator.evolve(v, tau);
            apply_pulse(v, rotations);
            propagator.evolve(v, tau);
            for (Eigen::Index r = 0; r < dim; ++r) op.matrix(r, c) = v[static_cast<std::size_t>(r)];
        }
    }
    op.metadata = {{"n_spins", n},
                   {"tau", tau},
                   {"model", variant_name(model.variant)},
                   {"pulse", to_json(pulse)},
                   {"plan", to_json(plan)}};
    return op;
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
    if (u.rows() != u.cols()) {
        throw ConfigError("matrix is not square");
    }
    Eigen::MatrixXcd g = u.adjoint() * u;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

FloquetSpectrum diagonalize(const Eigen::MatrixXcd& u, double tolerance) {
    const Eigen::Index dim = u.rows();
    if (dim == 0 || u.cols() != dim) {
        throw ConfigError("matrix is not square");
    }
    const double defect = unitarity_defect(u);
    if (!(defect <= tolerance)) {
        throw NumericalError("input is not unitary (defect " + std::to_string(defect) + ")");
    }
    Eigen::MatrixXcd t = u;
    Eigen::VectorXcd w(dim);
    Eigen::MatrixXcd z(dim, dim);
    lapack_int sdim = 0;
    const lapack_int info =
        LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, static_cast<lapack_int>(dim), t.data(),
                      static_cast<lapack_int>(dim), &sdim, w.data(), z.data(),
                      static_cast<lapack_int>(dim));
    if (info != 0) {
        throw NumericalError("Schur decomposition failed (info " + std::to_string(info) + ")");
    }

    FloquetSpectrum s;
    s.n_spins = std::bit_width(static_cast<std::size_t>(dim)) - 1;
    s.quasienergies.resize(dim);
    Eigen::VectorXcd phases(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        double phi = std::arg(w(k));
        if (phi <= -kPi) phi = kPi;
        s.quasienergies(k) = phi;
        phases(k) = std::polar(1.0, phi);
    }
    s.eigenvectors = std::move(z);
    const Eigen::MatrixXcd rebuilt =
        s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
    s.reconstruction_residual = (rebuilt - u).cwiseAbs().maxCoeff();
    s.metadata = {{"dimension", dim},
                  {"input_unitarity_defect", defect},
                  {"eigenvector_unitarity_defect", unitarity_defect(s.eigenvectors)},
                  {"reconstruction_residual", s.reconstruction_residual}};
    return s;
}

FloquetSpectrum diagonalize(const FloquetOperator& op, double tolerance) {
    FloquetSpectrum s = diagonalize(op.matrix, tolerance);
    s.metadata["operator"] = op.metadata;
    return s;
}

MatrixElementMap matrix_elements(const FloquetSpectrum& spectrum, Axis alpha, double threshold) {
    const Eigen::Index dim = spectrum.dimension();
    Eigen::MatrixXcd m_psi(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        apply_magnetization({spectrum.eigenvectors.col(k).data(), static_cast<std::size_t>(dim)},
                            spectrum.n_spins, alpha, column(m_psi, k));
    }
    const Eigen::MatrixXcd elements = spectrum.eigenvectors.adjoint() * m_psi;
    MatrixElementMap map;
    map.alpha = alpha;
    map.threshold = threshold;
    map.values = elements.cwiseAbs2();
    for (Eigen::Index k = 0; k < dim; ++k) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (map.values(j, k) > threshold) map.entries.push_back({j, k, map.values(j, k)});
        }
    }
    return map;
}

double reconstruct_response(const FloquetSpectrum& spectrum, const MatrixElementMap& map, int m) {
    if (m < 0) {
        throw ConfigError("period count must be non-negative");
    }
    const Eigen::ArrayXd arg = spectrum.quasienergies.array() * static_cast<double>(m);
    const Eigen::VectorXd c = arg.cos().matrix();
    const Eigen::VectorXd s = arg.sin().matrix();
    const Eigen::VectorXd wc = map.values * c;
    const Eigen::VectorXd ws = map.values * s;
    const double re = c.dot(wc) + s.dot(ws);
    const double im = s.dot(wc) - c.dot(ws);
    const double norm = 4.0 / (spectrum.n_spins * std::ldexp(1.0, spectrum.n_spins));
    if (std::abs(im) * norm > 1e-8) {
        throw NumericalError("reconstructed response has an imaginary part of " +
                             std::to_string(im * norm));
    }
    return re * norm;
}

std::vector<double> reconstruct_series(const FloquetSpectrum& spectrum, const MatrixElementMap& map,
                                       int m_max) {
    std::vector<double> out;
    for (int m = 0; m <= m_max; ++m) out.push_back(reconstruct_response(spectrum, map, m));
    return out;
}

double downfold(double delta) {
    double d = std::fmod(std::abs(delta), 2.0 * kPi);
    if (d > kPi) d = 2.0 * kPi - d;
    return d;
}

double QuasienergyHistogram::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

void QuasienergyHistogram::accumulate(const QuasienergyHistogram& other) {
    if (other.values.size() != values.size() || other.beta != beta) {
        throw ConfigError("histograms have different binning");
    }
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
}

void QuasienergyHistogram::scale(double factor) {
    for (double& v : values) v *= factor;
}

QuasienergyHistogram make_histogram(double beta) {
    const std::size_t bins = bin_count(beta);
    QuasienergyHistogram h;
    h.beta = beta;
    h.centers.resize(bins);
    h.values.assign(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i) h.centers[i] = 2.0 * beta * static_cast<double>(i);
    return h;
}

QuasienergyHistogram histogram_P(const FloquetSpectrum& spectrum, double beta) {
    QuasienergyHistogram h = make_histogram(beta);
    const std::size_t bins = h.values.size();
    const auto& phi = spectrum.quasienergies;
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
        for (Eigen::Index j = 0; j <= k; ++j) {
            h.values[bin_of(phi(j) - phi(k), beta, bins)] += 1.0;
        }
    }
    return h;
}

QuasienergyHistogram weighted_sigma(const FloquetSpectrum& spectrum, const MatrixElementMap& map,
                                    double beta) {
    QuasienergyHistogram h = make_histogram(beta);
    const std::size_t bins = h.values.size();
    const auto& phi = spectrum.quasienergies;
    double total = 0.0;
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
        for (Eigen::Index j = 0; j < phi.size(); ++j) {
            const double w = map.values(j, k);
            h.values[bin_of(phi(j) - phi(k), beta, bins)] += w;
            total += w;
        }
    }
    if (!(total > 0.0)) {
        throw NumericalError("matrix-element map has no weight");
    }
    h.scale(1.0 / (total * 2.0 * beta));
    return h;
}

double histogram_mass(const QuasienergyHistogram& h, double lo, double hi) {
    double s = 0.0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        if (h.centers[i] >= lo && h.centers[i] <= hi) s += h.values[i];
    }
    return s;
}

std::string quasienergies_csv(const FloquetSpectrum& spectrum) {
    std::string out = "index,phi\n";
    for (Eigen::Index k = 0; k < spectrum.dimension(); ++k) {
        out += std::to_string(k) + ',' + format_double(spectrum.quasienergies(k)) + '\n';
    }
    return out;
}

std::string matrix_map_csv(const FloquetSpectrum& spectrum, const MatrixElementMap& map) {
    std::string out = "phi_j,phi_k,value\n";
    for (const auto& e : map.entries) {
        out += format_double(spectrum.quasienergies(e.j)) + ',' +
               format_double(spectrum.quasienergies(e.k)) + ',' + format_double(e.value) + '\n';
    }
    return out;
}

std::string histogram_csv(const QuasienergyHistogram& h, bool keep_empty) {
    std::string out = "bin_center,value\n";
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        if (!keep_empty && h.values[i] == 0.0) continue;
        out += format_double(h.centers[i]) + ',' + format_double(h.values[i]) + '\n';
    }
    return out;
}

void write_eigenvectors(const std::filesystem::path& path, const FloquetSpectrum& spectrum) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    const auto dim = static_cast<std::uint64_t>(spectrum.dimension());
    std::string buf(2 * sizeof(std::uint64_t) + dim * dim * sizeof(Complex), '\0');
    std::memcpy(buf.data(), &dim, sizeof dim);
    std::memcpy(buf.data() + sizeof dim, &dim, sizeof dim);
    std::memcpy(buf.data() + 2 * sizeof dim, spectrum.eigenvectors.data(), dim * dim * sizeof(Complex));
    write_atomic(path, buf);
}

Eigen::MatrixXcd read_eigenvectors(const std::filesystem::path& path) {
    const std::string buf = read_text(path);
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    if (buf.size() < 2 * sizeof rows) throw IoError("eigenvector file too short");
    std::memcpy(&rows, buf.data(), sizeof rows);
    std::memcpy(&cols, buf.data() + sizeof rows, sizeof cols);
    if (buf.size() != 2 * sizeof rows + rows * cols * sizeof(Complex)) {
        throw IoError("eigenvector file size does not match its header");
    }
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::memcpy(m.data(), buf.data() + 2 * sizeof rows, rows * cols * sizeof(Complex));
    return m;
}

}  // namespace spinecho
