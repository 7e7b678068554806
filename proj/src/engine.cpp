#include "spinecho/engine.hpp"

#include "spinecho/error.hpp"
#include "spinecho/rng.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace spinecho {

namespace {

constexpr int kBlockBits = 12;
constexpr Complex kI{0.0, 1.0};

std::size_t dimension_of(int n_spins) { return std::size_t{1} << n_spins; }

void check_register(int n_spins) {
    if (n_spins < 1) {
        throw ConfigError("register needs at least one spin");
    }
    if (n_spins > kMaxStateSpins) {
        throw ResourceError("state vector of " + std::to_string(n_spins) +
                            " spins exceeds the engine limit of " + std::to_string(kMaxStateSpins));
    }
}

// Calls op(s0, s1, j) for every basis pair differing only in bit j (bit j of
// s0 is 0), for all j. Low bits are handled block by block to stay in cache.
template <class PairOp>
void for_each_bit_pair(int n_spins, PairOp&& op) {
    const std::size_t dim = dimension_of(n_spins);
    const int low = std::min(n_spins, kBlockBits);
    const std::size_t block = std::size_t{1} << low;
    for (std::size_t base = 0; base < dim; base += block) {
        for (int j = 0; j < low; ++j) {
            const std::size_t stride = std::size_t{1} << j;
            for (std::size_t hi = base; hi < base + block; hi += 2 * stride) {
                for (std::size_t s = hi; s < hi + stride; ++s) {
                    op(s, s + stride, j);
                }
            }
        }
    }
    for (int j = low; j < n_spins; ++j) {
        const std::size_t stride = std::size_t{1} << j;
        for (std::size_t hi = 0; hi < dim; hi += 2 * stride) {
            for (std::size_t s = hi; s < hi + stride; ++s) {
                op(s, s + stride, j);
            }
        }
    }
}

// Index with zero bits inserted at positions lo < hi.
inline std::size_t insert_two_zeros(std::size_t r, std::size_t lo, std::size_t hi) {
    r = ((r >> lo) << (lo + 1)) | (r & ((std::size_t{1} << lo) - 1));
    r = ((r >> hi) << (hi + 1)) | (r & ((std::size_t{1} << hi) - 1));
    return r;
}

struct Gate2 {
    Complex m00, m01, m10, m11;
    bool identity = false;
};

Gate2 rotation_gate(const SpinRotation& rot) {
    if (rot.angle == 0.0) {
        return {1.0, 0.0, 0.0, 1.0, true};
    }
    const double c = std::cos(0.5 * rot.angle);
    const double s = std::sin(0.5 * rot.angle);
    const Complex e_minus = std::polar(1.0, -rot.phase);
    const Complex e_plus = std::polar(1.0, rot.phase);
    return {c, -kI * s * e_minus, -kI * s * e_plus, c, false};
}

bool is_ideal_x_flip(std::span<const SpinRotation> rotations) {
    return std::all_of(rotations.begin(), rotations.end(), [](const SpinRotation& r) {
        return r.angle == std::numbers::pi && r.phase == 0.0;
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int n_spins) : n_spins_(n_spins) {
    check_register(n_spins);
    amp_.assign(dimension_of(n_spins), Complex{0.0, 0.0});
}

StateVector StateVector::basis(int n_spins, std::size_t index) {
    StateVector v(n_spins);
    if (index >= v.dimension()) {
        throw ConfigError("basis index out of range");
    }
    v.amp_[index] = 1.0;
    return v;
}

double StateVector::norm() const {
    double sum = 0.0;
    for (const auto& a : amp_) sum += std::norm(a);
    return std::sqrt(sum);
}

void StateVector::normalize() {
    const double n = norm();
    if (!(n > 0.0)) {
        throw NumericalError("cannot normalize a zero vector");
    }
    const double inv = 1.0 / n;
    for (auto& a : amp_) a *= inv;
}

Complex StateVector::dot(const StateVector& other) const {
    if (other.dimension() != dimension()) {
        throw ConfigError("state dimensions differ");
    }
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < amp_.size(); ++i) sum += std::conj(amp_[i]) * other.amp_[i];
    return sum;
}

StateVector random_state(int n_spins, std::uint64_t seed) {
    StateVector v(n_spins);
    Rng rng = make_rng(seed, 0, Stream::State);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& a : v.amplitudes()) {
        const double re = normal(rng);
        const double im = normal(rng);
        a = Complex{re, im};
    }
    v.normalize();
    return v;
}

// ---------------------------------------------------------------------------
// Single-spin operations

void apply_pulse(StateVector& state, std::span<const SpinRotation> rotations) {
    apply_pulse(state.amplitudes(), state.n_spins(), rotations);
}

void apply_pulse(std::span<Complex> psi, int n, std::span<const SpinRotation> rotations) {
    if (static_cast<int>(rotations.size()) != n || psi.size() != dimension_of(n)) {
        throw ConfigError("pulse has " + std::to_string(rotations.size()) + " rotations for " +
                          std::to_string(n) + " spins");
    }
    if (is_ideal_x_flip(rotations)) {
        // (-i sigma_x) on every spin: s -> ~s with phase (-i)^N.
        std::reverse(psi.begin(), psi.end());
        static constexpr Complex kPhases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
        const Complex phase = kPhases[n % 4];
        for (auto& a : psi) a *= phase;
        return;
    }
    std::vector<Gate2> gates;
    gates.reserve(rotations.size());
    for (const auto& r : rotations) gates.push_back(rotation_gate(r));
    Complex* p = psi.data();
    for_each_bit_pair(n, [&](std::size_t s0, std::size_t s1, int j) {
        const Gate2& g = gates[static_cast<std::size_t>(j)];
        if (g.identity) return;
        const Complex a = p[s0];
        const Complex b = p[s1];
        p[s0] = g.m00 * a + g.m01 * b;
        p[s1] = g.m10 * a + g.m11 * b;
    });
}

void apply_magnetization(const StateVector& in, Axis axis, StateVector& out) {
    if (out.n_spins() != in.n_spins()) {
        out = StateVector(in.n_spins());
    }
    apply_magnetization(in.amplitudes(), in.n_spins(), axis, out.amplitudes());
}

void apply_magnetization(std::span<const Complex> src, int n, Axis axis, std::span<Complex> dst) {
    if (src.size() != dimension_of(n) || dst.size() != src.size()) {
        throw ConfigError("vector size does not match the register");
    }
    switch (axis) {
        case Axis::Z:
            for (std::size_t s = 0; s < src.size(); ++s) {
                const double m = 0.5 * (n - 2 * std::popcount(s));
                dst[s] = m * src[s];
            }
            return;
        case Axis::X:
            std::fill(dst.begin(), dst.end(), Complex{0.0, 0.0});
            for_each_bit_pair(n, [&](std::size_t s0, std::size_t s1, int) {
                dst[s0] += 0.5 * src[s1];
                dst[s1] += 0.5 * src[s0];
            });
            return;
        case Axis::Y:
            std::fill(dst.begin(), dst.end(), Complex{0.0, 0.0});
            for_each_bit_pair(n, [&](std::size_t s0, std::size_t s1, int) {
                dst[s0] += Complex{0.0, -0.5} * src[s1];
                dst[s1] += Complex{0.0, 0.5} * src[s0];
            });
            return;
    }
}

Complex magnetization_element(const StateVector& bra, Axis axis, const StateVector& ket) {
    const int n = bra.n_spins();
    if (ket.n_spins() != n) {
        throw ConfigError("state dimensions differ");
    }
    auto b = bra.amplitudes();
    auto k = ket.amplitudes();
    Complex sum{0.0, 0.0};
    switch (axis) {
        case Axis::Z:
            for (std::size_t s = 0; s < b.size(); ++s) {
                const double m = 0.5 * (n - 2 * std::popcount(s));
                sum += m * std::conj(b[s]) * k[s];
            }
            return sum;
        case Axis::X:
            for_each_bit_pair(n, [&](std::size_t s0, std::size_t s1, int) {
                sum += std::conj(b[s0]) * k[s1] + std::conj(b[s1]) * k[s0];
            });
            return 0.5 * sum;
        case Axis::Y:
            for_each_bit_pair(n, [&](std::size_t s0, std::size_t s1, int) {
                sum += std::conj(b[s1]) * k[s0] - std::conj(b[s0]) * k[s1];
            });
            return Complex{0.0, 0.5} * sum;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Propagator

double spectral_bound(const SpinModel& model) {
    double bound = 0.0;
    for (const auto& t : model.local_terms) bound += 0.5 * std::abs(t.field);
    for (const auto& t : model.pair_terms) bound += 0.75 * std::abs(t.coupling);
    return 1.1 * bound;
}

struct Propagator::SectorData {
    struct Sector {
        std::vector<std::size_t> states;
        Eigen::MatrixXd vectors;
        Eigen::VectorXd energies;
    };
    std::vector<Sector> sectors;
};

Propagator::Propagator(SpinModel model, EvolutionPlan plan)
    : model_(std::move(model)), plan_(plan) {
    const int n = model_.n_spins;
    check_register(n);
    if (plan_.trotter_step < 0.0 || plan_.spectral_bound < 0.0 || plan_.chebyshev_order < 0) {
        throw ConfigError("invalid evolution plan");
    }

    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : model_.pair_terms) {
        if (t.i == t.j || t.i < 0 || t.j < 0 || t.i >= n || t.j >= n) {
            throw ConfigError("pair term indices out of range");
        }
        j(t.i, t.j) += t.coupling;
        j(t.j, t.i) += t.coupling;
    }
    Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    for (const auto& t : model_.local_terms) {
        if (t.j < 0 || t.j >= n) throw ConfigError("local term index out of range");
        h(t.j) += t.field;
    }

    // E(s) = sum_j h_j z_j / 2 + sum_{i<j} J_ij z_i z_j / 4, z = 1 - 2 bit.
    // Built by doubling: setting bit t on a state whose bits >= t are clear
    // shifts E by -h_t - (sum_{k<t} J_tk z_k + sum_{k>t} J_tk) / 2.
    const std::size_t dim = dimension_of(n);
    diagonal_.assign(dim, 0.0);
    diagonal_[0] = 0.5 * h.sum() + 0.125 * (j.sum());
    std::vector<double> lower_sum(dim / 2 + 1, 0.0);
    for (int t = 0; t < n; ++t) {
        const std::size_t half = std::size_t{1} << t;
        lower_sum[0] = 0.0;
        for (int k = 0; k < t; ++k) lower_sum[0] += j(t, k);
        for (int k = 0; k < t; ++k) {
            const std::size_t span = std::size_t{1} << k;
            for (std::size_t s = 0; s < span; ++s) lower_sum[s + span] = lower_sum[s] - 2.0 * j(t, k);
        }
        double upper = 0.0;
        for (int k = t + 1; k < n; ++k) upper += j(t, k);
        for (std::size_t s = 0; s < half; ++s) {
            diagonal_[s + half] = diagonal_[s] - h(t) - 0.5 * (lower_sum[s] + upper);
        }
    }

    if (model_.has_flip_flop()) {
        for (const auto& t : model_.pair_terms) {
            const auto lo = static_cast<std::size_t>(std::min(t.i, t.j));
            const auto hi = static_cast<std::size_t>(std::max(t.i, t.j));
            flip_flops_.push_back({lo, hi, -0.25 * t.coupling});
        }
    }
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

const std::vector<Complex>& Propagator::phase_table(double dt) {
    for (const auto& e : phase_cache_) {
        if (e.dt == dt) return e.phases;
    }
    if (phase_cache_.size() >= 4) {
        phase_cache_.erase(phase_cache_.begin());
    }
    PhaseEntry entry{dt, std::vector<Complex>(diagonal_.size())};
    for (std::size_t s = 0; s < diagonal_.size(); ++s) {
        entry.phases[s] = std::polar(1.0, -diagonal_[s] * dt);
    }
    phase_cache_.push_back(std::move(entry));
    return phase_cache_.back().phases;
}

void Propagator::evolve_diagonal(StateVector& state, double dt) {
    const auto& phases = phase_table(dt);
    auto psi = state.amplitudes();
    for (std::size_t s = 0; s < psi.size(); ++s) psi[s] *= phases[s];
}

void Propagator::apply_hamiltonian(std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != diagonal_.size() || out.size() != diagonal_.size()) {
        throw ConfigError("vector size does not match the model");
    }
    for (std::size_t s = 0; s < in.size(); ++s) out[s] = diagonal_[s] * in[s];
    const std::size_t quarter = in.size() / 4;
    for (const auto& ff : flip_flops_) {
        const std::size_t lo_mask = std::size_t{1} << ff.low_bit;
        const std::size_t hi_mask = std::size_t{1} << ff.high_bit;
        const double g = ff.amplitude;
        for (std::size_t r = 0; r < quarter; ++r) {
            const std::size_t base = insert_two_zeros(r, ff.low_bit, ff.high_bit);
            const std::size_t a = base | hi_mask;
            const std::size_t b = base | lo_mask;
            out[a] += g * in[b];
            out[b] += g * in[a];
        }
    }
}

void Propagator::sweep_flip_flops(std::span<Complex> psi, double dt, bool forward) const {
    const std::size_t quarter = psi.size() / 4;
    const std::size_t count = flip_flops_.size();
    for (std::size_t idx = 0; idx < count; ++idx) {
        const auto& ff = flip_flops_[forward ? idx : count - 1 - idx];
        const double c = std::cos(ff.amplitude * dt);
        const Complex minus_is{0.0, -std::sin(ff.amplitude * dt)};
        const std::size_t lo_mask = std::size_t{1} << ff.low_bit;
        const std::size_t hi_mask = std::size_t{1} << ff.high_bit;
        for (std::size_t r = 0; r < quarter; ++r) {
            const std::size_t base = insert_two_zeros(r, ff.low_bit, ff.high_bit);
            Complex& a = psi[base | hi_mask];
            Complex& b = psi[base | lo_mask];
            const Complex a0 = a;
            a = c * a0 + minus_is * b;
            b = minus_is * a0 + c * b;
        }
    }
}

void Propagator::evolve_trotter(StateVector& state, double duration) {
    const double step = plan_.trotter_step > 0.0 ? plan_.trotter_step
                                                 : duration / kDefaultTrotterDivisions;
    const auto steps =
        std::max<long>(1, static_cast<long>(std::ceil(duration / step - 1e-9)));
    const double dt = duration / static_cast<double>(steps);
    auto psi = state.amplitudes();
    evolve_diagonal(state, 0.5 * dt);
    for (long k = 0; k < steps; ++k) {
        sweep_flip_flops(psi, 0.5 * dt, true);
        sweep_flip_flops(psi, 0.5 * dt, false);
        evolve_diagonal(state, k + 1 < steps ? dt : 0.5 * dt);
    }
}

void Propagator::evolve_chebyshev(StateVector& state, double duration) {
    const double bound = plan_.spectral_bound > 0.0 ? plan_.spectral_bound : spectral_bound(model_);
    if (!(bound > 0.0)) {
        return;  // H = 0
    }
    constexpr double kMaxArgument = 40.0;
    const auto pieces =
        std::max<long>(1, static_cast<long>(std::ceil(bound * duration / kMaxArgument)));
    const double dt = duration / static_cast<double>(pieces);
    const double arg = bound * dt;

    std::vector<Complex> coeff;
    if (plan_.chebyshev_order > 0) {
        for (int k = 0; k < plan_.chebyshev_order; ++k) {
            coeff.push_back(std::cyl_bessel_j(static_cast<double>(k), arg) *
                            (k == 0 ? 1.0 : 2.0) * std::pow(-kI, k));
        }
    } else {
        for (int k = 0;; ++k) {
            const double jk = std::cyl_bessel_j(static_cast<double>(k), arg);
            if (k > arg && std::abs(jk) < 1e-17) break;
            coeff.push_back(jk * (k == 0 ? 1.0 : 2.0) * std::pow(-kI, k));
        }
    }

    const std::size_t dim = state.dimension();
    for (auto& s : scratch_) s.resize(dim);
    auto psi = state.amplitudes();
    const double inv = 1.0 / bound;
    const double initial_norm = state.norm();
    if (initial_norm == 0.0) {
        return;
    }

    for (long piece = 0; piece < pieces; ++piece) {
        std::vector<Complex>* prev = &scratch_[0];
        std::vector<Complex>* cur = &scratch_[1];
        std::vector<Complex>* tmp = &scratch_[2];
        std::copy(psi.begin(), psi.end(), prev->begin());
        for (std::size_t s = 0; s < dim; ++s) psi[s] = coeff[0] * (*prev)[s];
        if (coeff.size() > 1) {
            apply_hamiltonian(*prev, *cur);
            for (std::size_t s = 0; s < dim; ++s) {
                (*cur)[s] *= inv;
                psi[s] += coeff[1] * (*cur)[s];
            }
        }
        for (std::size_t k = 2; k < coeff.size(); ++k) {
            apply_hamiltonian(*cur, *tmp);
            double norm2 = 0.0;
            for (std::size_t s = 0; s < dim; ++s) {
                const Complex next = 2.0 * inv * (*tmp)[s] - (*prev)[s];
                (*prev)[s] = next;
                norm2 += std::norm(next);
                psi[s] += coeff[k] * next;
            }
            // |T_k(x)| <= 1 on [-1, 1]; growth means the bound is too small.
            if (norm2 > (1.0 + 1e-6) * initial_norm * initial_norm) {
                throw NumericalError("Chebyshev expansion diverged: spectral bound " +
                                     std::to_string(bound) + " is below the spectral radius");
            }
            std::swap(prev, cur);
        }
    }
    const double final_norm = state.norm();
    if (std::abs(final_norm - initial_norm) > 1e-8 * std::max(initial_norm, 1e-300)) {
        throw NumericalError("Chebyshev propagation lost unitarity (norm " +
                             std::to_string(initial_norm) + " -> " + std::to_string(final_norm) + ")");
    }
}

void Propagator::ensure_sectors() {
    const int n = model_.n_spins;
    if (n > kMaxExactSpins) {
        throw ResourceError("exact sector propagation is limited to " +
                            std::to_string(kMaxExactSpins) + " spins");
    }
    if (sectors_) return;
    sectors_ = std::make_unique<SectorData>();
    const std::size_t dim = diagonal_.size();
    std::vector<std::size_t> position(dim);
    sectors_->sectors.resize(static_cast<std::size_t>(n) + 1);
    for (std::size_t s = 0; s < dim; ++s) {
        auto& sec = sectors_->sectors[static_cast<std::size_t>(std::popcount(s))];
        position[s] = sec.states.size();
        sec.states.push_back(s);
    }
    for (auto& sec : sectors_->sectors) {
        const auto size = static_cast<Eigen::Index>(sec.states.size());
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
        for (Eigen::Index a = 0; a < size; ++a) {
            const std::size_t s = sec.states[static_cast<std::size_t>(a)];
            h(a, a) = diagonal_[s];
            for (const auto& ff : flip_flops_) {
                const bool lo = (s >> ff.low_bit) & 1U;
                const bool hi = (s >> ff.high_bit) & 1U;
                if (lo != hi) {
                    const std::size_t t = s ^ ((std::size_t{1} << ff.low_bit) |
                                               (std::size_t{1} << ff.high_bit));
                    h(a, static_cast<Eigen::Index>(position[t])) += ff.amplitude;
                }
            }
        }
        sec.energies.resize(size);
        const lapack_int info =
            LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(size), h.data(),
                           static_cast<lapack_int>(size), sec.energies.data());
        if (info != 0) {
            throw NumericalError("sector diagonalization failed");
        }
        sec.vectors = std::move(h);
    }
}

std::vector<SectorBlock> Propagator::sector_propagators(double dt) {
    ensure_sectors();
    std::vector<SectorBlock> out;
    for (const auto& sec : sectors_->sectors) {
        const Eigen::VectorXcd phases = (sec.energies * Complex{0.0, -dt}).array().exp();
        const Eigen::MatrixXcd v = sec.vectors.cast<Complex>();
        out.push_back({sec.states, v * phases.asDiagonal() * v.transpose()});
    }
    return out;
}

void Propagator::evolve_exact(StateVector& state, double duration) {
    // V e^{-iEt} V^T x in the sector eigenbasis; as cheap as a cached dense
    // propagator and needs no O(d^3) build for every new duration.
    ensure_sectors();
    auto psi = state.amplitudes();
    for (const auto& sec : sectors_->sectors) {
        const auto size = static_cast<Eigen::Index>(sec.states.size());
        // Interleaved (re, im) rows: X is 2 x size.
        Eigen::Matrix2Xd x(2, size);
        for (Eigen::Index a = 0; a < size; ++a) {
            const Complex z = psi[sec.states[static_cast<std::size_t>(a)]];
            x(0, a) = z.real();
            x(1, a) = z.imag();
        }
        Eigen::Matrix2Xd c = x * sec.vectors;
        for (Eigen::Index a = 0; a < size; ++a) {
            const Complex z = Complex(c(0, a), c(1, a)) * std::polar(1.0, -sec.energies(a) * duration);
            c(0, a) = z.real();
            c(1, a) = z.imag();
        }
        x.noalias() = c * sec.vectors.transpose();
        for (Eigen::Index a = 0; a < size; ++a) {
            psi[sec.states[static_cast<std::size_t>(a)]] = Complex(x(0, a), x(1, a));
        }
    }
}

void Propagator::evolve(StateVector& state, double duration) {
    if (state.n_spins() != model_.n_spins) {
        throw ConfigError("state and model sizes differ");
    }
    if (!(duration >= 0.0)) {
        throw ConfigError("evolution duration must be non-negative");
    }
    if (duration == 0.0) {
        return;
    }
    // A diagonal Hamiltonian is propagated exactly by its phases.
    if (flip_flops_.empty()) {
        evolve_diagonal(state, duration);
        return;
    }
    switch (plan_.method) {
        case EvolutionMethod::Chebyshev:
            evolve_chebyshev(state, duration);
            return;
        case EvolutionMethod::Trotter2:
            evolve_trotter(state, duration);
            return;
        case EvolutionMethod::Exact:
            evolve_exact(state, duration);
            return;
    }
}

double converged_trotter_step(const SpinModel& model, double interval, double tolerance,
                              int max_halvings) {
    if (!(interval > 0.0) || !(tolerance > 0.0)) {
        throw ConfigError("interval and tolerance must be positive");
    }
    // Observable: the normalized typicality element recorded after one interval.
    const StateVector r = random_state(model.n_spins, 0x7e577e57ULL);
    StateVector a;
    apply_magnetization(r, Axis::X, a);
    const double norm = a.dot(a).real();
    auto observe = [&](double step) {
        Propagator p(model, {EvolutionMethod::Trotter2, step});
        StateVector ur = r;
        StateVector ua = a;
        p.evolve(ur, interval);
        p.evolve(ua, interval);
        return magnetization_element(ur, Axis::X, ua).real() / norm;
    };
    double step = interval / kDefaultTrotterDivisions;
    double coarse = observe(step);
    for (int k = 0; k < max_halvings; ++k) {
        const double fine = observe(0.5 * step);
        if (std::abs(fine - coarse) < tolerance) {
            return step;
        }
        step *= 0.5;
        coarse = fine;
    }
    throw NumericalError("Trotter step did not converge");
}

StateVector evolve(StateVector state, const SpinModel& model, double duration,
                   const EvolutionPlan& plan) {
    Propagator p(model, plan);
    p.evolve(state, duration);
    return state;
}

// ---------------------------------------------------------------------------
// Schedules and typicality

void Schedule::evolve(double duration) {
    if (duration > 0.0) {
        events.push_back({ScheduleEvent::Kind::Evolve, duration, 0, 0.0});
    }
}

void Schedule::pulse(std::size_t index) {
    events.push_back({ScheduleEvent::Kind::Pulse, 0.0, index, 0.0});
}

void Schedule::record(double time) {
    events.push_back({ScheduleEvent::Kind::Record, 0.0, 0, time});
}

void Schedule::restart() { events.push_back({ScheduleEvent::Kind::Restart, 0.0, 0, 0.0}); }

std::vector<double> Schedule::record_times() const {
    std::vector<double> t;
    for (const auto& e : events) {
        if (e.kind == ScheduleEvent::Kind::Record) t.push_back(e.time);
    }
    return t;
}

Schedule cpmg_schedule(const SequenceSpec& spec) {
    spec.validate();
    if (spec.kind == SequenceKind::Hahn) {
        return hahn_schedule(spec.record_times);
    }
    Schedule s;
    s.record(0.0);
    const int sub = spec.points_per_interval + 1;
    const double piece = spec.tau / sub;
    auto half_interval = [&](double start) {
        for (int m = 1; m < sub; ++m) {
            s.evolve(piece);
            s.record(start + m * piece);
        }
        s.evolve(piece);
    };
    for (int n = 0; n < spec.n_pulses; ++n) {
        half_interval(2.0 * n * spec.tau);
        s.pulse(static_cast<std::size_t>(n));
        half_interval((2.0 * n + 1.0) * spec.tau);
        s.record(2.0 * (n + 1) * spec.tau);
    }
    return s;
}

Schedule hahn_schedule(std::span<const double> total_times) {
    Schedule s;
    s.record(0.0);
    for (double t : total_times) {
        if (!(t > 0.0)) {
            throw ConfigError("Hahn total times must be positive");
        }
        s.restart();
        s.evolve(0.5 * t);
        s.pulse(0);
        s.evolve(0.5 * t);
        s.record(t);
    }
    return s;
}

Eigen::MatrixXd response_estimate(Propagator& propagator, const PulseTrain& pulses,
                                  const Schedule& schedule, std::span<const Axis> channels,
                                  std::uint64_t seed) {
    const int n = propagator.model().n_spins;
    if (pulses.n_spins() != n) {
        throw ConfigError("pulse train and model sizes differ");
    }
    StateVector r = random_state(n, seed);
    std::vector<StateVector> a(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
        apply_magnetization(r, channels[c], a[c]);
    }
    const bool restarts = std::any_of(schedule.events.begin(), schedule.events.end(), [](const auto& e) {
        return e.kind == ScheduleEvent::Kind::Restart;
    });
    const StateVector r0 = restarts ? r : StateVector{};
    const std::vector<StateVector> a0 = restarts ? a : std::vector<StateVector>{};

    const double scale = std::ldexp(1.0, n);
    const auto n_records = static_cast<Eigen::Index>(schedule.record_times().size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(channels.size()), n_records);
    Eigen::Index record = 0;
    for (const auto& e : schedule.events) {
        switch (e.kind) {
            case ScheduleEvent::Kind::Evolve:
                propagator.evolve(r, e.duration);
                for (auto& v : a) propagator.evolve(v, e.duration);
                break;
            case ScheduleEvent::Kind::Pulse: {
                const auto rot = pulses.rotations(e.pulse_index);
                apply_pulse(r, rot);
                for (auto& v : a) apply_pulse(v, rot);
                break;
            }
            case ScheduleEvent::Kind::Record:
                for (std::size_t c = 0; c < channels.size(); ++c) {
                    out(static_cast<Eigen::Index>(c), record) =
                        scale * magnetization_element(r, channels[c], a[c]).real();
                }
                ++record;
                break;
            case ScheduleEvent::Kind::Restart:
                r = r0;
                a = a0;
                break;
        }
    }
    return out;
}

}  // namespace spinecho
