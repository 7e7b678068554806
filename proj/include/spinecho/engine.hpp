#pragma once

#include "spinecho/model.hpp"
#include "spinecho/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace spinecho {

/// Largest register the state-vector engine will allocate.
inline constexpr int kMaxStateSpins = 28;

/// 2^N amplitudes indexed by the computational-basis bitstring. Bit j of the
/// index is spin j; bit value 0 is spin up (S_z = +1/2).
class StateVector {
public:
    StateVector() = default;
    /// Zero vector of the given register size.
    explicit StateVector(int n_spins);

    static StateVector basis(int n_spins, std::size_t index);

    [[nodiscard]] int n_spins() const { return n_spins_; }
    [[nodiscard]] std::size_t dimension() const { return amp_.size(); }

    [[nodiscard]] std::span<Complex> amplitudes() { return amp_; }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amp_; }
    Complex& operator[](std::size_t i) { return amp_[i]; }
    const Complex& operator[](std::size_t i) const { return amp_[i]; }

    [[nodiscard]] double norm() const;
    void normalize();
    /// <this|other>
    [[nodiscard]] Complex dot(const StateVector& other) const;

private:
    int n_spins_ = 0;
    std::vector<Complex> amp_;
};

/// Haar-random unit vector: i.i.d. complex Gaussians, normalized.
StateVector random_state(int n_spins, std::uint64_t seed);

enum class EvolutionMethod {
    /// Symmetric split: diagonal part exact, flip-flop pair gates swept i<j then back.
    Trotter2,
    /// Chebyshev expansion of exp(-i H t) on [-bound, bound].
    Chebyshev,
    /// Dense diagonalization inside each total-M_z sector (small registers only).
    Exact,
};

/// Models without flip-flop terms are always propagated by exact diagonal phases.
struct EvolutionPlan {
    EvolutionMethod method = EvolutionMethod::Chebyshev;
    /// Trotter step; 0 selects interval / kDefaultTrotterDivisions.
    double trotter_step = 0.0;
    /// Chebyshev terms per sub-interval; 0 selects the order automatically.
    int chebyshev_order = 0;
    /// Chebyshev spectral bound; 0 selects spectral_bound(model).
    double spectral_bound = 0.0;
};

inline constexpr int kDefaultTrotterDivisions = 256;
inline constexpr int kMaxExactSpins = 14;

/// Halves interval / kDefaultTrotterDivisions until the normalized M_x
/// typicality element after one interval changes by less than `tolerance`.
/// Returns the coarser step of the converged pair.
double converged_trotter_step(const SpinModel& model, double interval, double tolerance = 1e-6,
                              int max_halvings = 12);

/// (sum_j |h_j| / 2 + (3/4) sum_{i<j} |J_ij|) * 1.1, never below the spectral radius.
double spectral_bound(const SpinModel& model);

/// exp(-i H dt) restricted to one total-M_z sector: rows/columns are `states`.
struct SectorBlock {
    std::vector<std::size_t> states;
    Eigen::MatrixXcd propagator;
};

/// Propagates states under a fixed SpinModel. Caches phase tables and sector
/// eigensystems, so one instance is used by one thread at a time.
class Propagator {
public:
    explicit Propagator(SpinModel model, EvolutionPlan plan = {});
    ~Propagator();
    Propagator(Propagator&&) noexcept;
    Propagator& operator=(Propagator&&) noexcept;

    /// state <- exp(-i H duration) state.
    void evolve(StateVector& state, double duration);

    /// out = H in.
    void apply_hamiltonian(std::span<const Complex> in, std::span<Complex> out) const;

    /// Diagonal of H in the computational basis.
    [[nodiscard]] const std::vector<double>& diagonal() const { return diagonal_; }

    /// Dense sector blocks of exp(-i H dt); limited to kMaxExactSpins.
    std::vector<SectorBlock> sector_propagators(double dt);
    [[nodiscard]] const SpinModel& model() const { return model_; }
    [[nodiscard]] const EvolutionPlan& plan() const { return plan_; }

private:
    struct FlipFlop {
        std::size_t low_bit;
        std::size_t high_bit;
        double amplitude;  // <..0_i..1_j..|H|..1_i..0_j..> = -J/4
    };
    struct SectorData;

    void evolve_diagonal(StateVector& state, double dt);
    void evolve_trotter(StateVector& state, double duration);
    void evolve_chebyshev(StateVector& state, double duration);
    void evolve_exact(StateVector& state, double duration);
    void ensure_sectors();
    void sweep_flip_flops(std::span<Complex> psi, double dt, bool forward) const;
    const std::vector<Complex>& phase_table(double dt);

    SpinModel model_;
    EvolutionPlan plan_;
    std::vector<double> diagonal_;
    std::vector<FlipFlop> flip_flops_;
    struct PhaseEntry {
        double dt;
        std::vector<Complex> phases;
    };
    std::vector<PhaseEntry> phase_cache_;
    std::vector<Complex> scratch_[3];
    std::unique_ptr<SectorData> sectors_;
};

/// Convenience wrapper constructing a Propagator for one call.
StateVector evolve(StateVector state, const SpinModel& model, double duration,
                   const EvolutionPlan& plan = {});

/// Product of single-spin rotations, one per spin.
void apply_pulse(StateVector& state, std::span<const SpinRotation> rotations);
/// Same on raw amplitudes of an n_spins register.
void apply_pulse(std::span<Complex> amplitudes, int n_spins,
                 std::span<const SpinRotation> rotations);

/// out = M_alpha in, with M_alpha = sum_j S_j,alpha.
void apply_magnetization(const StateVector& in, Axis axis, StateVector& out);
void apply_magnetization(std::span<const Complex> in, int n_spins, Axis axis,
                         std::span<Complex> out);

/// <bra| M_alpha |ket>
Complex magnetization_element(const StateVector& bra, Axis axis, const StateVector& ket);

/// Sequence of operations executed identically on every co-propagated vector.
struct ScheduleEvent {
    enum class Kind { Evolve, Pulse, Record, Restart };
    Kind kind = Kind::Evolve;
    double duration = 0.0;       // Evolve
    std::size_t pulse_index = 0; // Pulse
    double time = 0.0;           // Record
};

struct Schedule {
    std::vector<ScheduleEvent> events;

    void evolve(double duration);
    void pulse(std::size_t index);
    void record(double time);
    /// Return every vector to its initial value (clock back to 0).
    void restart();

    [[nodiscard]] std::vector<double> record_times() const;
};

/// CPMG/APCP train: record at 0, optional interior samples, and an echo at every 2 n tau.
Schedule cpmg_schedule(const SequenceSpec& spec);

/// One independent single-pulse experiment per total time t (pulse index 0 at t/2).
Schedule hahn_schedule(std::span<const double> total_times);

/// Typicality estimate of Tr[M_a U(t) M_a U(t)^dagger] for every channel a and
/// record: draws |r>, forms |a> = M_a |r>, runs the schedule on all vectors and
/// records 2^N Re <U r| M_a |U a>. Rows are channels, columns are records.
Eigen::MatrixXd response_estimate(Propagator& propagator, const PulseTrain& pulses,
                                  const Schedule& schedule, std::span<const Axis> channels,
                                  std::uint64_t seed);

}  // namespace spinecho
