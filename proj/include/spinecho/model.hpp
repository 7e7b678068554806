#pragma once

#include "spinecho/disorder.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace spinecho {

/// Full: secular dipolar (J/2)(2 S_iz S_jz - S_ix S_jx - S_iy S_jy).
/// Reduced: Ising J S_iz S_jz (flip-flop terms dropped).
enum class ModelVariant { Full, Reduced };

struct PairTerm {
    int i = 0;
    int j = 0;
    double coupling = 0.0;
};

struct LocalTerm {
    int j = 0;
    double field = 0.0;
};

/// Rotating-frame Hamiltonian H = sum_pairs H_ij + sum_j h_j S_jz.
struct SpinModel {
    int n_spins = 0;
    ModelVariant variant = ModelVariant::Full;
    std::vector<PairTerm> pair_terms;
    std::vector<LocalTerm> local_terms;

    [[nodiscard]] bool has_flip_flop() const { return variant == ModelVariant::Full; }
};

SpinModel build_model(const DisorderRealization& realization, ModelVariant variant);

/// Builds a model directly from a coupling matrix and a field vector.
/// Pairs with zero coupling are omitted.
SpinModel build_model(const Eigen::MatrixXd& couplings, const Eigen::VectorXd& fields,
                      ModelVariant variant);

enum class EpsilonPolicyKind { Uniform, PerSpinConstant, PerPulseRandom };

/// Pulse over-rotation: each pulse rotates by pi (1 + eps).
struct EpsilonPolicy {
    EpsilonPolicyKind kind = EpsilonPolicyKind::Uniform;
    /// Value for Uniform.
    double epsilon = 0.0;
    /// Interval for the random policies.
    double lower = -0.07;
    double upper = 0.07;

    static EpsilonPolicy uniform(double eps) { return {EpsilonPolicyKind::Uniform, eps}; }
    static EpsilonPolicy per_spin(double lo = -0.07, double hi = 0.07) {
        return {EpsilonPolicyKind::PerSpinConstant, 0.0, lo, hi};
    }
    static EpsilonPolicy per_pulse(double lo = -0.07, double hi = 0.07) {
        return {EpsilonPolicyKind::PerPulseRandom, 0.0, lo, hi};
    }
};

enum class AxisPolicy { PlusX, AlternatingX, PerSpinRandomFixed };

struct PulseModel {
    EpsilonPolicy epsilon;
    AxisPolicy axis = AxisPolicy::PlusX;
    std::uint64_t seed = 0;

    static PulseModel ideal() { return {}; }

    /// True when every pulse is the same operator (a Floquet operator exists).
    [[nodiscard]] bool is_periodic() const {
        return epsilon.kind != EpsilonPolicyKind::PerPulseRandom && axis != AxisPolicy::AlternatingX;
    }
};

/// Instantaneous rotation of one spin by `angle` about the in-plane axis
/// (cos phase, sin phase, 0).
struct SpinRotation {
    double phase = 0.0;
    double angle = 0.0;
};

/// Per-spin rotations of every pulse in a train. Per-spin random quantities are
/// drawn once on construction; per-pulse quantities are counter-based in
/// (seed, pulse_index), so rotations(p) does not depend on call order.
class PulseTrain {
public:
    PulseTrain(const PulseModel& model, int n_spins);

    [[nodiscard]] std::vector<SpinRotation> rotations(std::size_t pulse_index) const;
    [[nodiscard]] const PulseModel& model() const { return model_; }
    [[nodiscard]] int n_spins() const { return n_spins_; }

private:
    PulseModel model_;
    int n_spins_;
    std::vector<double> spin_epsilon_;
    std::vector<double> spin_phase_;
};

std::vector<SpinRotation> pulse_angles(const PulseModel& model, int n_spins,
                                       std::size_t pulse_index);

enum class SequenceKind { Hahn, CPMG, APCP };

/// CPMG/APCP: pulses at (2n+1) tau, echoes at 2 n tau.
/// Hahn: one pulse at t/2 for every requested total time t in record_times.
struct SequenceSpec {
    SequenceKind kind = SequenceKind::CPMG;
    double tau = 0.07;
    int n_pulses = 1;
    std::vector<double> record_times;
    /// Extra equally spaced samples inside each free-evolution interval.
    int points_per_interval = 0;

    void validate() const;
    [[nodiscard]] std::vector<double> pulse_times() const;
    [[nodiscard]] std::vector<double> echo_times() const;
};

}  // namespace spinecho
