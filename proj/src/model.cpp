#include "spinecho/model.hpp"

#include "spinecho/error.hpp"
#include "spinecho/rng.hpp"

#include <numbers>
#include <random>

namespace spinecho {

SpinModel build_model(const Eigen::MatrixXd& couplings, const Eigen::VectorXd& fields,
                      ModelVariant variant) {
    const auto n = static_cast<int>(fields.size());
    if (couplings.rows() != n || couplings.cols() != n) {
        throw ConfigError("coupling matrix does not match the number of spins");
    }
    SpinModel model;
    model.n_spins = n;
    model.variant = variant;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (couplings(i, j) != 0.0) {
                model.pair_terms.push_back({i, j, couplings(i, j)});
            }
        }
    }
    for (int j = 0; j < n; ++j) {
        model.local_terms.push_back({j, fields(j)});
    }
    return model;
}

SpinModel build_model(const DisorderRealization& realization, ModelVariant variant) {
    return build_model(realization.couplings, realization.fields, variant);
}

PulseTrain::PulseTrain(const PulseModel& model, int n_spins) : model_(model), n_spins_(n_spins) {
    if (n_spins < 1) {
        throw ConfigError("pulse train needs at least one spin");
    }
    if (model.epsilon.kind != EpsilonPolicyKind::Uniform &&
        !(model.epsilon.lower <= model.epsilon.upper)) {
        throw ConfigError("epsilon interval is empty");
    }
    const auto n = static_cast<std::size_t>(n_spins);
    spin_epsilon_.assign(n, model.epsilon.epsilon);
    spin_phase_.assign(n, 0.0);

    Rng rng = make_rng(model.seed, 0, Stream::PulseSpin);
    if (model.epsilon.kind == EpsilonPolicyKind::PerSpinConstant) {
        std::uniform_real_distribution<double> dist(model.epsilon.lower, model.epsilon.upper);
        for (auto& e : spin_epsilon_) e = dist(rng);
    }
    if (model.axis == AxisPolicy::PerSpinRandomFixed) {
        std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
        for (auto& p : spin_phase_) p = dist(rng);
    }
}

std::vector<SpinRotation> PulseTrain::rotations(std::size_t pulse_index) const {
    constexpr double pi = std::numbers::pi;
    std::vector<SpinRotation> out(static_cast<std::size_t>(n_spins_));

    double shared_epsilon = 0.0;
    if (model_.epsilon.kind == EpsilonPolicyKind::PerPulseRandom) {
        const auto key = derive_seed(model_.seed, pulse_index, Stream::PulseTime);
        const double u = counter_uniform(key);
        shared_epsilon = model_.epsilon.lower + u * (model_.epsilon.upper - model_.epsilon.lower);
    }
    const double alternating_phase =
        (model_.axis == AxisPolicy::AlternatingX && pulse_index % 2 == 1) ? pi : 0.0;

    for (std::size_t j = 0; j < out.size(); ++j) {
        const double eps = model_.epsilon.kind == EpsilonPolicyKind::PerPulseRandom
                               ? shared_epsilon
                               : spin_epsilon_[j];
        out[j].angle = pi * (1.0 + eps);
        out[j].phase = model_.axis == AxisPolicy::PerSpinRandomFixed ? spin_phase_[j]
                                                                     : alternating_phase;
    }
    return out;
}

std::vector<SpinRotation> pulse_angles(const PulseModel& model, int n_spins,
                                       std::size_t pulse_index) {
    return PulseTrain(model, n_spins).rotations(pulse_index);
}

void SequenceSpec::validate() const {
    if (kind == SequenceKind::Hahn) {
        if (record_times.empty()) {
            throw ConfigError("Hahn sequence needs at least one total time");
        }
        for (double t : record_times) {
            if (!(t > 0.0)) throw ConfigError("Hahn total times must be positive");
        }
        return;
    }
    if (!(tau > 0.0)) {
        throw ConfigError("tau must be positive");
    }
    if (n_pulses < 1) {
        throw ConfigError("n_pulses must be >= 1");
    }
    if (points_per_interval < 0) {
        throw ConfigError("points_per_interval must be >= 0");
    }
}

std::vector<double> SequenceSpec::pulse_times() const {
    std::vector<double> t;
    if (kind == SequenceKind::Hahn) {
        for (double total : record_times) t.push_back(0.5 * total);
        return t;
    }
    for (int n = 0; n < n_pulses; ++n) t.push_back((2 * n + 1) * tau);
    return t;
}

std::vector<double> SequenceSpec::echo_times() const {
    if (kind == SequenceKind::Hahn) {
        return record_times;
    }
    std::vector<double> t;
    for (int n = 1; n <= n_pulses; ++n) t.push_back(2 * n * tau);
    return t;
}

}  // namespace spinecho
