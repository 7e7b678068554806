#include "spinecho/disorder.hpp"

#include "spinecho/closedform.hpp"
#include "spinecho/error.hpp"
#include "spinecho/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace spinecho {

void EnsembleConfig::validate() const {
    if (n_spins < 1) {
        throw ConfigError("n_spins must be >= 1");
    }
    if (density && !(*density > 0.0)) {
        throw ConfigError("density must be positive");
    }
    if (d.is_infinite() && density) {
        throw ConfigError("d = inf has uniform couplings; a density cannot be given");
    }
    if (!(target_t2 > 0.0)) {
        throw ConfigError("target_t2 must be positive");
    }
    // field_sigma = 0 is accepted as the degenerate zero-field limit.
    if (!(field_sigma >= 0.0) || !std::isfinite(field_sigma)) {
        throw ConfigError("field_sigma must be non-negative");
    }
}

double EnsembleConfig::edge_length() const {
    if (d.is_infinite()) {
        throw UnsupportedGeometry("d = inf has no sample geometry");
    }
    if (!density) {
        throw ConfigError("density is not set; calibrate it first");
    }
    return std::pow(static_cast<double>(n_spins) / *density, 1.0 / d.value());
}

namespace {

Eigen::MatrixXd draw_unit_positions(Rng& rng, int n, int d) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Eigen::MatrixXd pos(n, d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            pos(i, k) = uniform(rng);
        }
    }
    return pos;
}

double min_pair_distance(const Eigen::MatrixXd& pos) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < pos.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < pos.rows(); ++j) {
            best = std::min(best, (pos.row(i) - pos.row(j)).norm());
        }
    }
    return best;
}

// Unit-cube positions of realization `index`, redrawn from the same stream
// until no pair is closer than kMinSeparationFraction.
Eigen::MatrixXd accepted_unit_positions(const EnsembleConfig& config, std::uint64_t index) {
    Rng rng = make_rng(config.seed, index, Stream::Positions);
    const int d = config.d.value();
    for (;;) {
        Eigen::MatrixXd pos = draw_unit_positions(rng, config.n_spins, d);
        if (min_pair_distance(pos) >= kMinSeparationFraction) {
            return pos;
        }
    }
}

// Geometry-only view of an ensemble. Positions are stored in the unit cube, so
// J scales as L^-3 and the echo time as L^3 for every realization at once.
class UnitEchoEnsemble {
public:
    UnitEchoEnsemble(const EnsembleConfig& config, int n_realizations, std::uint64_t seed) {
        EnsembleConfig unit = config;
        unit.seed = seed;
        couplings_.reserve(static_cast<std::size_t>(n_realizations));
        for (int r = 0; r < n_realizations; ++r) {
            couplings_.push_back(
                compute_couplings(accepted_unit_positions(unit, static_cast<std::uint64_t>(r)), unit));
        }
        unit_t2_ = crossing_time();
    }

    [[nodiscard]] double t2_for_edge(double edge) const { return unit_t2_ * edge * edge * edge; }

private:
    [[nodiscard]] double echo(double t) const {
        double sum = 0.0;
        for (const auto& j : couplings_) {
            sum += reduced_hahn_product(j, t);
        }
        return sum / static_cast<double>(couplings_.size());
    }

    [[nodiscard]] double crossing_time() const {
        const double target = std::exp(-1.0);
        double lo = 0.0;
        double hi = 1e-8;
        while (echo(hi) > target) {
            lo = hi;
            hi *= 1.25;
            if (hi > 1e12) {
                throw NumericalError("Hahn echo never reaches 1/e");
            }
        }
        for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (echo(mid) > target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    std::vector<Eigen::MatrixXd> couplings_;
    double unit_t2_ = 0.0;
};

}  // namespace

Eigen::MatrixXd sample_positions(const EnsembleConfig& config, std::uint64_t index) {
    config.validate();
    if (config.d.is_infinite()) {
        throw UnsupportedGeometry("positions are undefined for d = inf");
    }
    Rng rng = make_rng(config.seed, index, Stream::Positions);
    return config.edge_length() * draw_unit_positions(rng, config.n_spins, config.d.value());
}

Eigen::MatrixXd compute_couplings(const Eigen::MatrixXd& positions, const EnsembleConfig& config,
                                  double min_separation) {
    if (config.d.is_infinite()) {
        throw UnsupportedGeometry("positional couplings are undefined for d = inf");
    }
    const Eigen::Index n = positions.rows();
    const bool perpendicular = config.d.value() == 2 && config.axis_mode == AxisMode::NormalToPlane;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const Eigen::RowVectorXd sep = positions.row(a) - positions.row(b);
            const double r = sep.norm();
            if (!(r > min_separation) || r == 0.0) {
                throw DegenerateGeometry("spins " + std::to_string(a) + " and " +
                                         std::to_string(b) + " coincide");
            }
            const double cos_theta = perpendicular ? 0.0 : sep(0) / r;
            const double value = (1.0 - 3.0 * cos_theta * cos_theta) / (r * r * r);
            j(a, b) = value;
            j(b, a) = value;
        }
    }
    return j;
}

double couplings_infinite_d(int n_spins, double target_t2) {
    if (n_spins < 2) {
        throw ConfigError("a single spin has no coupling to calibrate");
    }
    if (!(target_t2 > 0.0)) {
        throw ConfigError("target_t2 must be positive");
    }
    // (N_s - 1) ln cos(2 J T2) = -1, first root on 2 J T2 in (0, pi/2).
    const double x = std::acos(std::exp(-1.0 / (n_spins - 1)));
    return x / (2.0 * target_t2);
}

Eigen::VectorXd sample_fields(const EnsembleConfig& config, std::uint64_t index) {
    config.validate();
    Rng rng = make_rng(config.seed, index, Stream::Fields);
    const int n = config.n_spins;
    const double sigma = config.field_sigma;
    Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    if (sigma == 0.0) {
        return h;
    }
    switch (config.field_distribution) {
        case FieldDistribution::Gaussian: {
            std::normal_distribution<double> dist(0.0, sigma);
            for (int j = 0; j < n; ++j) h(j) = dist(rng);
            break;
        }
        case FieldDistribution::Lorentzian: {
            std::cauchy_distribution<double> dist(0.0, sigma);
            for (int j = 0; j < n; ++j) h(j) = dist(rng);
            break;
        }
        case FieldDistribution::Exponential: {
            // Two-sided (Laplace) with variance sigma^2.
            std::exponential_distribution<double> dist(std::sqrt(2.0) / sigma);
            std::bernoulli_distribution sign(0.5);
            for (int j = 0; j < n; ++j) {
                const double magnitude = dist(rng);
                h(j) = sign(rng) ? magnitude : -magnitude;
            }
            break;
        }
    }
    return h;
}

DisorderRealization make_realization(const EnsembleConfig& config, std::uint64_t index) {
    config.validate();
    DisorderRealization r;
    r.config = config;
    r.seed = config.seed;
    r.index = index;
    const int n = config.n_spins;
    if (config.d.is_infinite()) {
        r.couplings = Eigen::MatrixXd::Zero(n, n);
        if (n >= 2) {
            const double pair = infinite_d_pair_coupling(couplings_infinite_d(n, config.target_t2));
            r.couplings.setConstant(pair);
            r.couplings.diagonal().setZero();
        }
        r.positions = Eigen::MatrixXd(n, 0);
    } else {
        const double edge = config.edge_length();
        r.positions = edge * accepted_unit_positions(config, index);
        r.couplings = compute_couplings(r.positions, config);
    }
    r.fields = sample_fields(config, index);
    return r;
}

double simulated_hahn_t2(const EnsembleConfig& config, double density, int n_realizations,
                         std::uint64_t seed) {
    if (config.d.is_infinite()) {
        throw UnsupportedGeometry("d = inf has no density");
    }
    if (n_realizations < 1) {
        throw ConfigError("n_realizations must be >= 1");
    }
    const UnitEchoEnsemble ensemble(config, n_realizations, seed);
    const double edge = std::pow(config.n_spins / density, 1.0 / config.d.value());
    return ensemble.t2_for_edge(edge);
}

CalibrationResult calibrate_density(const EnsembleConfig& config, const CalibrationOptions& options) {
    config.validate();
    if (config.d.is_infinite()) {
        throw UnsupportedGeometry("d = inf is calibrated through couplings_infinite_d");
    }
    if (config.n_spins < 2) {
        throw ConfigError("calibration needs at least two spins");
    }
    if (options.n_realizations < 1 || !(options.tolerance > 0.0)) {
        throw ConfigError("invalid calibration options");
    }
    const int d = config.d.value();
    const double target = config.target_t2;
    CalibrationResult result;

    double seed_density = static_cast<double>(config.n_spins);  // unit cube
    if (d >= 2 && d <= 5) {
        seed_density = density_from_t2(d, target / hahn_time_scale, config.axis_mode);
        result.closed_form_density = seed_density;
    } else {
        result.warning = "no closed-form T2 for d = " + std::to_string(d) +
                         "; calibrating from simulated echoes only";
    }

    const UnitEchoEnsemble ensemble(config, options.n_realizations, options.seed);
    auto t2_at = [&](double density) {
        return ensemble.t2_for_edge(std::pow(config.n_spins / density, 1.0 / d));
    };

    // T2 decreases monotonically with density; bracket in log density, then bisect.
    double lo = seed_density;
    double hi = seed_density;
    while (t2_at(lo) < target) lo /= 2.0;
    while (t2_at(hi) > target) hi *= 2.0;

    double density = seed_density;
    double t2 = t2_at(density);
    int it = 0;
    while (std::abs(t2 - target) >= options.tolerance * target && it < options.max_iterations) {
        density = std::sqrt(lo * hi);
        t2 = t2_at(density);
        (t2 > target ? lo : hi) = density;
        ++it;
    }
    if (std::abs(t2 - target) >= options.tolerance * target) {
        throw NumericalError("density calibration did not converge");
    }
    result.density = density;
    result.t2 = t2;
    result.iterations = it;
    return result;
}

EnsembleConfig resolve_density(EnsembleConfig config, const CalibrationOptions& options) {
    if (config.d.is_finite() && !config.density) {
        config.density = calibrate_density(config, options).density;
    }
    return config;
}

}  // namespace spinecho
