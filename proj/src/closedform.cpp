#include "spinecho/closedform.hpp"

#include "spinecho/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace spinecho {

namespace {

constexpr double kPi = std::numbers::pi;

// b(theta) with u = cos(theta).
double dipolar_b(double u) { return (1.0 - 3.0 * u * u) / 4.0; }

}  // namespace

double HahnTheory::value(double t) const {
    if (!(t2 > 0.0)) {
        throw ConfigError("T2 must be positive");
    }
    const double x = std::abs(t / t2);
    if (d.is_infinite()) {
        return std::exp(-x * x);
    }
    const int dim = d.value();
    if (dim >= 6) {
        throw DomainError("no shape-independent Hahn echo for d = " + std::to_string(dim));
    }
    return std::exp(-std::pow(x, dim / 3.0));
}

double hahn_analytic(const HahnTheory& theory, double t) { return theory.value(t); }

double lambda_integral(double d) {
    if (!(d > 0.0) || d >= 6.0) {
        throw DomainError("radial integral diverges for d = " + std::to_string(d));
    }
    // cos(pi x / 2) Gamma(-x) = -pi / (2 sin(pi x / 2) Gamma(1 + x)), x = d/3.
    const double x = d / 3.0;
    return kPi / (6.0 * std::sin(kPi * x / 2.0) * std::tgamma(1.0 + x));
}

double lambda_quadrature(double d) {
    if (!(d > 0.0) || d >= 6.0) {
        throw DomainError("radial integral diverges for d = " + std::to_string(d));
    }
    const double x = d / 3.0;
    const double p = x + 1.0;
    auto integrand = [p](double z) {
        if (z < 1e-4) {
            return 0.5 * std::pow(z, 2.0 - p) * (1.0 - z * z / 12.0);
        }
        // 1 - cos z = 2 sin^2(z/2), avoids cancellation near 0.
        const double s = std::sin(0.5 * z);
        return 2.0 * s * s * std::pow(z, -p);
    };

    constexpr int kPeriods = 200;
    const double period = 2.0 * kPi;
    const double a = kPeriods * period;

    boost::math::quadrature::tanh_sinh<double> ts;
    double sum = ts.integrate(integrand, 0.0, period);
    for (int k = 1; k < kPeriods; ++k) {
        sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, k * period, (k + 1) * period, 0, 0.0);
    }

    // int_a^inf z^-p dz
    const double power_tail = std::pow(a, -x) / x;
    // int_a^inf cos z z^-q dz with sin a = 0, cos a = 1, by repeated integration
    // by parts: C_q = q a^(-q-1) - q (q+1) C_(q+2).
    double cos_tail = 0.0;
    double coeff = 1.0;
    double q = p;
    for (int term = 0; term < 6; ++term) {
        cos_tail += coeff * q * std::pow(a, -q - 1.0);
        coeff *= -q * (q + 1.0);
        q += 2.0;
    }
    return (sum + power_tail - cos_tail) / 3.0;
}

double sphere_factor(int d, AxisMode mode) {
    if (d < 1) {
        throw DomainError("dimension must be positive");
    }
    const double exponent = d / 3.0;
    auto power_b = [exponent](double theta) {
        return std::pow(std::abs(dipolar_b(std::cos(theta))), exponent);
    };
    if (d == 1) {
        return 2.0 * std::pow(std::abs(dipolar_b(1.0)), exponent);
    }
    if (d == 2 && mode == AxisMode::NormalToPlane) {
        return 2.0 * kPi * std::pow(0.25, exponent);
    }

    // |b|^(d/3) has a cusp at the magic angle; integrate each smooth piece.
    const double magic = std::acos(1.0 / std::sqrt(3.0));
    boost::math::quadrature::tanh_sinh<double> ts;
    auto weighted = [&](double theta) {
        return power_b(theta) * std::pow(std::sin(theta), d - 2);
    };
    const double angular = ts.integrate(weighted, 0.0, magic) +
                           ts.integrate(weighted, magic, kPi - magic) +
                           ts.integrate(weighted, kPi - magic, kPi);
    // Area of the unit (d-2)-sphere; S^0 has two points.
    const double sub_sphere =
        2.0 * std::pow(kPi, (d - 1) / 2.0) / std::tgamma((d - 1) / 2.0);
    return sub_sphere * angular;
}

double t2_from_density(int d, double density, AxisMode mode) {
    if (d < 2 || d > 5) {
        throw DomainError("closed-form T2 requires 2 <= d <= 5, got d = " + std::to_string(d));
    }
    if (!(density > 0.0)) {
        throw ConfigError("density must be positive");
    }
    const double rate = density * lambda_integral(d) * sphere_factor(d, mode);
    return std::pow(rate, -3.0 / d);
}

double density_from_t2(int d, double t2, AxisMode mode) {
    if (d < 2 || d > 5) {
        throw DomainError("closed-form T2 requires 2 <= d <= 5, got d = " + std::to_string(d));
    }
    if (!(t2 > 0.0)) {
        throw ConfigError("T2 must be positive");
    }
    return std::pow(t2, -d / 3.0) / (lambda_integral(d) * sphere_factor(d, mode));
}

double reduced_hahn_product(const Eigen::MatrixXd& couplings, double t) {
    const Eigen::Index n = couplings.rows();
    if (n == 0) {
        return 1.0;
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double prod = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) {
                prod *= std::cos(0.5 * couplings(i, j) * t);
            }
        }
        sum += prod;
    }
    return sum / static_cast<double>(n);
}

double infinite_d_hahn(int n_spins, double j, double t) {
    if (n_spins < 1) {
        throw ConfigError("n_spins must be positive");
    }
    return std::pow(std::cos(2.0 * j * t), n_spins - 1);
}

}  // namespace spinecho
