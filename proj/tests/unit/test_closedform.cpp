#include "oracle.hpp"

#include "spinecho/closedform.hpp"
#include "spinecho/disorder.hpp"
#include "spinecho/engine.hpp"
#include "spinecho/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spinecho;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("analytic Hahn echo") {
    CHECK((HahnTheory{Dimension(2), 1.0}.value(0.0)) == 1.0);
    CHECK((HahnTheory{Dimension(2), 1.0}.value(1.0)) == doctest::Approx(std::exp(-1.0)));
    CHECK((HahnTheory{Dimension(3), 1.0}.value(2.0)) == doctest::Approx(std::exp(-2.0)));
    CHECK((HahnTheory{Dimension(2), 2.0}.value(2.0)) == doctest::Approx(std::exp(-1.0)));
    CHECK((HahnTheory{Dimension::infinite(), 1.0}.value(1.5)) == doctest::Approx(std::exp(-2.25)));
    CHECK_THROWS_AS((void)hahn_analytic(HahnTheory{Dimension(6), 1.0}, 1.0), DomainError);
    CHECK_THROWS_AS((void)hahn_analytic(HahnTheory{Dimension(8), 1.0}, 1.0), DomainError);
}

TEST_CASE("d = 2 echo has an unbounded initial slope") {
    const HahnTheory th{Dimension(2), 1.0};
    double previous = 0.0;
    for (int k = 1; k <= 8; ++k) {
        const double delta = std::pow(10.0, -k);
        const double slope = (1.0 - th.value(delta)) / delta;
        CHECK(slope > previous);
        previous = slope;
    }
    CHECK(previous > 100.0);
}

TEST_CASE("radial integral") {
    CHECK(lambda_integral(3.0) == doctest::Approx(kPi / 6.0).epsilon(1e-14));
    CHECK(std::abs(lambda_quadrature(3.0) - kPi / 6.0) < 1e-8);
    CHECK(lambda_integral(2.0) == doctest::Approx(0.66974).epsilon(1e-5));
    for (double d : {1.0, 2.0, 4.0, 5.0, 0.5, 2.5}) {
        CHECK(std::abs(lambda_integral(d) - lambda_quadrature(d)) < 1e-8);
    }
    // Reflection form against -(1/3) cos(pi d / 6) Gamma(-d/3) away from d = 3.
    for (double d : {1.0, 2.0, 4.0, 5.0}) {
        CHECK(lambda_integral(d) ==
              doctest::Approx(-std::cos(kPi * d / 6.0) * std::tgamma(-d / 3.0) / 3.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(lambda_integral(6.0), DomainError);
    CHECK_THROWS_AS(lambda_quadrature(7.0), DomainError);
    CHECK_THROWS_AS(lambda_integral(0.0), DomainError);
}

TEST_CASE("angular factor") {
    CHECK(sphere_factor(2, AxisMode::NormalToPlane) ==
          doctest::Approx(2.0 * kPi * std::pow(0.25, 2.0 / 3.0)));
    // Independent Simpson quadrature in theta on each smooth piece.
    const double magic = std::acos(1.0 / std::sqrt(3.0));
    auto piecewise = [&](auto f) {
        return simpson(f, 0.0, magic, 20000) + simpson(f, magic, kPi - magic, 20000) +
               simpson(f, kPi - magic, kPi, 20000);
    };
    auto b = [](double th) { return std::abs(1.0 - 3.0 * std::cos(th) * std::cos(th)) / 4.0; };
    // Full circle: twice the integral over [0, pi].
    const double in_plane = 2.0 * piecewise([&](double th) { return std::pow(b(th), 2.0 / 3.0); });
    CHECK(sphere_factor(2, AxisMode::InPlane) == doctest::Approx(in_plane).epsilon(1e-7));
    const double three = 2.0 * kPi * piecewise([&](double th) { return b(th) * std::sin(th); });
    CHECK(sphere_factor(3) == doctest::Approx(three).epsilon(1e-7));
    // For d = 3 the integral of |1 - 3u^2| du over [-1, 1] is 8 / (3 sqrt 3).
    CHECK(sphere_factor(3) == doctest::Approx(2.0 * kPi * 0.25 * 8.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-10));
}

TEST_CASE("T2 from density") {
    CHECK(t2_from_density(3, 1.0) / t2_from_density(3, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(t2_from_density(2, 1.0) / t2_from_density(2, 4.0) == doctest::Approx(8.0).epsilon(1e-14));
    for (int d = 2; d <= 5; ++d) {
        for (double f : {1e-3, 1.0, 1e3}) {
            const double t2 = t2_from_density(d, f);
            CHECK(std::isfinite(t2));
            CHECK(t2 > 0.0);
            CHECK(density_from_t2(d, t2) == doctest::Approx(f).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(t2_from_density(6, 1.0), DomainError);
    CHECK_THROWS_AS(t2_from_density(1, 1.0), DomainError);
    CHECK_THROWS_AS(t2_from_density(3, 0.0), ConfigError);
}

TEST_CASE("reduced Hahn product") {
    CHECK(reduced_hahn_product(Eigen::MatrixXd::Zero(1, 1), 3.0) == 1.0);
    const Eigen::MatrixXd j = oracle::random_symmetric(6, 2, 5.0);
    CHECK(reduced_hahn_product(j, 0.0) == 1.0);
    Eigen::MatrixXd pair(2, 2);
    pair << 0.0, 2.0, 2.0, 0.0;
    CHECK(reduced_hahn_product(pair, 0.3) == doctest::Approx(std::cos(0.3)));
}

TEST_CASE("reduced Hahn product matches engine propagation") {
    const int n = 10;
    const Eigen::MatrixXd j = oracle::random_symmetric(n, 77, 3.0);
    std::srand(78);
    const Eigen::VectorXd h = Eigen::VectorXd::Random(n) * 40.0;
    Propagator p(build_model(j, h, ModelVariant::Reduced));
    const std::vector<double> times{0.3, 0.8, 1.7};
    // Exact trace by summing over the full computational basis.
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(times.size()));
    const std::size_t dim = std::size_t{1} << n;
    std::vector<SpinRotation> pi(n, SpinRotation{0.0, kPi});
    for (std::size_t b = 0; b < dim; ++b) {
        StateVector basis = StateVector::basis(n, b);
        StateVector mb;
        apply_magnetization(basis, Axis::X, mb);
        for (std::size_t k = 0; k < times.size(); ++k) {
            StateVector u = basis, um = mb;
            for (StateVector* v : {&u, &um}) {
                p.evolve(*v, times[k] / 2);
                apply_pulse(*v, pi);
                p.evolve(*v, times[k] / 2);
            }
            trace(static_cast<Eigen::Index>(k)) += magnetization_element(u, Axis::X, um).real();
        }
    }
    const double norm = n * std::ldexp(1.0, n) / 4.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(trace(static_cast<Eigen::Index>(k)) / norm - reduced_hahn_product(j, times[k])) <
              1e-10);
    }
}

TEST_CASE("infinite-dimension echo") {
    CHECK(infinite_d_hahn(5, 0.7, 0.0) == 1.0);
    // Pair coefficient mapping makes both formulas agree.
    for (int n : {2, 5}) {
        const double jj = 0.37;
        Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, infinite_d_pair_coupling(jj));
        c.diagonal().setZero();
        for (double t : {0.1, 0.9, 2.0}) {
            CHECK(reduced_hahn_product(c, t) == doctest::Approx(infinite_d_hahn(n, jj, t)).epsilon(1e-13));
        }
    }
    const int big = 400;
    const double jj = couplings_infinite_d(big, 1.0);
    double worst = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double t = 2.0 * k / 400.0;
        worst = std::max(worst, std::abs(infinite_d_hahn(big, jj, t) - std::exp(-t * t)));
    }
    CHECK(worst <= 0.01);
    CHECK_THROWS_AS(infinite_d_hahn(0, 1.0, 1.0), ConfigError);
}
