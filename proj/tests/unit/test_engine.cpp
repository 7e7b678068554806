#include "oracle.hpp"

#include "spinecho/engine.hpp"
#include "spinecho/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spinecho;

namespace {

constexpr double kPi = std::numbers::pi;

oracle::Vec to_vec(const StateVector& s) {
    oracle::Vec v(static_cast<Eigen::Index>(s.dimension()));
    for (std::size_t i = 0; i < s.dimension(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
    return v;
}

double fidelity(const oracle::Vec& a, const oracle::Vec& b) {
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

struct Fixture {
    Eigen::MatrixXd j;
    Eigen::VectorXd h;
};

Fixture random_fixture(int n, unsigned seed, double j_scale, double h_scale) {
    Fixture f;
    f.j = oracle::random_symmetric(n, seed, j_scale);
    std::srand(seed + 1);
    f.h = Eigen::VectorXd::Random(n) * h_scale;
    return f;
}

}  // namespace

TEST_CASE("random_state is normalized and deterministic") {
    const StateVector a = random_state(6, 11);
    const StateVector b = random_state(6, 11);
    CHECK(std::abs(a.norm() - 1.0) < 1e-14);
    CHECK(to_vec(a) == to_vec(b));
    CHECK(to_vec(a) != to_vec(random_state(6, 12)));
}

TEST_CASE("typicality moments of random states") {
    const int n = 6;
    const int draws = 1000;
    double sum_z = 0.0, sum_z2 = 0.0, sum_x2 = 0.0, sum_x4 = 0.0;
    StateVector tmp;
    for (int s = 0; s < draws; ++s) {
        const StateVector r = random_state(n, 1000 + s);
        const double z = magnetization_element(r, Axis::Z, r).real();
        apply_magnetization(r, Axis::X, tmp);
        const double x2 = tmp.norm() * tmp.norm();
        sum_z += z;
        sum_z2 += z * z;
        sum_x2 += x2;
        sum_x4 += x2 * x2;
    }
    const double mz = sum_z / draws;
    const double se_z = std::sqrt((sum_z2 / draws - mz * mz) / draws);
    CHECK(std::abs(mz) < 4.0 * se_z);
    const double mx2 = sum_x2 / draws;
    const double se_x2 = std::sqrt((sum_x4 / draws - mx2 * mx2) / draws);
    CHECK(std::abs(mx2 - n / 4.0) < 4.0 * se_x2);
}

TEST_CASE("diagonal and Hamiltonian action match dense operators") {
    for (bool full : {true, false}) {
        const int n = 5;
        const Fixture f = random_fixture(n, 3, 2.0, 3.0);
        const SpinModel model = build_model(f.j, f.h, full ? ModelVariant::Full : ModelVariant::Reduced);
        const Propagator p(model);
        const oracle::Mat h = oracle::hamiltonian(f.j, f.h, full);
        for (Eigen::Index s = 0; s < h.rows(); ++s) {
            CHECK(std::abs(p.diagonal()[static_cast<std::size_t>(s)] - h(s, s).real()) < 1e-12);
        }
        const StateVector r = random_state(n, 5);
        StateVector out(n);
        p.apply_hamiltonian(r.amplitudes(), out.amplitudes());
        CHECK((to_vec(out) - h * to_vec(r)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("zero duration is the identity") {
    const Fixture f = random_fixture(4, 7, 1.0, 1.0);
    const StateVector r = random_state(4, 1);
    for (auto method : {EvolutionMethod::Trotter2, EvolutionMethod::Chebyshev, EvolutionMethod::Exact}) {
        const StateVector out = evolve(r, build_model(f.j, f.h, ModelVariant::Full), 0.0, {method});
        CHECK(to_vec(out) == to_vec(r));
    }
}

TEST_CASE("every method matches the dense exponential") {
    const int n = 4;
    const Fixture f = random_fixture(n, 17, 3.0, 5.0);
    const SpinModel model = build_model(f.j, f.h, ModelVariant::Full);
    const double t = 0.7;
    const StateVector r = random_state(n, 2);
    const oracle::Vec want = oracle::expm(oracle::hamiltonian(f.j, f.h, true), t) * to_vec(r);

    SUBCASE("Trotter at the default step") {
        const oracle::Vec got = to_vec(evolve(r, model, t, {EvolutionMethod::Trotter2}));
        CHECK(fidelity(got, want) >= 1.0 - 1e-8);
    }
    SUBCASE("Chebyshev") {
        const oracle::Vec got = to_vec(evolve(r, model, t, {EvolutionMethod::Chebyshev}));
        CHECK((got - want).norm() < 1e-10);
    }
    SUBCASE("exact sectors") {
        const oracle::Vec got = to_vec(evolve(r, model, t, {EvolutionMethod::Exact}));
        CHECK((got - want).norm() < 1e-12);
    }
}

TEST_CASE("reduced model splitting is exact at any step") {
    const int n = 5;
    const Fixture f = random_fixture(n, 23, 4.0, 6.0);
    const SpinModel model = build_model(f.j, f.h, ModelVariant::Reduced);
    const StateVector r = random_state(n, 3);
    const double t = 1.3;
    const oracle::Vec want = oracle::expm(oracle::hamiltonian(f.j, f.h, false), t) * to_vec(r);
    for (auto method : {EvolutionMethod::Trotter2, EvolutionMethod::Chebyshev, EvolutionMethod::Exact}) {
        const oracle::Vec got = to_vec(evolve(r, model, t, {method, 0.9}));
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("Trotter error is second order") {
    const int n = 4;
    const Fixture f = random_fixture(n, 31, 3.0, 3.0);
    const SpinModel model = build_model(f.j, f.h, ModelVariant::Full);
    const StateVector r = random_state(n, 4);
    const double t = 1.0;
    const oracle::Vec want = oracle::expm(oracle::hamiltonian(f.j, f.h, true), t) * to_vec(r);
    auto error = [&](double step) {
        return (to_vec(evolve(r, model, t, {EvolutionMethod::Trotter2, step})) - want).norm();
    };
    const double e1 = error(t / 32);
    const double e2 = error(t / 64);
    const double e3 = error(t / 128);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("norm drift over 10^4 Trotter steps") {
    const int n = 8;
    const Fixture f = random_fixture(n, 37, 2.0, 50.0);
    Propagator p(build_model(f.j, f.h, ModelVariant::Full), {EvolutionMethod::Trotter2, 1e-3});
    StateVector r = random_state(n, 5);
    p.evolve(r, 10.0);
    CHECK(std::abs(r.norm() - 1.0) <= 1e-12);
}

TEST_CASE("Trotter and Chebyshev agree on ten spins") {
    const int n = 10;
    const Fixture f = random_fixture(n, 41, 3.0, 70.0);
    const SpinModel model = build_model(f.j, f.h, ModelVariant::Full);
    const double tau = 0.7;
    const double step = converged_trotter_step(model, tau);
    const StateVector r = random_state(n, 6);
    const oracle::Vec a = to_vec(evolve(r, model, tau, {EvolutionMethod::Trotter2, step}));
    const oracle::Vec b = to_vec(evolve(r, model, tau, {EvolutionMethod::Chebyshev}));
    CHECK(fidelity(a, b) >= 1.0 - 1e-8);
}

TEST_CASE("Chebyshev detects an undersized spectral bound") {
    const Fixture f = random_fixture(6, 43, 3.0, 10.0);
    const SpinModel model = build_model(f.j, f.h, ModelVariant::Full);
    EvolutionPlan plan{EvolutionMethod::Chebyshev};
    plan.spectral_bound = 0.2 * spectral_bound(model);
    CHECK_THROWS_AS(evolve(random_state(6, 1), model, 2.0, plan), NumericalError);
}

TEST_CASE("spectral bound covers the spectrum") {
    const Fixture f = random_fixture(6, 47, 3.0, 10.0);
    const oracle::Mat h = oracle::hamiltonian(f.j, f.h, true);
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(h);
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(spectral_bound(build_model(f.j, f.h, ModelVariant::Full)) >= radius);
}

TEST_CASE("exact sector propagation refuses large registers") {
    const int n = kMaxExactSpins + 1;
    const SpinModel model = build_model(Eigen::MatrixXd::Ones(n, n), Eigen::VectorXd::Zero(n),
                                        ModelVariant::Full);
    Propagator p(model, {EvolutionMethod::Exact});
    StateVector r = StateVector::basis(n, 0);
    CHECK_THROWS_AS(p.evolve(r, 0.1), ResourceError);
}

TEST_CASE("total M_z is conserved between pulses") {
    const int n = 8;
    const Fixture f = random_fixture(n, 53, 3.0, 20.0);
    for (auto variant : {ModelVariant::Full, ModelVariant::Reduced}) {
        Propagator p(build_model(f.j, f.h, variant), {EvolutionMethod::Chebyshev});
        StateVector r = random_state(n, 8);
        const double before = magnetization_element(r, Axis::Z, r).real();
        p.evolve(r, 0.9);
        CHECK(std::abs(magnetization_element(r, Axis::Z, r).real() - before) < 1e-12);
    }
}

TEST_CASE("pulses") {
    const int n = 4;
    const StateVector r = random_state(n, 9);

    SUBCASE("zero angle is the identity") {
        StateVector s = r;
        const std::vector<SpinRotation> none(n, SpinRotation{0.3, 0.0});
        apply_pulse(s, none);
        CHECK((to_vec(s) - to_vec(r)).norm() < 1e-15);
    }
    SUBCASE("ideal pi flips M_z and M_y") {
        StateVector s = r;
        const std::vector<SpinRotation> pi(n, SpinRotation{0.0, kPi});
        apply_pulse(s, pi);
        for (Axis a : {Axis::Z, Axis::Y}) {
            CHECK(magnetization_element(s, a, s).real() ==
                  doctest::Approx(-magnetization_element(r, a, r).real()).epsilon(1e-13));
        }
        CHECK(magnetization_element(s, Axis::X, s).real() ==
              doctest::Approx(magnetization_element(r, Axis::X, r).real()).epsilon(1e-13));
    }
    SUBCASE("two ideal pi pulses give (-1)^N") {
        for (int m = 1; m <= 4; ++m) {
            const std::vector<SpinRotation> pi(m, SpinRotation{0.0, kPi});
            const oracle::Mat r2 = oracle::rotation(std::vector<double>(m, kPi), std::vector<double>(m, 0.0));
            const oracle::Mat sq = r2 * r2;
            CHECK((sq - std::pow(-1.0, m) * oracle::Mat::Identity(sq.rows(), sq.cols())).norm() < 1e-12);
            StateVector s = random_state(m, 10);
            const oracle::Vec before = to_vec(s);
            apply_pulse(s, pi);
            CHECK((to_vec(s) - r2 * before).norm() < 1e-13);
            apply_pulse(s, pi);
            CHECK((to_vec(s) - std::pow(-1.0, m) * before).norm() < 1e-13);
        }
    }
    SUBCASE("general rotations match the dense product") {
        std::vector<double> angle{1.1, kPi * 1.07, 0.0, 2.5};
        std::vector<double> phase{0.0, kPi, 0.7, -1.9};
        std::vector<SpinRotation> rot;
        for (int k = 0; k < n; ++k) rot.push_back({phase[k], angle[k]});
        StateVector s = r;
        apply_pulse(s, rot);
        CHECK((to_vec(s) - oracle::rotation(angle, phase) * to_vec(r)).norm() < 1e-13);
        CHECK(std::abs(s.norm() - 1.0) < 1e-14);
    }
    SUBCASE("blocked kernel on a register wider than one cache block") {
        const int big = 14;
        std::vector<SpinRotation> rot;
        for (int k = 0; k < big; ++k) rot.push_back({0.1 * k, 0.3 + 0.2 * k});
        StateVector s = random_state(big, 12);
        const StateVector orig = s;
        apply_pulse(s, rot);
        for (auto& x : rot) x.angle = -x.angle;
        apply_pulse(s, rot);
        CHECK((to_vec(s) - to_vec(orig)).norm() < 1e-12);
    }
}

TEST_CASE("magnetization operators match dense matrices") {
    const int n = 5;
    const StateVector a = random_state(n, 13);
    const StateVector b = random_state(n, 14);
    const std::pair<Axis, oracle::Mat> ops[] = {{Axis::X, oracle::total(oracle::sx(), n)},
                                                {Axis::Y, oracle::total(oracle::sy(), n)},
                                                {Axis::Z, oracle::total(oracle::sz(), n)}};
    for (const auto& [axis, m] : ops) {
        StateVector out;
        apply_magnetization(a, axis, out);
        CHECK((to_vec(out) - m * to_vec(a)).norm() < 1e-13);
        const oracle::C want = to_vec(b).dot(m * to_vec(a));
        CHECK(std::abs(magnetization_element(b, axis, a) - want) < 1e-13);
    }
}

namespace {

// Dense trace Tr[M U M U^dagger] for the one-pulse schedule.
double exact_hahn_trace(const Eigen::MatrixXd& j, const Eigen::VectorXd& h, double t, int n) {
    const oracle::Mat u_half = oracle::expm(oracle::hamiltonian(j, h, true), 0.5 * t);
    const oracle::Mat r = oracle::rotation(std::vector<double>(n, kPi), std::vector<double>(n, 0.0));
    const oracle::Mat u = u_half * r * u_half;
    const oracle::Mat m = oracle::total(oracle::sx(), n);
    return (m * u * m * u.adjoint()).trace().real();
}

}  // namespace

TEST_CASE("typicality response estimate") {
    SUBCASE("t = 0 reproduces Tr M_x^2") {
        const int n = 10;
        const SpinModel model = build_model(Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
                                            ModelVariant::Full);
        Propagator p(model);
        const PulseTrain pulses(PulseModel::ideal(), n);
        Schedule s;
        s.record(0.0);
        const Axis ch[] = {Axis::X};
        const double exact = n * std::ldexp(1.0, n) / 4.0;
        const double est = response_estimate(p, pulses, s, ch, 99)(0, 0);
        CHECK(std::abs(est / exact - 1.0) <= 3.0 * std::ldexp(1.0, -n / 2));
    }
    SUBCASE("H = 0 without pulses is constant") {
        const int n = 6;
        const SpinModel model = build_model(Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
                                            ModelVariant::Full);
        Propagator p(model);
        const PulseTrain pulses(PulseModel::ideal(), n);
        Schedule s;
        s.record(0.0);
        for (int k = 1; k <= 5; ++k) {
            s.evolve(0.3);
            s.record(0.3 * k);
        }
        const Axis ch[] = {Axis::X, Axis::Y, Axis::Z};
        const Eigen::MatrixXd est = response_estimate(p, pulses, s, ch, 7);
        for (Eigen::Index c = 0; c < est.rows(); ++c) {
            CHECK((est.row(c).array() - est(c, 0)).abs().maxCoeff() < 1e-12 * est(c, 0));
        }
    }
    SUBCASE("eight spins against the exact trace") {
        const int n = 8;
        const Fixture f = random_fixture(n, 59, 3.0, 4.0);
        Propagator p(build_model(f.j, f.h, ModelVariant::Full), {EvolutionMethod::Exact});
        const PulseTrain pulses(PulseModel::ideal(), n);
        const std::vector<double> times{0.2, 0.4, 0.7, 1.0};
        const Schedule s = hahn_schedule(times);
        const Axis ch[] = {Axis::X};
        // One vector carries ~2^(-N/2) relative noise; average a few draws.
        constexpr int kDraws = 16;
        Eigen::MatrixXd est = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(times.size()) + 1);
        for (int r = 0; r < kDraws; ++r) est += response_estimate(p, pulses, s, ch, 100 + r);
        est /= kDraws;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double exact = exact_hahn_trace(f.j, f.h, times[k], n);
            // Tolerance on the normalized signal, i.e. relative to Tr M_x^2.
            CHECK(std::abs(est(0, static_cast<Eigen::Index>(k + 1)) - exact) <=
                  0.05 * n * std::ldexp(1.0, n) / 4.0);
        }
    }
}

TEST_CASE("CPMG schedule timing") {
    SequenceSpec spec;
    spec.tau = 0.5;
    spec.n_pulses = 3;
    spec.points_per_interval = 1;
    const Schedule s = cpmg_schedule(spec);
    const std::vector<double> want{0.0, 0.25, 0.75, 1.0, 1.25, 1.75, 2.0, 2.25, 2.75, 3.0};
    const auto got = s.record_times();
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]));
    double elapsed = 0.0;
    std::vector<double> pulse_times;
    for (const auto& e : s.events) {
        if (e.kind == ScheduleEvent::Kind::Evolve) elapsed += e.duration;
        if (e.kind == ScheduleEvent::Kind::Pulse) pulse_times.push_back(elapsed);
    }
    const auto expected = spec.pulse_times();
    REQUIRE(pulse_times.size() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(pulse_times[k] == doctest::Approx(expected[k]));
}
