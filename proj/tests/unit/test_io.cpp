#include "spinecho/error.hpp"
#include "spinecho/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace spinecho;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("enum names round trip") {
    for (auto v : {ModelVariant::Full, ModelVariant::Reduced}) CHECK(parse_variant(variant_name(v)) == v);
    for (auto k : {EpsilonPolicyKind::Uniform, EpsilonPolicyKind::PerSpinConstant, EpsilonPolicyKind::PerPulseRandom}) {
        CHECK(parse_epsilon_policy(epsilon_policy_name(k)) == k);
    }
    for (auto a : {AxisPolicy::PlusX, AxisPolicy::AlternatingX, AxisPolicy::PerSpinRandomFixed}) {
        CHECK(parse_axis_policy(axis_policy_name(a)) == a);
    }
    for (auto m : {EvolutionMethod::Trotter2, EvolutionMethod::Chebyshev, EvolutionMethod::Exact}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    for (auto s : {SequenceKind::Hahn, SequenceKind::CPMG, SequenceKind::APCP}) CHECK(parse_sequence(sequence_name(s)) == s);
    for (auto f : {FieldDistribution::Gaussian, FieldDistribution::Lorentzian, FieldDistribution::Exponential}) {
        CHECK(parse_field_distribution(field_distribution_name(f)) == f);
    }
    for (auto m : {AxisMode::NormalToPlane, AxisMode::InPlane}) CHECK(parse_axis_mode(axis_mode_name(m)) == m);
    CHECK(variant_name(ModelVariant::Reduced) == "reduced");
    CHECK(axis_policy_name(AxisPolicy::PerSpinRandomFixed) == "random-fixed");
    CHECK_THROWS_AS(parse_variant("partial"), ConfigError);
    CHECK_THROWS_AS(parse_method(""), ConfigError);
}

TEST_CASE("dimension parsing") {
    CHECK(Dimension::parse("3") == Dimension(3));
    CHECK(Dimension::parse("inf").is_infinite());
    CHECK(Dimension::parse("infinity").is_infinite());
    CHECK(Dimension::infinite().to_string() == "inf");
    CHECK_THROWS_AS(Dimension::parse("0"), ConfigError);
    CHECK_THROWS_AS(Dimension::parse("two"), ConfigError);
    CHECK_THROWS_AS((void)Dimension::infinite().value(), ConfigError);
}

TEST_CASE("experiment config round trip") {
    ExperimentConfig c;
    c.ensemble.d = Dimension(3);
    c.ensemble.n_spins = 14;
    c.ensemble.density = 0.123456789012345;
    c.ensemble.field_sigma = 12.5;
    c.ensemble.field_distribution = FieldDistribution::Lorentzian;
    c.ensemble.axis_mode = AxisMode::InPlane;
    c.ensemble.seed = 0xffffffffffffffffULL;
    c.variant = ModelVariant::Reduced;
    c.pulse.epsilon = EpsilonPolicy::per_spin(-0.02, 0.05);
    c.pulse.axis = AxisPolicy::PerSpinRandomFixed;
    c.pulse.seed = 77;
    c.plan = {EvolutionMethod::Chebyshev, 0.001, 12, 400.0};
    c.n_realizations = 321;
    c.threads = 4;
    c.calibration.tolerance = 0.01;

    const ExperimentConfig back = experiment_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.ensemble.seed == c.ensemble.seed);
    CHECK(*back.ensemble.density == *c.ensemble.density);
    CHECK(back.plan.chebyshev_order == 12);
    CHECK(back.pulse.epsilon.upper == 0.05);
}

TEST_CASE("partial documents override only the given keys") {
    EnsembleConfig base;
    base.n_spins = 9;
    base.density = 2.0;
    const EnsembleConfig e = ensemble_from_json({{"d", "inf"}, {"density", nullptr}}, base);
    CHECK(e.d.is_infinite());
    CHECK_FALSE(e.density.has_value());
    CHECK(e.n_spins == 9);
    CHECK(ensemble_from_json({{"d", 4}}).d == Dimension(4));
    CHECK_THROWS_AS(ensemble_from_json({{"n_spins", "many"}}), ConfigError);
    CHECK_THROWS_AS(pulse_from_json({{"axis", "sideways"}}), ConfigError);

    SequenceSpec s;
    s.tau = 0.3;
    const SequenceSpec t = sequence_from_json({{"n_pulses", 12}}, s);
    CHECK(t.tau == 0.3);
    CHECK(t.n_pulses == 12);
    CHECK(to_json(sequence_from_json(to_json(t))) == to_json(t));
}

TEST_CASE("realization record") {
    EnsembleConfig c;
    c.n_spins = 3;
    c.density = 1.0;
    const DisorderRealization r = make_realization(c, 2);
    const nlohmann::json j = to_json(r);
    for (const char* key : {"config", "seed", "index", "positions", "couplings", "fields"}) {
        CHECK(j.contains(key));
    }
    CHECK(j.at("couplings").size() == 3);
    CHECK(j.at("couplings")[0][1].get<double>() == r.couplings(0, 1));
    CHECK(j.at("positions")[2].size() == 2);
    CHECK(j.at("index") == 2);
}

TEST_CASE("doubles print in shortest round-trip form") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("series CSV round trip") {
    ResponseSeries s;
    s.times = {0.0, 0.07, 0.14, 0.21};
    s.mean = {1.0, 0.9, 0.8123456789, -0.1};
    s.std_error = {0.0, 0.01, 0.02, 0.03};
    s.echo_index = {0, -1, 1, 2};
    const std::string csv = series_csv(s);
    CHECK(csv.rfind("time,mean,stderr,echo_index,parity\n", 0) == 0);
    CHECK(csv.find("0.07,0.9,0.01,-1,\n") != std::string::npos);
    CHECK(csv.find(",1,odd\n") != std::string::npos);
    CHECK(csv.find(",2,even\n") != std::string::npos);
    const ResponseSeries back = parse_series_csv(csv);
    CHECK(back.times == s.times);
    CHECK(back.mean == s.mean);
    CHECK(back.std_error == s.std_error);
    CHECK(back.echo_index == s.echo_index);
    CHECK_THROWS_AS(parse_series_csv("a,b\n1,2\n"), IoError);
    CHECK_THROWS_AS(parse_series_csv("time,mean,stderr,echo_index,parity\nx,1,2,3,\n"), IoError);
}

TEST_CASE("atomic writes") {
    const fs::path dir = scratch_dir("spinecho_io_test");
    const fs::path file = dir / "nested" / "out.txt";
    write_atomic(file, "first");
    write_atomic(file, "second");
    CHECK(read_text(file) == "second");
    CHECK_FALSE(fs::exists(fs::path(file).concat(".tmp")));
    CHECK_THROWS_AS(read_text(dir / "missing"), IoError);
    // A regular file where a directory is needed.
    CHECK_THROWS_AS(write_atomic(file / "child.txt", "x"), IoError);
    fs::remove_all(dir);
}
