#include "spinecho/closedform.hpp"
#include "spinecho/disorder.hpp"
#include "spinecho/floquet.hpp"
#include "spinecho/io.hpp"
#include "spinecho/protocol.hpp"
#include "spinecho/runner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;
using nlohmann::json;

namespace {

// Config structs cross the boundary as JSON text; the Python wrapper does the
// dict <-> str conversion.
json parse(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

py::dict series_dict(const spinecho::ResponseSeries& s) {
    py::dict d;
    d["alpha"] = spinecho::axis_label(s.alpha);
    d["times"] = s.times;
    d["mean"] = s.mean;
    d["std_error"] = s.std_error;
    d["echo_index"] = s.echo_index;
    d["n_realizations"] = s.n_realizations;
    d["samples"] = s.samples;
    d["metadata"] = s.metadata.dump();
    return d;
}

spinecho::ExperimentConfig experiment(const std::string& text) {
    return spinecho::experiment_from_json(parse(text));
}

std::vector<spinecho::Axis> axes(const std::vector<std::string>& labels) {
    std::vector<spinecho::Axis> out;
    for (const auto& l : labels) out.push_back(spinecho::parse_axis(l));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dipolar spin-ensemble CPMG simulator";

    py::register_exception<spinecho::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<spinecho::ResourceError>(m, "ResourceError", PyExc_MemoryError);
    py::register_exception<spinecho::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<spinecho::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("lambda_integral", &spinecho::lambda_integral, py::arg("d"));
    m.def("lambda_quadrature", &spinecho::lambda_quadrature, py::arg("d"));
    m.def("sphere_factor",
          [](int d, const std::string& mode) { return spinecho::sphere_factor(d, spinecho::parse_axis_mode(mode)); },
          py::arg("d"), py::arg("axis_mode") = "normal");
    m.def("t2_from_density",
          [](int d, double f, const std::string& mode) {
              return spinecho::t2_from_density(d, f, spinecho::parse_axis_mode(mode));
          },
          py::arg("d"), py::arg("density"), py::arg("axis_mode") = "normal");
    m.def("density_from_t2",
          [](int d, double t2, const std::string& mode) {
              return spinecho::density_from_t2(d, t2, spinecho::parse_axis_mode(mode));
          },
          py::arg("d"), py::arg("t2"), py::arg("axis_mode") = "normal");
    m.def("reduced_hahn_product", &spinecho::reduced_hahn_product, py::arg("couplings"), py::arg("t"));
    m.def("infinite_d_hahn", &spinecho::infinite_d_hahn, py::arg("n_spins"), py::arg("j"), py::arg("t"));
    m.def("couplings_infinite_d", &spinecho::couplings_infinite_d, py::arg("n_spins"),
          py::arg("target_t2") = 1.0);

    m.def("_realization", [](const std::string& ensemble, std::uint64_t index) {
        const auto r = spinecho::make_realization(spinecho::ensemble_from_json(parse(ensemble)), index);
        py::dict d;
        d["seed"] = r.seed;
        d["index"] = r.index;
        d["positions"] = r.positions;
        d["couplings"] = r.couplings;
        d["fields"] = r.fields;
        return d;
    });

    m.def("_calibrate", [](const std::string& ensemble, const std::string& options) {
        const auto r = spinecho::calibrate_density(spinecho::ensemble_from_json(parse(ensemble)),
                                                   spinecho::calibration_from_json(parse(options)));
        py::dict d;
        d["density"] = r.density;
        d["t2"] = r.t2;
        d["closed_form_density"] = r.closed_form_density;
        d["iterations"] = r.iterations;
        d["warning"] = r.warning;
        return d;
    });

    m.def("_hahn", [](const std::string& config, const std::vector<double>& times) {
        spinecho::ResponseSeries s;
        {
            py::gil_scoped_release release;
            s = spinecho::run_hahn(experiment(config), times);
        }
        return series_dict(s);
    });

    m.def("_cpmg", [](const std::string& config, const std::string& sequence,
                      const std::vector<std::string>& channels) {
        std::vector<spinecho::ResponseSeries> out;
        const auto ch = axes(channels);
        {
            py::gil_scoped_release release;
            out = spinecho::run_cpmg(experiment(config), spinecho::sequence_from_json(parse(sequence)), ch);
        }
        py::list l;
        for (const auto& s : out) l.append(series_dict(s));
        return l;
    });

    m.def("_longitudinal", [](const std::string& config, const std::string& sequence) {
        spinecho::ResponseSeries s;
        {
            py::gil_scoped_release release;
            s = spinecho::run_longitudinal(experiment(config), spinecho::sequence_from_json(parse(sequence)));
        }
        return series_dict(s);
    });

    m.def("_floquet", [](const std::string& ensemble, const std::string& variant, const std::string& pulse,
                         const std::string& plan, double tau, std::uint64_t index) {
        const auto r = spinecho::make_realization(spinecho::ensemble_from_json(parse(ensemble)), index);
        const auto model = spinecho::build_model(r, spinecho::parse_variant(variant));
        spinecho::EvolutionPlan p{spinecho::EvolutionMethod::Exact};
        p = spinecho::plan_from_json(parse(plan), p);
        const auto op = spinecho::build_floquet(model, spinecho::pulse_from_json(parse(pulse)), tau, p);
        const auto spec = spinecho::diagonalize(op);
        py::dict d;
        d["quasienergies"] = spec.quasienergies;
        d["unitarity_defect"] = spinecho::unitarity_defect(op.matrix);
        d["reconstruction_residual"] = spec.reconstruction_residual;
        return d;
    });

    m.def("_run", [](const std::string& config) {
        spinecho::ResultRecord rec;
        {
            py::gil_scoped_release release;
            rec = spinecho::run(spinecho::run_config_from_json(parse(config)));
        }
        py::dict d;
        d["directory"] = rec.directory.string();
        d["files"] = rec.files;
        d["metadata"] = rec.metadata.dump();
        d["wall_seconds"] = rec.wall_seconds;
        return d;
    });

    m.def("cli_main", [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"spinecho"};
        for (const auto& a : args) argv.push_back(a.c_str());
        py::gil_scoped_release release;
        return spinecho::cli_main(static_cast<int>(argv.size()), argv.data());
    }, py::arg("args"));
}
