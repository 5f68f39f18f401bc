#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sel/errors.hpp"
#include "sel/harness.hpp"
#include "sel/profiles.hpp"
#include "sel/radial_solver.hpp"
#include "sel/taxonomy.hpp"

namespace py = pybind11;
using namespace sel;

namespace {

py::array_t<double> column(const RadialSolution& s, double Sample::*field) {
    std::vector<double> v;
    v.reserve(s.samples.size());
    for (const auto& x : s.samples) v.push_back(x.*field);
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
    const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(double))};
    return py::array_t<double>(shape, strides, v.data());
}

Parameters make_params(double q, double tau, double lambda, double rho, double theta, int dim) {
    Parameters p;
    p.dim = dim;
    p.q = q;
    p.tau = tau;
    p.lambda = lambda;
    p.rho = rho;
    p.theta = theta;
    validate(p);
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings for the sel classification library";

    static py::exception<RegimeError> regime(m, "RegimeError");
    static py::exception<NumericalFailure> numerical(m, "NumericalFailure");
    py::register_exception_translator([](std::exception_ptr e) {
        try {
            if (e) std::rethrow_exception(e);
        } catch (const InvalidInput& x) {
            PyErr_SetString(PyExc_ValueError, x.what());
        } catch (const RegimeError& x) {
            regime(x.what());
        } catch (const NumericalFailure& x) {
            numerical(x.what());
        }
    });

    py::class_<Parameters>(m, "Parameters")
        .def(py::init(&make_params), py::arg("q"), py::arg("tau"), py::arg("lambda_"), py::arg("rho"),
             py::arg("theta"), py::arg("dim") = 3)
        .def_readwrite("dim", &Parameters::dim)
        .def_readwrite("q", &Parameters::q)
        .def_readwrite("tau", &Parameters::tau)
        .def_readwrite("lambda_", &Parameters::lambda)
        .def_readwrite("rho", &Parameters::rho)
        .def_readwrite("theta", &Parameters::theta)
        .def("__repr__", [](const Parameters& p) {
            return "Parameters(q=" + std::to_string(p.q) + ", tau=" + std::to_string(p.tau) +
                   ", lambda_=" + std::to_string(p.lambda) + ", rho=" + std::to_string(p.rho) +
                   ", theta=" + std::to_string(p.theta) + ", dim=" + std::to_string(p.dim) + ")";
        });

    m.def("beta", &beta_of);
    m.def("eval_f", &eval_f, py::arg("p"), py::arg("t"));
    m.def("kelvin", &kelvin);
    m.def("classify", [](const Parameters& p) {
        const CaseTag t = classify(p);
        return py::dict(py::arg("tag") = to_string(t.tag), py::arg("rho_equals_upsilon") = t.rho_equals_upsilon,
                        py::arg("outside_taxonomy") = t.outside_taxonomy);
    });
    m.def("roots", [](const Parameters& p) {
        const Roots r = find_negative_roots(p);
        return py::make_tuple(r.varpi1, r.varpi2, to_string(r.multiplicity));
    });
    m.def("exists", [](const Parameters& p) { return existence(p).exists; });
    m.def("families", [](const Parameters& p) {
        std::vector<std::string> names;
        for (const auto& f : predict_global(p).families) names.push_back(f.name);
        return names;
    });
    m.def("report_json", [](const Parameters& p) { return harness::dump(harness::to_json(harness::classify_report(p))); },
          "Classification report as sel-report/1 JSON text.");

    py::class_<RadialSolution>(m, "RadialSolution")
        .def_property_readonly("r", [](const RadialSolution& s) { return column(s, &Sample::r); })
        .def_property_readonly("u", [](const RadialSolution& s) { return column(s, &Sample::u); })
        .def_property_readonly("du", [](const RadialSolution& s) { return column(s, &Sample::du); })
        .def_property_readonly("status", [](const RadialSolution& s) { return to_string(s.status); })
        .def_property_readonly("provenance", [](const RadialSolution& s) { return s.provenance.values; })
        .def_property_readonly("params", [](const RadialSolution& s) { return s.params; })
        .def("value", &RadialSolution::value)
        .def("max_relative_residual", &max_relative_residual)
        .def("apriori_bound_holds", [](const RadialSolution& s) { return apriori_bound_holds(s); })
        .def("to_csv", &to_csv)
        .def("__len__", [](const RadialSolution& s) { return s.samples.size(); });

    m.def("exact_U", [](const Parameters& p) { return construct_exact_U(p); });
    m.def(
        "shoot",
        [](const Parameters& p, const std::string& family, std::optional<double> target,
           std::optional<double> target_c) {
            ShootingSpec s;
            s.family = shoot_family_from_string(family);
            s.target = target;
            s.target_c = target_c;
            return shoot(p, s);
        },
        py::arg("p"), py::arg("family"), py::arg("target") = py::none(), py::arg("target_c") = py::none());
    m.def("kelvin_solution", &kelvin_solution);
    m.def("scale", &scale, py::arg("solution"), py::arg("sigma"));
}
