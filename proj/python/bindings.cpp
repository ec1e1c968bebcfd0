#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sddpde/analysis.hpp"
#include "sddpde/errors.hpp"
#include "sddpde/integrator.hpp"
#include "sddpde/io.hpp"
#include "sddpde/scenario.hpp"

namespace py = pybind11;
using namespace sddpde;

namespace {

py::dict report_dict(const EstimateReport& rep) {
    py::dict d;
    d["id"] = rep.id;
    d["bound"] = rep.bound;
    d["observed"] = rep.observed;
    d["margin"] = rep.margin;
    d["tol"] = rep.tol;
    d["pass"] = rep.pass;
    d["note"] = rep.note;
    py::dict details;
    for (const auto& [k, v] : rep.details) details[py::str(k)] = v;
    d["details"] = details;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spectral Galerkin solver for a non-local reaction-diffusion equation "
              "with a discrete state-dependent delay";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SolverError>(m, "SolverError");

    py::class_<DomainSpec>(m, "DomainSpec")
        .def(py::init([](double length, int n_grid) {
                 return DomainSpec{length, n_grid};
             }),
             py::arg("length"), py::arg("n_grid"))
        .def_readonly("length", &DomainSpec::length)
        .def_readonly("n_grid", &DomainSpec::n_grid);

    py::class_<SpectralBasis, std::shared_ptr<SpectralBasis>>(m, "SpectralBasis")
        .def(py::init<const DomainSpec&, int>(), py::arg("domain"), py::arg("m"))
        .def_property_readonly("m", &SpectralBasis::order)
        .def_property_readonly("eigenvalues", &SpectralBasis::eigenvalues)
        .def_property_readonly("quad_nodes", &SpectralBasis::quad_nodes)
        .def_property_readonly("quad_weights", &SpectralBasis::quad_weights)
        .def("eigenfunction", &SpectralBasis::eigenfunction, py::arg("k"), py::arg("x"))
        .def("apply_power", &SpectralBasis::apply_power, py::arg("alpha"), py::arg("v"))
        .def("to_grid", &SpectralBasis::to_grid)
        .def("from_grid", &SpectralBasis::from_grid)
        .def("norm_alpha", &SpectralBasis::norm_alpha, py::arg("v"), py::arg("alpha"));

    py::class_<InitialFunction>(m, "InitialFunction")
        .def_static("constant", &InitialFunction::constant, py::arg("value"), py::arg("r"))
        .def_static(
            "polynomial",
            [](const std::vector<CoeffVec>& coeffs, double r) {
                InitialFunction f;
                f.kind = InitialFunction::Kind::Polynomial;
                f.r = r;
                f.m = coeffs.empty() ? 0 : static_cast<int>(coeffs.front().size());
                f.poly_coeffs = coeffs;
                f.validate();
                return f;
            },
            py::arg("coefficients"), py::arg("r"))
        .def_static(
            "trig",
            [](int m, double r,
               const std::vector<std::tuple<int, double, double, double>>& modes) {
                InitialFunction f;
                f.kind = InitialFunction::Kind::Trig;
                f.m = m;
                f.r = r;
                for (const auto& [k, amp, omega, phase] : modes)
                    f.trig_modes.push_back(InitialFunction::TrigMode{k, amp, omega, phase});
                f.validate();
                return f;
            },
            py::arg("m"), py::arg("r"), py::arg("modes"));

    py::class_<HistoryBuffer>(m, "HistoryBuffer")
        .def_property_readonly("anchor_time", &HistoryBuffer::anchor_time)
        .def_property_readonly("r", &HistoryBuffer::max_delay)
        .def_property_readonly("m", &HistoryBuffer::order)
        .def("eval", [](const HistoryBuffer& h, double s) { return h.eval(s); })
        .def("eval_deriv", [](const HistoryBuffer& h, double s) { return h.eval_deriv(s); })
        .def("window", &HistoryBuffer::window, py::arg("a"), py::arg("b"));

    m.def("render_history", &render_history, py::arg("shape"), py::arg("anchor") = 0.0,
          py::arg("n_segments") = 64, py::arg("extra_breakpoints") = std::vector<double>{});
    m.def("norm_c_minus_half", &norm_c_minus_half);
    m.def("lipschitz_seminorm", &lipschitz_seminorm);
    m.def("norm_h", &norm_h);
    m.def("norm_l", &norm_l);
    m.def("norm_x", &norm_x);

    py::class_<SddRightHandSide>(m, "SddRightHandSide")
        .def_property_readonly("L_B", [](const SddRightHandSide& r) { return r.B.L_B; })
        .def_property_readonly("L_b", [](const SddRightHandSide& r) { return r.b.L_b; })
        .def_property_readonly("M_b", [](const SddRightHandSide& r) { return r.b.M_b; })
        .def_property_readonly("L_eta", [](const SddRightHandSide& r) { return r.eta.L_eta; })
        .def_property_readonly("d", [](const SddRightHandSide& r) { return r.d; })
        .def_property_readonly("basis", [](const SddRightHandSide& r) { return r.basis; });

    m.def("eval_eta", [](const SddRightHandSide& rhs, const HistoryBuffer& h) {
        return eval_eta(rhs.eta, *rhs.basis, h);
    });
    m.def("eval_F1", [](const SddRightHandSide& rhs, const HistoryBuffer& h) {
        return eval_F1(rhs, h);
    });
    m.def("lipschitz_F1", &lipschitz_F1, py::arg("rhs"), py::arg("ell"));
    m.def("check_manifold", &check_manifold);
    m.def("make_manifold_initial", &make_manifold_initial, py::arg("shape"), py::arg("rhs"),
          py::arg("n_segments") = 64);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init([](double dt, double T, double fp_tol, int fp_max_iter) {
                 return SolverConfig{dt, T, fp_tol, fp_max_iter, 0};
             }),
             py::arg("dt"), py::arg("T"), py::arg("fp_tol") = 1e-10,
             py::arg("fp_max_iter") = 50)
        .def_readwrite("dt", &SolverConfig::dt)
        .def_readwrite("T", &SolverConfig::T);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("n_nodes", &Trajectory::n_nodes)
        .def_property_readonly("dt", &Trajectory::dt)
        .def("node_time", &Trajectory::node_time)
        .def("state", &Trajectory::state)
        .def("state_deriv", &Trajectory::state_deriv)
        .def("snapshot", &Trajectory::snapshot)
        .def_property_readonly("initial_manifold_residual",
                               &Trajectory::initial_manifold_residual)
        .def_property_readonly("max_fp_iterations",
                               [](const Trajectory& t) { return t.stats().max_fp_iters; });

    m.def("solve", &solve, py::arg("initial"), py::arg("rhs"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("seed", [](const Scenario& s) { return s.seed; })
        .def_property_readonly("hash", [](const Scenario& s) { return s.hash; })
        .def_property_readonly("solver", [](const Scenario& s) { return s.solver; })
        .def_property_readonly("initial_shape", [](const Scenario& s) { return s.initial; });

    m.def("parse_scenario", &parse_scenario, py::arg("json_text"));
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("assemble_scenario",
          [](const Scenario& sc) { return assemble_model(sc.model); });

    m.def("verify_energy", [](const Trajectory& traj, const SddRightHandSide& rhs) {
        return report_dict(verify_energy(traj, rhs));
    });
    m.def("audit_lemma1",
          [](const SddRightHandSide& rhs, int n, std::uint64_t seed) {
              return report_dict(audit_lemma1(rhs, n, seed));
          },
          py::arg("rhs"), py::arg("n_samples") = 1000, py::arg("seed") = kDefaultSeed);
    m.def("timeshift_counterexample", &timeshift_counterexample);
    m.def("timeshift_derivative_counterexample", &timeshift_derivative_counterexample);
    m.def("timeshift_smooth_control", &timeshift_smooth_control);

    m.def("write_trajectory_csv", &write_trajectory_csv);
    m.def("load_history_csv", &load_history_csv);

    m.attr("DEFAULT_SEED") = kDefaultSeed;
    m.attr("__version__") = "0.1.0";
}
