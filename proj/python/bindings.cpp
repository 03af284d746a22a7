// Python bindings for the closed-form map, the Fock oracle and the run drivers.

#include "repint/equilibrium.hpp"
#include "repint/fock.hpp"
#include "repint/relaxation.hpp"
#include "repint/run.hpp"
#include "repint/su2.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace repint;

namespace {

RefreshMode refresh_arg(const std::string& name) { return refresh_mode_from_string(name); }

std::string repr_params(const SystemParams& p) {
    std::ostringstream os;
    os << "SystemParams(omega1=" << p.omega1 << ", omega2=" << p.omega2 << ", omega=" << p.omega_int
       << ", lambda_=" << p.lambda << ", tau=" << p.tau << ")";
    return os.str();
}

// Trajectory columns as a (rows, 10) float array in CSV column order.
py::array_t<double> trajectory_array(const Trajectory& t) {
    const auto n = static_cast<py::ssize_t>(t.records.size());
    py::array_t<double> out({n, py::ssize_t{10}});
    auto v = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& r = t.records[static_cast<std::size_t>(i)];
        const double row[10] = {static_cast<double>(r.step), r.elapsed, r.t1, r.t2, r.theta1, r.theta2,
                                r.w1_theta1, r.w2_theta2, r.nbar_total, r.settled ? 1.0 : 0.0};
        for (py::ssize_t j = 0; j < 10; ++j) v(i, j) = row[j];
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Closed-form thermalization map for two coupled oscillators";

    auto base = py::register_exception<Error>(m, "RepintError", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<BranchError>(m, "BranchError", base.ptr());
    py::register_exception<TruncationError>(m, "TruncationError", base.ptr());

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init([](double omega1, double omega2, double omega, double lambda_, double tau) {
                 SystemParams p{omega1, omega2, omega, lambda_, tau};
                 p.validate();
                 return p;
             }),
             py::arg("omega1") = 1.0, py::arg("omega2") = 1.0, py::arg("omega") = 1.0,
             py::arg("lambda_") = 1.0, py::arg("tau") = 1.0)
        .def_readwrite("omega1", &SystemParams::omega1)
        .def_readwrite("omega2", &SystemParams::omega2)
        .def_readwrite("omega", &SystemParams::omega_int)
        .def_readwrite("lambda_", &SystemParams::lambda)
        .def_readwrite("tau", &SystemParams::tau)
        .def("__eq__", [](const SystemParams& a, const SystemParams& b) { return a == b; })
        .def("__repr__", &repr_params);

    py::class_<ThermalState>(m, "ThermalState")
        .def(py::init<double, double>(), py::arg("theta1"), py::arg("theta2"))
        .def_static("from_temperatures", &ThermalState::from_temperatures, py::arg("t1"), py::arg("t2"))
        .def_readwrite("theta1", &ThermalState::theta1)
        .def_readwrite("theta2", &ThermalState::theta2)
        .def_property_readonly("t1", &ThermalState::temperature1)
        .def_property_readonly("t2", &ThermalState::temperature2)
        .def("__eq__", [](const ThermalState& a, const ThermalState& b) { return a == b; })
        .def("__repr__", [](const ThermalState& s) {
            std::ostringstream os;
            os << "ThermalState(theta1=" << s.theta1 << ", theta2=" << s.theta2 << ")";
            return os.str();
        });

    py::class_<StepResult>(m, "StepResult")
        .def_readonly("new_state", &StepResult::new_state)
        .def_readonly("theta_aux", &StepResult::theta_aux)
        .def_readonly("delta", &StepResult::delta)
        .def_readonly("cos_beta_half", &StepResult::cos_beta_half)
        .def_readonly("boltzmann_factor", &StepResult::boltzmann_factor)
        .def_readonly("partition_z", &StepResult::partition_z);

    py::class_<su2::EulerDecomposition>(m, "EulerDecomposition")
        .def_readonly("alpha", &su2::EulerDecomposition::alpha)
        .def_readonly("beta", &su2::EulerDecomposition::beta)
        .def_readonly("gamma", &su2::EulerDecomposition::gamma)
        .def_readonly("cos_beta_half", &su2::EulerDecomposition::cos_beta_half)
        .def_readonly("delta", &su2::EulerDecomposition::delta)
        .def_readonly("realness_residue", &su2::EulerDecomposition::realness_residue);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("params", &Trajectory::params)
        .def_readonly("converged", &Trajectory::converged)
        .def_property_readonly("final_state", &Trajectory::final_state)
        .def_property_readonly("steps", [](const Trajectory& t) { return t.final().step; })
        .def("as_array", &trajectory_array,
             "Rows of (step, n_tau, T1, T2, theta1, theta2, w1_theta1, w2_theta2, nbar_total, settled).")
        .def("__len__", [](const Trajectory& t) { return t.records.size(); });

    py::class_<fock::OracleStep>(m, "OracleStep")
        .def_readonly("state", &fock::OracleStep::state)
        .def_property_readonly("fit_residual",
                               [](const fock::OracleStep& s) { return std::max(s.fit1.residual, s.fit2.residual); })
        .def_readonly("nbar_before", &fock::OracleStep::nbar_before)
        .def_readonly("nbar_after", &fock::OracleStep::nbar_after)
        .def_readonly("nmax", &fock::OracleStep::nmax);

    m.def("total_occupation", &total_occupation, py::arg("params"), py::arg("state"));
    m.def("step_oscillator1", &step_oscillator1, py::arg("params"), py::arg("state"));
    m.def("step_oscillator2", &step_oscillator2, py::arg("params"), py::arg("state"));
    m.def(
        "step", [](const SystemParams& p, const ThermalState& s) { return step(p, s).state; },
        py::arg("params"), py::arg("state"), "One interact-and-refresh window (mutual refresh).");
    m.def(
        "compute_euler",
        [](const SystemParams& p, const ThermalState& s) {
            return su2::compute_euler(su2::compute_step_coefficients(p, s));
        },
        py::arg("params"), py::arg("state"));
    m.def(
        "iterate",
        [](const SystemParams& p, const ThermalState& s, std::size_t max_steps, double tol,
           const std::string& refresh) { return iterate(p, s, max_steps, tol, refresh_arg(refresh)); },
        py::arg("params"), py::arg("initial"), py::arg("max_steps") = kDefaultMaxSteps,
        py::arg("tol") = kDefaultTol, py::arg("refresh") = "mutual", py::call_guard<py::gil_scoped_release>());
    m.def("predict_fixed_point", &predict_fixed_point, py::arg("params"), py::arg("initial"));
    m.def("predict_reservoir_fixed_point", &predict_reservoir_fixed_point, py::arg("params"),
          py::arg("initial"));

    m.def("required_nmax", &fock::TruncationPolicy::required_nmax, py::arg("params"), py::arg("initial"),
          py::arg("tail_bound") = 1e-12);
    m.def(
        "oracle_step",
        [](const SystemParams& p, const ThermalState& s, int nmax, double tail_bound) {
            const auto trunc = nmax > 0 ? fock::TruncationPolicy{nmax, tail_bound}
                                        : fock::TruncationPolicy::adaptive(p, s, tail_bound);
            return fock::oracle_step(p, s, trunc);
        },
        py::arg("params"), py::arg("state"), py::arg("nmax") = 0, py::arg("tail_bound") = 1e-12,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "oracle_iterate",
        [](const SystemParams& p, const ThermalState& s, std::size_t max_steps, int nmax, double tail_bound,
           double tol, const std::string& refresh) {
            const auto trunc = nmax > 0 ? fock::TruncationPolicy{nmax, tail_bound}
                                        : fock::TruncationPolicy::adaptive(p, s, tail_bound);
            return fock::oracle_iterate(p, s, trunc, max_steps, tol, refresh_arg(refresh)).trajectory;
        },
        py::arg("params"), py::arg("initial"), py::arg("max_steps") = kDefaultMaxSteps, py::arg("nmax") = 0,
        py::arg("tail_bound") = 1e-12, py::arg("tol") = kDefaultTol, py::arg("refresh") = "mutual",
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "check_equilibrium",
        [](const Trajectory& t, double tol) {
            const auto r = equilibrium::check_equilibrium_condition(t, tol);
            py::dict d;
            d["converged"] = r.converged;
            d["condition_gap"] = r.condition_gap;
            d["condition_met"] = r.condition_met;
            d["equal_frequency"] = r.equal_frequency;
            d["t1_final"] = r.t1_final;
            d["t2_final"] = r.t2_final;
            d["mean_initial"] = r.mean_initial;
            d["gap_to_mean_initial"] = r.gap_to_mean_initial;
            d["conservation_prediction"] = r.conservation_prediction;
            d["gap_to_conservation"] = r.gap_to_conservation;
            return d;
        },
        py::arg("trajectory"), py::arg("tol") = 1e-8);

    m.def(
        "simulate_csv",
        [](const std::string& config_json) {
            const auto cfg = run::parse_config(config_json);
            std::ostringstream os;
            const auto res = run::run_simulate(cfg, os);
            return py::make_tuple(os.str(), res.exit_code);
        },
        py::arg("config_json"), "Run the simulate driver on a JSON config; returns (csv_text, exit_code).");
}
