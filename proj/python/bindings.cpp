#include "thermal_ep/fockspace.hpp"
#include "thermal_ep/liouvillian.hpp"
#include "thermal_ep/model.hpp"
#include "thermal_ep/spectral.hpp"
#include "thermal_ep/sweep.hpp"
#include "thermal_ep/trajectory.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace tep;

namespace {

FockCutoff cutoff_of(int levels) { return FockCutoff(levels); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exceptional points of two coupled driven resonators";
    m.attr("__version__") = TEP_VERSION;

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<SingularTransformError>(m, "SingularTransformError", base.ptr());
    py::register_exception<EpSingularityError>(m, "EpSingularityError", base.ptr());
    py::register_exception<PoleError>(m, "PoleError", base.ptr());
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<TruncationGuardError>(m, "TruncationGuardError", numerical.ptr());

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init([](double g, double gamma_a, double gamma_b, double eps, double n_th) {
                 SystemParams p{g, gamma_a, gamma_b, eps, n_th};
                 p.validate();
                 return p;
             }),
             py::arg("g") = 1.0, py::arg("gamma_a") = 2.5, py::arg("gamma_b") = 1.5, py::arg("eps") = 0.0,
             py::arg("n_th") = 0.0)
        .def_static("from_gamma_kappa", &SystemParams::from_gamma_kappa, py::arg("g"), py::arg("gamma"),
                    py::arg("kappa"), py::arg("eps") = 0.0, py::arg("n_th") = 0.0)
        .def_readwrite("g", &SystemParams::g)
        .def_readwrite("gamma_a", &SystemParams::gamma_a)
        .def_readwrite("gamma_b", &SystemParams::gamma_b)
        .def_readwrite("eps", &SystemParams::eps)
        .def_readwrite("n_th", &SystemParams::n_th)
        .def_property_readonly("gamma", &SystemParams::gamma)
        .def_property_readonly("kappa", &SystemParams::kappa)
        .def("__eq__", [](const SystemParams& a, const SystemParams& b) { return a == b; })
        .def("__repr__", [](const SystemParams& p) {
            std::ostringstream s;
            s << "SystemParams(g=" << p.g << ", gamma_a=" << p.gamma_a << ", gamma_b=" << p.gamma_b
              << ", eps=" << p.eps << ", n_th=" << p.n_th << ")";
            return s.str();
        });

    py::class_<DerivedParams>(m, "DerivedParams")
        .def_readonly("g", &DerivedParams::g)
        .def_readonly("gamma", &DerivedParams::gamma)
        .def_readonly("kappa", &DerivedParams::kappa)
        .def_readonly("xi", &DerivedParams::xi)
        .def_readonly("omega", &DerivedParams::omega)
        .def_readonly("chi", &DerivedParams::chi)
        .def_readonly("chi_full", &DerivedParams::chi_full)
        .def_readonly("gamma_p", &DerivedParams::gamma_p)
        .def_readonly("kappa_p", &DerivedParams::kappa_p)
        .def_readonly("omega_p", &DerivedParams::omega_p)
        .def_readonly("chi_t", &DerivedParams::chi_t)
        .def_readonly("chi_p", &DerivedParams::chi_p)
        .def_readonly("chi_p_full", &DerivedParams::chi_p_full);

    m.def("derive", &derive, py::arg("params"));
    m.def("hep_coupling", &hep_coupling, py::arg("kappa"), py::arg("n_th"));
    m.def("lep_coupling", &lep_coupling, py::arg("kappa"));
    m.def("analytic_lambda_nh", &analytic_lambda_nh, py::arg("n_e"), py::arg("n_f"), py::arg("derived"),
          py::arg("thermal") = false, py::arg("full_chi") = false);
    m.def("analytic_lambda_pt", &analytic_lambda_pt, py::arg("n_e"), py::arg("n_f"), py::arg("derived"));

    // Operators take the number of Fock levels per mode.
    m.def("annihilation", [](int d) { return fock::annihilation(cutoff_of(d)); }, py::arg("levels"));
    m.def("mode_a", [](int d) { return fock::mode_a(cutoff_of(d)); }, py::arg("levels"));
    m.def("mode_b", [](int d) { return fock::mode_b(cutoff_of(d)); }, py::arg("levels"));
    m.def("build_hamiltonian", [](const SystemParams& p, int d) { return build_hamiltonian(p, cutoff_of(d)); },
          py::arg("params"), py::arg("levels") = FockCutoff::kDefault);
    m.def("build_h_nh", [](const SystemParams& p, int d) { return build_h_nh(p, cutoff_of(d)); }, py::arg("params"),
          py::arg("levels") = FockCutoff::kDefault);
    m.def("build_collapse_ops", [](const SystemParams& p, int d) { return build_collapse_ops(p, cutoff_of(d)); },
          py::arg("params"), py::arg("levels") = FockCutoff::kDefault);
    m.def("build_liouvillian",
          [](const SystemParams& p, int d) { return build_liouvillian(p, cutoff_of(d)).matrix; }, py::arg("params"),
          py::arg("levels"));
    m.def("dynamical_matrix", [](const SystemParams& p) { return ComplexMatrix(dynamical_matrix(p).m); },
          py::arg("params"));

    m.def(
        "eig",
        [](const ComplexMatrix& a, bool vectors) {
            Spectrum s = eig(a, vectors);
            return py::make_tuple(s.eigenvalues, s.eigenvectors);
        },
        py::arg("a"), py::arg("vectors") = true);
    m.def("mat_exp", &mat_exp, py::arg("a"));
    m.def("span_angle", &span_angle, py::arg("u"), py::arg("v"));

    m.def(
        "locate_ep",
        [](const SystemParams& base, const std::vector<double>& couplings, bool liouvillian, int d) {
            const FockCutoff cutoff(d);
            const std::vector<int> sectors = fock::excitation_sectors(cutoff);
            ScanBuilder builder = [&](double g) {
                SystemParams p = base;
                p.g = g;
                p.eps = 0.0;
                if (liouvillian) {
                    return ScanMatrix{dynamical_matrix(p).m, {}};
                }
                return ScanMatrix{build_h_nh(p, cutoff), sectors};
            };
            ScanOptions options;
            if (!liouvillian) {
                options.sectors = {1, 2};
            }
            std::optional<EpEstimate> estimate;
            {
                py::gil_scoped_release release;
                estimate = locate_ep(coalescence_scan(builder, couplings, options));
            }
            if (!estimate) {
                throw NumericalError("locate_ep: every grid point failed");
            }
            return py::make_tuple(estimate->parameter, estimate->uncertainty, estimate->angle);
        },
        py::arg("params"), py::arg("couplings"), py::arg("liouvillian") = false, py::arg("levels") = 4,
        "Coupling with the most coalesced eigenvectors: (g, uncertainty, angle).");

    m.def(
        "trajectory_jumps",
        [](const SystemParams& p, int d, double dt, double t_final, std::size_t n_traj, std::uint64_t seed) {
            TrajectoryConfig c;
            c.cutoff = FockCutoff(d);
            c.dt = dt;
            c.t_final = t_final;
            c.n_traj = n_traj;
            c.seed = seed;
            c.n_samples = 1;
            py::gil_scoped_release release;
            const TrajectoryEnsemble e = run_ensemble(p, c, fock::basis_state(0, 0, c.cutoff));
            std::vector<std::vector<std::pair<double, int>>> out;
            for (const auto& jumps : e.jumps) {
                auto& v = out.emplace_back();
                for (const auto& j : jumps) {
                    v.emplace_back(j.time, j.channel);
                }
            }
            return out;
        },
        py::arg("params"), py::arg("levels"), py::arg("dt"), py::arg("t_final"), py::arg("n_traj"),
        py::arg("seed"), "Jump records (time, channel) per trajectory starting from the vacuum.");

    m.def("default_config", [](const std::string& mode) { return config_to_json(default_config(parse_mode(mode))); },
          py::arg("mode"));
    m.def(
        "run",
        [](const std::string& config_json, const std::optional<std::string>& mode) {
            const SweepConfig c =
                parse_config(config_json, mode ? std::optional(parse_mode(*mode)) : std::nullopt);
            std::ostringstream out;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_command(c, out);
            }
            return py::make_tuple(code, out.str());
        },
        py::arg("config"), py::arg("mode") = py::none(), "Run a sweep; returns (exit code, table text).");
}
