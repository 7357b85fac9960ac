#include "rydgauge/commands.hpp"
#include "rydgauge/errors.hpp"
#include "rydgauge/gauge.hpp"
#include "rydgauge/spectrum.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rydgauge;

namespace {

StarkScheme scheme(double Delta_bar, double delta_bar, const std::string& kind) {
    return StarkScheme::make(stark_kind_from_string(kind), delta_bar, Delta_bar);
}

std::string run_command(const std::string& name, const std::string& config, const std::string& out_dir, int threads,
                        std::optional<std::uint64_t> seed) {
    CommandContext ctx;
    ctx.config = parse_config_text(config.empty() ? "{}" : config);
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.seed = seed;
    py::gil_scoped_release release;
    if (name == "potentials") return cmd_potentials(ctx).dump();
    if (name == "fields") return cmd_fields(ctx).dump();
    if (name == "chern") return cmd_chern(ctx).dump();
    if (name == "deflect") return cmd_deflect(ctx).dump();
    if (name == "beamsplit") return cmd_beamsplit(ctx).dump();
    if (name == "selftest") return cmd_selftest(ctx, nullptr).dump();
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Rydberg pair gauge-field simulations";
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("version", &version_string);
    m.def("run_command", &run_command, py::arg("name"), py::arg("config") = "", py::arg("out_dir") = ".",
          py::arg("threads") = 1, py::arg("seed") = py::none(),
          "Runs a CLI subcommand and returns its JSON summary as text.");

    m.def(
        "eigenvalues",
        [](double x, double y, double z, double Delta_bar, double delta_bar, const std::string& kind) {
            return Eigen::VectorXd(eigh16(total_internal_hamiltonian({x, y, z}, scheme(Delta_bar, delta_bar, kind))).values);
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("Delta_bar") = -3.0, py::arg("delta_bar") = -1.0,
        py::arg("kind") = "inner");

    m.def(
        "hamiltonian",
        [](double x, double y, double z, double Delta_bar, double delta_bar, const std::string& kind) {
            return Eigen::MatrixXcd(total_internal_hamiltonian({x, y, z}, scheme(Delta_bar, delta_bar, kind)));
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("Delta_bar") = -3.0, py::arg("delta_bar") = -1.0,
        py::arg("kind") = "inner");

    m.def(
        "locate_degeneracy",
        [](double z0, double z1, double Delta_bar) {
            const auto d = locate_degeneracy_on_axis(abelian_band(), z0, z1, StarkScheme::standard(Delta_bar));
            return py::dict(py::arg("z") = d.z, py::arg("gap") = d.gap);
        },
        py::arg("z0") = 0.3, py::arg("z1") = 1.8, py::arg("Delta_bar") = -3.0);

    m.def(
        "locate_well",
        [](double r0, double r1, double Delta_bar) {
            const auto w = locate_well(planar_lower_band(), r0, r1, StarkScheme::standard(Delta_bar));
            return py::dict(py::arg("R_min") = w.R_min, py::arg("energy") = w.energy, py::arg("depth") = w.depth);
        },
        py::arg("r0") = 0.6, py::arg("r1") = 2.0, py::arg("Delta_bar") = -3.0);

    m.def(
        "locate_avoided_crossing",
        [](double r0, double r1, double Delta_bar) {
            const auto c = locate_avoided_crossing(planar_lower_band(), r0, r1, StarkScheme::standard(Delta_bar));
            return py::dict(py::arg("R") = c.R, py::arg("gap") = c.gap);
        },
        py::arg("r0") = 1.2, py::arg("r1") = 1.5, py::arg("Delta_bar") = -1.16);

    m.def(
        "chern_number",
        [](std::array<double, 3> c, double radius, int n_theta, int n_phi, double Delta_bar) {
            const auto r = chern_number({c[0], c[1], c[2]}, radius, n_theta, n_phi, abelian_band(),
                                        StarkScheme::standard(Delta_bar));
            return py::dict(py::arg("chern") = r.chern, py::arg("raw") = r.raw, py::arg("residual") = r.residual,
                            py::arg("min_gap") = r.min_gap);
        },
        py::arg("center"), py::arg("radius") = 0.1, py::arg("n_theta") = 60, py::arg("n_phi") = 120,
        py::arg("Delta_bar") = -3.0);

    m.def(
        "abelian_curvature",
        [](double x, double y, double z, double Delta_bar) {
            return Eigen::Vector3d(abelian_curvature({x, y, z}, abelian_band(), StarkScheme::standard(Delta_bar)));
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("Delta_bar") = -3.0);

    m.def("mass_parameter", [](const std::string& name) {
        if (name == "Na23") return mass_parameter(Species::sodium());
        if (name == "K39") return mass_parameter(Species::potassium());
        throw ConfigError("unknown species '" + name + "' (Na23 or K39)");
    });
}
