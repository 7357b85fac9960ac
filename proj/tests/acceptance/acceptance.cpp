// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
#include "rydgauge/commands.hpp"
#include "rydgauge/gauge.hpp"
#include "rydgauge/semiclassics.hpp"
#include "rydgauge/spectrum.hpp"
#include "rydgauge/wavepacket.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>

using namespace rydgauge;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f(const char* fmt, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, a);
    return buf;
}

Outcome monopole_quantization() {
    const auto t0 = Clock::now();
    const StarkScheme s = StarkScheme::standard(-3.0);
    const auto up = locate_degeneracy_on_axis(abelian_band(), 0.3, 1.8, s);
    const auto dn = locate_degeneracy_on_axis(abelian_band(), -1.8, -0.3, s);
    const auto cp = chern_number({0.0, 0.0, up.z}, 0.1, 60, 120, abelian_band(), s);
    const auto cm = chern_number({0.0, 0.0, dn.z}, 0.1, 60, 120, abelian_band(), s);
    const auto c0 = chern_number({0.0, 0.0, 0.5}, 0.1, 60, 120, abelian_band(), s);
    const double rt = seconds_since(t0);
    const double res = std::max({cp.residual, cm.residual, c0.residual});
    const bool ok = cp.chern == 1 && cm.chern == -1 && c0.chern == 0 && res < 0.05 && rt < 120.0;
    return {ok, "C+ = " + std::to_string(cp.chern) + ", C- = " + std::to_string(cm.chern) +
                    ", off-monopole = " + std::to_string(c0.chern) + f(", max residual %.2e", res) +
                    f(", %.1f s", rt)};
}

Outcome monopole_location() {
    const StarkScheme s = StarkScheme::standard(-3.0);
    const auto up = locate_degeneracy_on_axis(abelian_band(), 0.3, 1.8, s);
    const auto dn = locate_degeneracy_on_axis(abelian_band(), -1.8, -0.3, s);
    const bool ok = std::abs(up.z - 0.98) < 0.05 && std::abs(dn.z + 0.98) < 0.05;
    return {ok, f("z+ = %.6f", up.z) + f(", z- = %.6f", dn.z) + " (target +-0.98 +- 0.05)"};
}

Outcome symmetry_null() {
    const StarkScheme s = StarkScheme::standard(-1.0);
    double amax = 0.0, bmax = 0.0;
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            const double rho = 2.0 * (i + 0.5) / 50.0, z = -2.0 + 4.0 * (j + 0.5) / 50.0;
            const Position3 p{rho, 0.0, z};
            const auto a = adiabatic_point(p, s, abelian_band().sector, GaugeTag::RealAtPhiZero);
            amax = std::max(amax, std::abs(a.jz(abelian_band().index) / rho));
            bmax = std::max(bmax, abelian_curvature(p, abelian_band(), s).norm());
        }
    return {amax < 1e-8 && bmax < 1e-8, f("max |A_phi| = %.2e", amax) + f(", max |B| = %.2e", bmax)};
}

Outcome abelian_structure() {
    const StarkScheme s = StarkScheme::standard(-3.0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> rr(0.3, 2.0), zz(-2.0, 2.0), ph(0.0, 2.0 * M_PI);
    double rz = 0.0, dphi = 0.0;
    int n = 0;
    while (n < 100) {
        const Position3 p = Position3::cylindrical(rr(rng), ph(rng), zz(rng));
        const auto a = adiabatic_point(p, s, abelian_band().sector);
        const int b = abelian_band().index;
        if (std::min(a.values(b) - a.values(b - 1), a.values(b + 1) - a.values(b)) < 1e-3) continue;
        const auto g = berry_connection(p, single_band(abelian_band()), s);
        rz = std::max({rz, std::abs(g.A[0](0, 0)), std::abs(g.A[2](0, 0))});
        const double construct = a.jz(b) / p.rho();
        dphi = std::max(dphi, std::abs(construct - azimuthal_connection_fd(p, abelian_band(), s)));
        ++n;
    }
    return {rz < 1e-6 && dphi < 1e-8,
            f("max |A_rho|, |A_z| = %.2e", rz) + f(", max |<J_z>/rho - FD A_phi| = %.2e", dphi)};
}

Outcome deflection() {
    const auto t0 = Clock::now();
    DeflectionConfig c;
    c.trajectory.mass = mass_parameter(Species::sodium());
    c.trajectory.record_every = 100;
    const DeflectionResult r = deflection_experiment(c);
    const double rt = seconds_since(t0);
    const bool ok = std::abs(r.report_dy[0] - 0.1) <= 0.03 && std::abs(r.report_dy[1] - 0.3) <= 0.09 &&
                    r.mirror_error < 1e-8 && r.energy_drift < 1e-6 && r.L_drift < 1e-3 && rt < 300.0 &&
                    !r.minus.truncated && !r.plus.truncated;
    return {ok, f("dy(238) = %.5f", r.report_dy[0]) + f(", dy(483) = %.5f", r.report_dy[1]) +
                    f(", mirror %.1e", r.mirror_error) + f(", energy drift %.1e", r.energy_drift) +
                    f(", L drift %.1e", r.L_drift) + f(", max eta %.3f", r.max_eta) + f(", %.1f s", rt)};
}

struct BeamsplitRuns {
    BeamsplitterResult coarse, fine;
    double coarse_seconds = 0.0, fine_seconds = 0.0;
    bool fine_done = false;
    std::string fine_error;
};

BeamsplitRuns beamsplitter_runs(int threads, bool with_fine) {
    BeamsplitRuns b;
    BeamsplitterConfig c;
    c.threads = threads;
    c.measure_fft = true;
    c.record_every = 2;
    c.oracle = true;
    c.oracle_N = 512;
    c.oracle_dt = 0.1;
    auto t0 = Clock::now();
    b.coarse = run_beamsplitter(c);
    b.coarse_seconds = seconds_since(t0);
    if (with_fine) {
        c.oracle = false;
        c.grid.N = 1024;
        t0 = Clock::now();
        try {
            b.fine = run_beamsplitter(c);
            b.fine_done = true;
        } catch (const std::exception& e) {
            b.fine_error = e.what();
        }
        b.fine_seconds = seconds_since(t0);
    }
    return b;
}

Outcome beamsplitter(const BeamsplitRuns& b) {
    const auto& r = b.coarse;
    bool ok = std::abs(r.final.P2 - 0.527) <= 0.05 && std::abs(r.final.P1 - 0.473) <= 0.05 &&
              r.stats.norm_drift < 1e-6 && b.coarse_seconds < 1800.0;
    std::string d = f("(P2, P1) = (%.4f", r.final.P2) + f(", %.4f)", r.final.P1) +
                    f(", norm drift %.1e", r.stats.norm_drift);
    d += f(", N=512 run including the oracle %.0f s", b.coarse_seconds);
    if (b.fine_done) {
        const double delta = std::max(std::abs(b.fine.final.P1 - r.final.P1), std::abs(b.fine.final.P2 - r.final.P2));
        ok = ok && delta < 0.005;
        d += f(", N=1024 P2 = %.4f", b.fine.final.P2) + f(", grid delta %.1e", delta) +
             f(" (%.0f s)", b.fine_seconds);
    } else {
        ok = false;
        d += ", N=1024 certification not run" + (b.fine_error.empty() ? std::string() : ": " + b.fine_error);
    }
    return {ok, d};
}

Outcome oracle(const BeamsplitRuns& b) {
    const auto& r = b.coarse;
    if (!r.has_oracle) return {false, "oracle not run"};
    const double diff = std::max(std::abs(r.oracle_final.P1 - r.final.P1), std::abs(r.oracle_final.P2 - r.final.P2));
    return {diff < 0.02 && r.max_leakage < 0.01,
            f("oracle (P2, P1) = (%.4f", r.oracle_final.P2) + f(", %.4f)", r.oracle_final.P1) +
                f(", max difference %.1e", diff) + f(", max leakage %.1e", r.max_leakage)};
}

Outcome nonabelian_structure() {
    const StarkScheme s = StarkScheme::standard(-1.16);
    double viol = 0.0, csym = 0.0, cmax = 0.0;
    for (int i = 0; i <= 30; ++i) {
        const double R = 1.2 + 0.3 * i / 30.0;
        const auto g = berry_connection({R, 0.0, 0.0}, nonabelian_pair(), s);
        const auto& A1 = g.A[0];
        const auto& A2 = g.A[1];
        viol = std::max({viol, std::abs(A1(0, 0)), std::abs(A1(1, 1)), std::abs(A1(0, 1).real()),
                         std::abs(A1(1, 0).real()), A2.imag().cwiseAbs().maxCoeff(), g.A[2].cwiseAbs().maxCoeff()});
        const Eigen::Matrix2cd C = commutator_term(R, s);
        csym = std::max({csym, std::abs(C(0, 0) + C(1, 1)), std::abs(C(0, 1) - C(1, 0))});
        cmax = std::max(cmax, C.cwiseAbs().maxCoeff());
    }
    return {viol < 1e-6 && csym < 1e-8 && cmax > 0.0,
            f("max violating component %.1e", viol) + f(", C symmetry defect %.1e", csym) + f(", max |C| = %.3f", cmax)};
}

Outcome avoided_crossing() {
    const auto c = locate_avoided_crossing(planar_lower_band(), 1.2, 1.5, StarkScheme::standard(-1.16));
    return {std::abs(c.R - 1.33) <= 0.05, f("R = %.5f", c.R) + f(", gap %.5f", c.gap)};
}

Outcome thermal(int threads) {
    const auto t0 = Clock::now();
    ThermalConfig tc;
    tc.deflection.trajectory.mass = mass_parameter(Species::sodium());
    tc.deflection.trajectory.dt = 0.1;
    tc.deflection.threads = threads;
    tc.temperatures_nK = {1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0};
    tc.n_samples = 32;
    tc.seed = 1;
    tc.sigma_v_per_sqrt_nK = thermal_velocity_scale(Species::sodium());
    const ThermalResult r = thermal_deflection_scan(tc);
    const bool ok = r.crossing_nK >= 10.0 && r.crossing_nK <= 1000.0;
    return {ok, f("crossing at %.1f nK", r.crossing_nK) + f(" (estimate ~100 nK), dy(238) = %.4f", r.deterministic_dy) +
                    f(", %.0f s", seconds_since(t0))};
}

Outcome property_suite(int threads) {
    const auto t0 = Clock::now();
    const auto checks = run_selftest(threads);
    const double rt = seconds_since(t0);
    bool ok = rt < 120.0;
    std::string failed;
    for (const auto& c : checks)
        if (!c.passed) ok = false, failed += " " + c.name;
    return {ok, std::to_string(checks.size()) + " checks" + (failed.empty() ? ", all passed" : ", failed:" + failed) +
                    f(", %.1f s", rt)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int threads = 1;
    std::vector<int> only;
    bool skip_fine = false;
    app.add_option("--threads", threads)->check(CLI::PositiveNumber);
    app.add_option("--only", only, "run only these criteria");
    app.add_flag("--skip-fine-grid", skip_fine, "omit the N=1024 certification run");
    CLI11_PARSE(app, argc, argv);
    const std::set<int> selected(only.begin(), only.end());
    auto want = [&](int k) { return selected.empty() || selected.count(k); };

    int failures = 0;
    auto report = [&](int k, const std::string& name, const std::function<Outcome()>& run) {
        if (!want(k)) return;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << k << " (" << name << "): " << o.detail
                  << std::endl;
    };

    report(1, "monopole quantization", monopole_quantization);
    report(2, "monopole location", monopole_location);
    report(3, "symmetry null test", symmetry_null);
    report(4, "q=1 connection structure", abelian_structure);
    report(5, "deflection", deflection);
    if (want(6) || want(7)) {
        BeamsplitRuns runs;
        std::string error;
        try {
            runs = beamsplitter_runs(threads, want(6) && !skip_fine);
        } catch (const std::exception& e) {
            error = e.what();
        }
        auto guarded = [&](const std::function<Outcome(const BeamsplitRuns&)>& fn) {
            return [&, fn]() -> Outcome {
                if (!error.empty()) return {false, "exception: " + error};
                return fn(runs);
            };
        };
        report(6, "beamsplitter", guarded(beamsplitter));
        report(7, "oracle equivalence", guarded(oracle));
    }
    report(8, "non-Abelian structure", nonabelian_structure);
    report(9, "avoided crossing", avoided_crossing);
    report(10, "thermal washout", [&] { return thermal(threads); });
    report(11, "property suite", [&] { return property_suite(threads); });
    std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
