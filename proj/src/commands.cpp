#include "rydgauge/commands.hpp"

#include "rydgauge/errors.hpp"
#include "rydgauge/gauge.hpp"
#include "rydgauge/semiclassics.hpp"
#include "rydgauge/spectrum.hpp"
#include "rydgauge/wavepacket.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace rydgauge {

namespace {

std::string out_path(const CommandContext& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out_dir);
    return (std::filesystem::path(ctx.out_dir) / name).string();
}

void warn_positive_shifts(const StarkScheme& s) {
    if (s.kind != StarkKind::Custom && (s.delta_bar > 0.0 || s.Delta_bar > 0.0))
        std::cerr << "warning: Stark shifts are expected to be negative (delta_bar = " << s.delta_bar
                  << ", Delta_bar = " << s.Delta_bar << ")\n";
}

json position_json(const Position3& p) { return json::array({p.x, p.y, p.z}); }

std::string delta_tag(double D) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "D%+.3f", D);
    return buf;
}

json well_json(const WellResult& w) {
    return {{"R_min", w.R_min},         {"energy", w.energy}, {"barrier_R", w.barrier_R},
            {"barrier_energy", w.barrier_energy}, {"depth", w.depth}, {"global_index", w.global_index}};
}

Position3 parse_point(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("points must be [x, y, z] arrays");
    for (const auto& e : j)
        if (!e.is_number()) throw ConfigError("points must be [x, y, z] arrays");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json cmd_potentials(const CommandContext& ctx) {
    const ConfigView cfg(ctx.config);
    const StarkScheme base = scheme_from_config(cfg, -3.0);
    warn_positive_shifts(base);
    const Species species = species_from_config(cfg, "Na23");
    const json units = units_block(species, mass_from_config(cfg, species));
    const double r0 = cfg.number("potentials.r_min", 0.3), r1 = cfg.number("potentials.r_max", 3.0);
    const int n = static_cast<int>(cfg.integer("potentials.n", 271));
    const double phi_check = cfg.number("potentials.phi_check", 0.7);
    if (!(r1 > r0) || !(r0 > 0.0) || n < 2) throw ConfigError("potentials cut needs 0 < r_min < r_max and n >= 2");
    const auto deltas = cfg.numbers("potentials.Delta_values", {base.Delta_bar});

    json summary;
    summary["cuts"] = json::array();
    for (double D : deltas) {
        StarkScheme s = base;
        if (s.kind != StarkKind::Custom) s = StarkScheme::make(base.kind, base.delta_bar, D);
        const std::string file = "potentials_cut_" + delta_tag(D) + ".csv";
        std::vector<std::string> cols{"R", "eps1", "eps2", "global1", "global2"};
        for (int k = 0; k < 16; ++k) cols.push_back("e" + std::to_string(k));
        CsvWriter csv(out_path(ctx, file), cols, ctx.config, units);
        double phi_dev = 0.0;
        for (int i = 0; i < n; ++i) {
            const double R = r0 + (r1 - r0) * i / (n - 1);
            const Position3 p{R, 0.0, 0.0};
            const auto lo = adiabatic_point(p, s, planar_lower_band().sector, GaugeTag::RealAtPhiZero);
            const Eigh full = eigh16(total_internal_hamiltonian(p, s));
            std::vector<double> row{R, lo.values(planar_lower_band().index), lo.values(planar_upper_band().index),
                                    static_cast<double>(global_band_index(p, s, planar_lower_band())),
                                    static_cast<double>(global_band_index(p, s, planar_upper_band()))};
            for (int k = 0; k < 16; ++k) row.push_back(full.values(k));
            csv.row(row);
            const Eigh rot = eigh16(total_internal_hamiltonian(Position3::cylindrical(R, phi_check, 0.0), s));
            phi_dev = std::max(phi_dev, (rot.values - full.values).cwiseAbs().maxCoeff());
        }
        csv.close();
        json cut{{"Delta_bar", D}, {"file", file}, {"phi_independence_max_dev", phi_dev}};
        try {
            cut["well"] = well_json(locate_well(planar_lower_band(), cfg.number("potentials.well_r_min", 0.6),
                                                cfg.number("potentials.well_r_max", 2.0), s));
        } catch (const NumericalError& e) {
            cut["well"] = {{"error", e.what()}};
        }
        summary["cuts"].push_back(cut);
    }

    const int ns = static_cast<int>(cfg.integer("potentials.surface_n", 100));
    const double hw = cfg.number("potentials.surface_half_width", 2.5);
    if (ns >= 2) {
        const auto xy = scan_surface(planar_lower_band(), ScanGrid::plane_xy(-hw, hw, ns, -hw, hw, ns), base);
        CsvWriter a(out_path(ctx, "potentials_surface_xy.csv"), {"x", "y", "eps1", "global_index", "tracked"},
                    ctx.config, units);
        for (const auto& p : xy.points) a.row({p.pos.x, p.pos.y, p.energy, double(p.global_index), double(p.track_ok)});
        a.close();
        const auto xz = scan_surface(abelian_band(), ScanGrid::plane_xz(-hw, hw, ns, -hw, hw, ns), base);
        CsvWriter b(out_path(ctx, "potentials_surface_xz.csv"), {"x", "z", "eps1", "global_index", "tracked"},
                    ctx.config, units);
        for (const auto& p : xz.points) b.row({p.pos.x, p.pos.z, p.energy, double(p.global_index), double(p.track_ok)});
        b.close();
        summary["surfaces"] = {{"xy_all_tracked", xy.all_tracked()}, {"xz_all_tracked", xz.all_tracked()}};
    }
    summary["scheme"] = scheme_to_json(base);
    write_json(out_path(ctx, "potentials.json"), summary, ctx.config, units);
    return summary;
}

json cmd_fields(const CommandContext& ctx) {
    const ConfigView cfg(ctx.config);
    const StarkScheme s = scheme_from_config(cfg, -3.0);
    warn_positive_shifts(s);
    const Species species = species_from_config(cfg, "Na23");
    const json units = units_block(species, mass_from_config(cfg, species));
    const int nr = static_cast<int>(cfg.integer("fields.n_rho", 80));
    const int nz = static_cast<int>(cfg.integer("fields.n_z", 160));
    const double rmax = cfg.number("fields.rho_max", 2.0), zmax = cfg.number("fields.z_max", 2.0);
    if (nr < 1 || nz < 1) throw ConfigError("fields grid needs positive sizes");
    json summary;
    {
        CsvWriter csv(out_path(ctx, "fields_B_map.csv"), {"rho", "z", "B_rho", "B_z", "A_phi", "eps1", "gap"},
                      ctx.config, units);
        double bmax = 0.0;
        for (int j = 0; j < nz; ++j)
            for (int i = 0; i < nr; ++i) {
                const double rho = rmax * (i + 0.5) / nr, z = -zmax + 2.0 * zmax * (j + 0.5) / nz;
                const Position3 p{rho, 0.0, z};
                const AdiabaticPoint a = adiabatic_point(p, s, abelian_band().sector, GaugeTag::RealAtPhiZero);
                const int b = abelian_band().index;
                const double gap = std::min(a.values(b) - a.values(b - 1), a.values(b + 1) - a.values(b));
                double Br = std::nan(""), Bz = std::nan("");
                if (gap > 1e-6) {
                    const Eigen::Vector3d B = abelian_curvature(p, abelian_band(), s);
                    Br = B(0);
                    Bz = B(2);
                    bmax = std::max(bmax, B.norm());
                }
                csv.row({rho, z, Br, Bz, a.jz(b) / rho, a.values(b), gap});
            }
        csv.close();
        summary["B_map"] = {{"file", "fields_B_map.csv"}, {"max_abs_B", bmax}};
    }
    StarkScheme sna = s;
    const double Dna = cfg.number("fields.nonabelian_Delta", -1.16);
    if (s.kind != StarkKind::Custom) sna = StarkScheme::make(s.kind, s.delta_bar, Dna);
    const double a0 = cfg.number("fields.profile_r_min", 0.7), a1 = cfg.number("fields.profile_r_max", 2.0);
    const int np = static_cast<int>(cfg.integer("fields.profile_n", 131));
    std::vector<double> radii;
    for (int i = 0; i < np; ++i) radii.push_back(a0 + (a1 - a0) * i / std::max(1, np - 1));
    const auto frames = radial_frames(radii, sna, std::min(0.6, a0), std::max(2.2, a1));
    CsvWriter csv(out_path(ctx, "fields_nonabelian_profile.csv"),
                  {"R", "eps1", "eps2", "Arho_11", "Arho_12_im", "Arho_22", "Aphi_11", "Aphi_12", "Aphi_22", "Az_max",
                   "C_11", "C_12", "C_21", "C_22"},
                  ctx.config, units);
    double cmax = 0.0;
    for (const auto& f : frames) {
        const Eigen::Matrix2cd A1 = f.A_rho, A2 = f.A_phi.cast<cd>();
        const Eigen::Matrix2cd C = cd(0.0, 1.0) * (A1 * A2 - A2 * A1);
        const GaugeFieldSample g = berry_connection({f.rho, 0.0, 0.0}, nonabelian_pair(), sna);
        cmax = std::max(cmax, C.cwiseAbs().maxCoeff());
        csv.row({f.rho, f.eps(0), f.eps(1), A1(0, 0).real(), A1(0, 1).imag(), A1(1, 1).real(), A2(0, 0).real(),
                 A2(0, 1).real(), A2(1, 1).real(), g.A[2].cwiseAbs().maxCoeff(), C(0, 0).real(), C(0, 1).real(),
                 C(1, 0).real(), C(1, 1).real()});
    }
    csv.close();
    summary["nonabelian_profile"] = {{"file", "fields_nonabelian_profile.csv"}, {"Delta_bar", Dna}, {"max_abs_C", cmax}};
    summary["scheme"] = scheme_to_json(s);
    write_json(out_path(ctx, "fields.json"), summary, ctx.config, units);
    return summary;
}

json cmd_chern(const CommandContext& ctx) {
    const ConfigView cfg(ctx.config);
    const StarkScheme s = scheme_from_config(cfg, -3.0);
    warn_positive_shifts(s);
    const Species species = species_from_config(cfg, "Na23");
    const json units = units_block(species, mass_from_config(cfg, species));
    const double radius = cfg.number("chern.radius", 0.1);
    const int nt = static_cast<int>(cfg.integer("chern.n_theta", 60));
    const int nph = static_cast<int>(cfg.integer("chern.n_phi", 120));
    std::vector<std::pair<std::string, Position3>> spheres;
    std::vector<std::pair<std::string, double>> radii;
    json located = json::array();
    if (cfg.boolean("chern.locate_monopoles", true)) {
        const auto up = locate_degeneracy_on_axis(abelian_band(), 0.3, 1.8, s);
        const auto dn = locate_degeneracy_on_axis(abelian_band(), -1.8, -0.3, s);
        located.push_back({{"z", up.z}, {"gap", up.gap}});
        located.push_back({{"z", dn.z}, {"gap", dn.gap}});
        spheres.push_back({"R_plus", {0.0, 0.0, up.z}});
        spheres.push_back({"R_minus", {0.0, 0.0, dn.z}});
    }
    if (const json* extra = cfg.find("chern.extra_centers")) {
        if (!extra->is_array()) throw ConfigError("chern.extra_centers must be a list of [x, y, z]");
        for (size_t i = 0; i < extra->size(); ++i) spheres.push_back({"extra_" + std::to_string(i), parse_point((*extra)[i])});
    } else {
        spheres.push_back({"off_monopole", {0.0, 0.0, 0.5}});
    }
    json results = json::array();
    for (const auto& [name, c] : spheres) {
        const ChernResult r = chern_number(c, radius, nt, nph, abelian_band(), s);
        results.push_back({{"name", name},
                           {"center", position_json(c)},
                           {"radius", radius},
                           {"n_theta", nt},
                           {"n_phi", nph},
                           {"chern", r.chern},
                           {"raw", r.raw},
                           {"residual", r.residual},
                           {"max_plaquette_phase", r.max_plaquette_phase},
                           {"min_gap", r.min_gap}});
    }
    json summary{{"degeneracies", located}, {"spheres", results}, {"scheme", scheme_to_json(s)}};
    write_json(out_path(ctx, "chern.json"), summary, ctx.config, units);
    return summary;
}

namespace {

DeflectionConfig deflection_from_config(const ConfigView& cfg, const StarkScheme& s, double mass, int threads) {
    DeflectionConfig d;
    d.trajectory.scheme = s;
    d.trajectory.mass = mass;
    d.trajectory.dynamics = dynamics_from_string(cfg.text("deflect.dynamics", "adiabatic_lorentz"));
    d.trajectory.with_lorentz = cfg.boolean("deflect.with_lorentz", true);
    d.trajectory.dt = cfg.number("deflect.dt", 0.01);
    d.trajectory.t_end = cfg.number("deflect.t_end", 483.0);
    d.trajectory.record_every = static_cast<int>(cfg.integer("deflect.record_every", 100));
    d.x0 = cfg.number("deflect.x0", 0.05);
    d.z0 = cfg.number("deflect.z0", -1.5);
    d.v0 = cfg.number("deflect.v0", 195.0);
    d.report_times = cfg.numbers("deflect.report_times", {238.0, 483.0});
    d.threads = threads;
    if (d.trajectory.t_end > 540.0)
        std::cerr << "warning: t_end " << d.trajectory.t_end << " exceeds the molecular lifetime window (540)\n";
    return d;
}

void write_trajectory(const CommandContext& ctx, const std::string& name, const Trajectory& t, const json& units) {
    CsvWriter csv(out_path(ctx, name), {"t", "x", "y", "z", "vx", "vy", "vz", "energy", "L_tot", "eta"}, ctx.config,
                  units);
    for (const auto& s : t.samples)
        csv.row({s.t, s.R.x, s.R.y, s.R.z, s.v(0), s.v(1), s.v(2), s.energy, s.L_tot, s.eta});
    csv.close();
}

}  // namespace

json cmd_deflect(const CommandContext& ctx) {
    const ConfigView cfg(ctx.config);
    const StarkScheme s = scheme_from_config(cfg, -3.0);
    warn_positive_shifts(s);
    const Species species = species_from_config(cfg, "Na23");
    const double mass = mass_from_config(cfg, species);
    const json units = units_block(species, mass);
    const DeflectionConfig d = deflection_from_config(cfg, s, mass, ctx.threads);
    const DeflectionResult r = deflection_experiment(d);
    write_trajectory(ctx, "trajectory_minus.csv", r.minus, units);
    write_trajectory(ctx, "trajectory_plus.csv", r.plus, units);
    {
        CsvWriter csv(out_path(ctx, "deflection.csv"), {"t", "y_plus", "y_minus", "dy"}, ctx.config, units);
        for (size_t i = 0; i < r.times.size(); ++i) csv.row({r.times[i], r.y_plus[i], r.y_minus[i], r.dy[i]});
        csv.close();
    }
    json reports = json::array();
    for (size_t i = 0; i < d.report_times.size(); ++i) reports.push_back({{"t", d.report_times[i]}, {"dy", r.report_dy[i]}});
    json summary{{"dynamics", to_string(d.trajectory.dynamics)},
                 {"report", reports},
                 {"max_eta", r.max_eta},
                 {"energy_drift", r.energy_drift},
                 {"L_tot_drift", r.L_drift},
                 {"orbital_drift", r.orbital_drift},
                 {"mirror_error", r.mirror_error},
                 {"min_population", r.min_population},
                 {"truncated", r.minus.truncated || r.plus.truncated},
                 {"scheme", scheme_to_json(s)}};
    if (cfg.boolean("deflect.thermal.enabled", false)) {
        ThermalConfig tc;
        tc.deflection = d;
        tc.deflection.trajectory.dt = cfg.number("deflect.thermal.dt", 0.1);
        tc.temperatures_nK = cfg.numbers("deflect.thermal.temperatures_nK", tc.temperatures_nK);
        tc.n_samples = static_cast<int>(cfg.integer("deflect.thermal.n_samples", 32));
        tc.t_star = cfg.number("deflect.thermal.t_star", 238.0);
        if (ctx.seed)
            tc.seed = *ctx.seed;
        else if (cfg.has("deflect.thermal.seed"))
            tc.seed = static_cast<std::uint64_t>(cfg.integer("deflect.thermal.seed", 0));
        else
            throw ConfigError("thermal scan needs deflect.thermal.seed (or --seed)");
        tc.sigma_v_per_sqrt_nK = thermal_velocity_scale(species);
        const ThermalResult tr = thermal_deflection_scan(tc);
        CsvWriter csv(out_path(ctx, "thermal.csv"), {"T", "mean_y", "std_y", "n"}, ctx.config, units);
        for (const auto& row : tr.rows) csv.row({row.T_nK, row.mean_y, row.std_y, double(row.n)});
        csv.close();
        summary["thermal"] = {{"file", "thermal.csv"},
                              {"seed", tc.seed},
                              {"deterministic_dy", tr.deterministic_dy},
                              {"crossing_nK", tr.crossing_nK},
                              {"sigma_v_at_1nK", tc.sigma_v_per_sqrt_nK}};
    }
    write_json(out_path(ctx, "deflect.json"), summary, ctx.config, units);
    return summary;
}

json cmd_beamsplit(const CommandContext& ctx) {
    const ConfigView cfg(ctx.config);
    BeamsplitterConfig bc;
    bc.scheme = scheme_from_config(cfg, -1.16);
    warn_positive_shifts(bc.scheme);
    bc.species = species_from_config(cfg, "K39");
    bc.mass = mass_from_config(cfg, bc.species);
    bc.grid = {cfg.number("beamsplit.L", 2.2), static_cast<int>(cfg.integer("beamsplit.N", 512))};
    bc.maps.r_inner = cfg.number("beamsplit.r_inner", bc.maps.r_inner);
    bc.maps.r_outer = cfg.number("beamsplit.r_outer", bc.grid.L);
    bc.maps.potential_cap = cfg.number("beamsplit.potential_cap", bc.maps.potential_cap);
    bc.dt = cfg.number("beamsplit.dt", bc.dt);
    bc.t_end = cfg.number("beamsplit.t_end", bc.t_end);
    bc.center_x = cfg.number("beamsplit.center_x", bc.center_x);
    bc.center_y = cfg.number("beamsplit.center_y", bc.center_y);
    bc.fwhm_m = cfg.number("beamsplit.fwhm_m", bc.fwhm_m);
    bc.fwhm_is_sigma = cfg.boolean("beamsplit.fwhm_is_sigma", false);
    bc.record_every = static_cast<int>(cfg.integer("beamsplit.record_every", bc.record_every));
    bc.oracle = cfg.boolean("beamsplit.oracle", false);
    bc.oracle_N = static_cast<int>(cfg.integer("beamsplit.oracle_N", bc.grid.N));
    bc.oracle_dt = cfg.number("beamsplit.oracle_dt", bc.oracle_dt);
    bc.measure_fft = cfg.text("beamsplit.fft_planning", "estimate") == "measure";
    bc.threads = ctx.threads;
    const json units = units_block(bc.species, bc.mass);
    const BeamsplitterResult r = run_beamsplitter(bc);

    auto write_trace = [&](const std::string& name, const PopulationTrace& tr) {
        CsvWriter csv(out_path(ctx, name), {"t", "P1", "P2", "norm"}, ctx.config, units);
        for (size_t i = 0; i < tr.t.size(); ++i) csv.row({tr.t[i], tr.P1[i], tr.P2[i], tr.norm[i]});
        csv.close();
    };
    write_trace("populations.csv", r.trace);
    const std::string header = provenance_header(ctx.config, units);
    write_snapshot_csv(r.initial, out_path(ctx, "snapshot_initial.csv"), header);
    write_snapshot_csv(r.final_snapshot, out_path(ctx, "snapshot_final.csv"), header);
    write_snapshot_binary(r.final_snapshot, out_path(ctx, "snapshot_final.bin"));
    json summary{{"P1", r.final.P1},
                 {"P2", r.final.P2},
                 {"norm", r.final.norm},
                 {"norm_drift", r.stats.norm_drift},
                 {"energy_initial", r.stats.energy_initial},
                 {"energy_final", r.stats.energy_final},
                 {"chebyshev_terms", r.stats.chebyshev_terms},
                 {"boundary_fraction", r.stats.boundary_fraction},
                 {"fwhm", r.fwhm},
                 {"mass", r.mass},
                 {"map_min_gap", r.map_min_gap},
                 {"map_min_gap_rho", r.map_min_gap_rho},
                 {"scheme", scheme_to_json(bc.scheme)}};
    if (r.has_oracle) {
        write_trace("oracle_populations.csv", r.oracle_trace);
        summary["oracle"] = {{"P1", r.oracle_final.P1},
                             {"P2", r.oracle_final.P2},
                             {"norm", r.oracle_final.norm},
                             {"leakage", r.oracle_final.leakage},
                             {"max_leakage", r.max_leakage},
                             {"norm_drift", r.oracle_stats.norm_drift},
                             {"N", bc.oracle_N},
                             {"dt", bc.oracle_dt}};
    }
    write_json(out_path(ctx, "beamsplit.json"), summary, ctx.config, units);
    return summary;
}

json cmd_selftest(const CommandContext& ctx, bool* all_passed) {
    const auto checks = run_selftest(ctx.threads);
    json list = json::array();
    bool ok = true;
    for (const auto& c : checks) {
        list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        ok = ok && c.passed;
    }
    if (all_passed) *all_passed = ok;
    return {{"checks", list}, {"all_passed", ok}, {"version", version_string()}};
}

}  // namespace rydgauge
