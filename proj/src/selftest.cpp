#include "rydgauge/commands.hpp"

#include "rydgauge/gauge.hpp"
#include "rydgauge/spectrum.hpp"
#include "rydgauge/wavepacket.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

namespace rydgauge {

namespace {

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
    try {
        CheckResult r = body();
        r.name = name;
        return r;
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

std::vector<Position3> sample_points(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Position3> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Position3 p{u(rng), u(rng), u(rng)};
        if (p.norm() > 0.5) pts.push_back(p);
    }
    return pts;
}

CheckResult hermiticity() {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (const auto& p : sample_points(rng, 20)) {
        const Mat16 H = total_internal_hamiltonian(p, StarkScheme::standard(-3.0));
        worst = std::max(worst, (H - H.adjoint()).cwiseAbs().maxCoeff());
    }
    return {"", worst < 1e-13, fmt("max |H - H^dagger| = %.3e", worst)};
}

CheckResult cg_orthogonality() {
    // j1 = 1, j2 = 1/2 coupled to J = 3/2, 1/2.
    double worst = 0.0;
    for (int J : {3, 1})
        for (int Jp : {3, 1})
            for (int M = -J; M <= J; M += 2)
                for (int Mp = -Jp; Mp <= Jp; Mp += 2) {
                    double s = 0.0;
                    for (int m1 = -2; m1 <= 2; m1 += 2)
                        for (int m2 = -1; m2 <= 1; m2 += 2)
                            s += clebsch_gordan(half(2), half(m1), half(1), half(m2), half(J), half(M)) *
                                 clebsch_gordan(half(2), half(m1), half(1), half(m2), half(Jp), half(Mp));
                    worst = std::max(worst, std::abs(s - (J == Jp && M == Mp ? 1.0 : 0.0)));
                }
    return {"", worst < 1e-14, fmt("max orthonormality defect = %.3e", worst)};
}

CheckResult eigen_residuals() {
    std::mt19937_64 rng(12);
    double worst = 0.0;
    for (const auto& p : sample_points(rng, 20)) {
        const Mat16 H = total_internal_hamiltonian(p, StarkScheme::standard(-3.0));
        const Eigh e = eigh16(H);
        const Eigen::MatrixXcd R = H * e.vectors - e.vectors * e.values.asDiagonal();
        worst = std::max(worst, R.cwiseAbs().maxCoeff());
    }
    return {"", worst < 1e-11, fmt("max |H v - e v| = %.3e", worst)};
}

CheckResult rotational_covariance() {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    double worst = 0.0;
    for (const auto& p : sample_points(rng, 20)) {
        const StarkScheme s = StarkScheme::standard(-3.0);
        const Eigh a = eigh16(total_internal_hamiltonian(p, s));
        const Eigh b = eigh16(total_internal_hamiltonian(Position3::cylindrical(p.rho(), ang(rng), p.z), s));
        worst = std::max(worst, (a.values - b.values).cwiseAbs().maxCoeff());
    }
    return {"", worst < 1e-12, fmt("max spectrum change under rotation about z = %.3e", worst)};
}

CheckResult chern_gauge_invariance() {
    const StarkScheme s = StarkScheme::standard(-3.0);
    const BandRef band = abelian_band();
    const auto deg = locate_degeneracy_on_axis(band, 0.3, 1.8, s);
    const Position3 c{0.0, 0.0, deg.z};
    const double r = 0.1;
    const int nt = 30, np = 60;
    std::vector<std::vector<Eigen::VectorXcd>> grid(nt + 1, std::vector<Eigen::VectorXcd>(np));
    for (int i = 0; i <= nt; ++i)
        for (int j = 0; j < np; ++j) {
            const double th = M_PI * i / nt, ph = 2.0 * M_PI * j / np;
            const Position3 p{c.x + r * std::sin(th) * std::cos(ph), c.y + r * std::sin(th) * std::sin(ph),
                              c.z + r * std::cos(th)};
            grid[i][j] = adiabatic_point(p, s, band.sector, GaugeTag::RawSolver).vectors.col(band.index);
        }
    const double f0 = plaquette_flux(grid).flux;
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    for (auto& row : grid)
        for (auto& v : row) v *= std::polar(1.0, ang(rng));
    const double f1 = plaquette_flux(grid).flux;
    const bool ok = std::abs(f1 - f0) < 1e-10 && std::abs(std::abs(f0) - 1.0) < 0.05;
    return {"", ok, fmt("flux %.6f", f0) + fmt(", after random rephasing %.6f", f1)};
}

CheckResult free_dispersion() {
    const Grid2D g{6.0, 128};
    const FieldMaps maps = free_maps(g);
    const double sigma0 = 0.5, mass = 1.0, t = 0.5;
    const double fwhm = sigma0 * 2.0 * std::sqrt(2.0 * std::log(2.0));
    SpinorField2D f = gaussian_packet(g, 0.0, 0.0, fwhm, 0, &maps);
    propagate(f, maps, mass, 0.1, 5, 1, nullptr, false);
    double m2 = 0.0, n = 0.0;
    for (int iy = 0; iy < g.N; ++iy)
        for (int ix = 0; ix < g.N; ++ix) {
            const double w = std::norm(f.at(0, g.index(ix, iy)));
            m2 += w * g.coord(ix) * g.coord(ix);
            n += w;
        }
    const double sigma = std::sqrt(m2 / n);
    const double expect = sigma0 * std::sqrt(1.0 + std::pow(t / (2.0 * mass * sigma0 * sigma0), 2));
    const double rel = std::abs(sigma / expect - 1.0);
    return {"", rel < 1e-4, fmt("sigma(t) = %.8f", sigma) + fmt(", free-particle law %.8f", expect)};
}

CheckResult jz_canary() {
    const auto a = adiabatic_point({1.0, 0.0, 0.3}, StarkScheme::standard(-3.0), abelian_band().sector,
                                   GaugeTag::RealAtPhiZero);
    const double jz = a.jz(abelian_band().index);
    return {"", std::abs(jz - 0.158839033170) < 1e-8, fmt("<J_z> at (1, 0, 0.3) = %.12f (pinned 0.158839033170)", jz)};
}

CheckResult well_canary() {
    const WellResult w = locate_well(planar_lower_band(), 0.6, 2.0, StarkScheme::standard(-3.0));
    return {"", std::abs(w.R_min - 0.845) < 0.005, fmt("in-plane well at R = %.5f (expected 0.845)", w.R_min)};
}

}  // namespace

std::vector<CheckResult> run_selftest(int) {
    std::vector<CheckResult> out;
    out.push_back(guarded("hermiticity", hermiticity));
    out.push_back(guarded("clebsch_gordan_orthogonality", cg_orthogonality));
    out.push_back(guarded("eigen_residuals", eigen_residuals));
    out.push_back(guarded("rotational_covariance", rotational_covariance));
    out.push_back(guarded("chern_gauge_invariance", chern_gauge_invariance));
    out.push_back(guarded("free_packet_dispersion", free_dispersion));
    out.push_back(guarded("jz_sign_canary", jz_canary));
    out.push_back(guarded("well_position_canary", well_canary));
    return out;
}

}  // namespace rydgauge
