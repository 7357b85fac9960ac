#include "rydgauge/wavepacket.hpp"

#include "rydgauge/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

using namespace rydgauge;

namespace {

double mean_x(const SpinorField2D& f, int c) {
    double s = 0.0, n = 0.0;
    for (int iy = 0; iy < f.grid.N; ++iy)
        for (int ix = 0; ix < f.grid.N; ++ix) {
            const double w = std::norm(f.at(c, f.grid.index(ix, iy)));
            s += w * f.grid.coord(ix);
            n += w;
        }
    return s / n;
}

double overlap_distance(const SpinorField2D& a, const SpinorField2D& b) {
    double d = 0.0;
    for (size_t k = 0; k < a.psi.size(); ++k) d = std::max(d, std::abs(a.psi[k] - b.psi[k]));
    return d;
}

const Grid2D small_grid{2.2, 128};
constexpr double kMass = 78001.0;

}  // namespace

TEST_CASE("grid geometry") {
    const Grid2D g{2.0, 16};
    CHECK(g.dx() == doctest::Approx(0.25));
    CHECK(g.coord(8) == 0.0);
    CHECK(g.coord(0) == doctest::Approx(-2.0));
    CHECK_THROWS_AS((Grid2D{2.0, 7}).validate(), ConfigError);
}

TEST_CASE("Gaussian packet is normalised and has the requested FWHM") {
    const Grid2D g{3.2, 256};
    const SpinorField2D f = gaussian_packet(g, 0.0, 0.0, 0.6, 1);
    const Populations p = populations(f);
    CHECK(p.P1 == 0.0);
    CHECK(p.P2 == doctest::Approx(1.0).epsilon(1e-12));
    // |psi|^2 along the x axis drops to half its peak at x = FWHM / 2
    const double peak = std::norm(f.at(1, g.index(128, 128)));
    const double half_max = std::norm(f.at(1, g.index(128 + static_cast<int>(std::lround(0.3 / g.dx())), 128)));
    CHECK(half_max / peak == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("free packet spreads by the free-particle law") {
    const Grid2D g{6.0, 128};
    const FieldMaps maps = free_maps(g);
    const double s0 = 0.4, M = 2.0, t = 1.0;
    SpinorField2D f = gaussian_packet(g, 0.0, 0.0, s0 * 2.0 * std::sqrt(2.0 * std::log(2.0)), 0, &maps);
    propagate(f, maps, M, 0.5, 2, 1, nullptr, false);
    double m2 = 0.0;
    for (int iy = 0; iy < g.N; ++iy)
        for (int ix = 0; ix < g.N; ++ix) m2 += std::norm(f.at(0, g.index(ix, iy))) * g.coord(ix) * g.coord(ix);
    m2 *= g.dx() * g.dx();
    const double expect = s0 * std::sqrt(1.0 + std::pow(t / (2.0 * M * s0 * s0), 2));
    CHECK(std::sqrt(m2) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("displaced packet in a harmonic trap returns after one period") {
    const Grid2D g{5.0, 64};
    FieldMaps maps = free_maps(g);
    const double M = 1.0, w = 2.0, x0 = 1.0;
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const double x = g.coord(static_cast<int>(k % g.N)), y = g.coord(static_cast<int>(k / g.N));
        const double V = 0.5 * M * w * w * (x * x + y * y);
        maps.V[v] = Eigen::Vector2d(V, V);
        maps.eps[v] = maps.V[v];
    }
    // ground-state width: a coherent state
    const double sigma = std::sqrt(1.0 / (2.0 * M * w));
    SpinorField2D f = gaussian_packet(g, x0, 0.0, sigma * 2.0 * std::sqrt(2.0 * std::log(2.0)), 0, &maps);
    const SpinorField2D f0 = f;
    const double T = 2.0 * M_PI / w;
    propagate(f, maps, M, T / 40.0, 20, 1, nullptr, false);
    CHECK(mean_x(f, 0) == doctest::Approx(-x0).epsilon(1e-8));
    propagate(f, maps, M, T / 40.0, 20, 1, nullptr, false);
    CHECK(mean_x(f, 0) == doctest::Approx(x0).epsilon(1e-8));
    // after a full period the coherent state returns up to the zero-point phase exp(-i w T) = 1 in 2D
    CHECK(overlap_distance(f, f0) < 1e-6);
}

TEST_CASE("Chebyshev propagation is step-size independent") {
    const FieldMaps maps = build_field_maps(small_grid, StarkScheme::standard(-1.16));
    SpinorField2D a = gaussian_packet(small_grid, 1.5, 0.0, 0.2, 1, &maps);
    SpinorField2D b = a;
    propagate(a, maps, kMass, 20.0, 2, 1);
    propagate(b, maps, kMass, 2.0, 20, 1);
    CHECK(overlap_distance(a, b) < 1e-10);
}

TEST_CASE("norm and energy are conserved") {
    const FieldMaps maps = build_field_maps(small_grid, StarkScheme::standard(-1.16));
    SpinorField2D f = gaussian_packet(small_grid, 1.5, 0.0, 0.2, 1, &maps);
    const PropagationStats st = propagate(f, maps, kMass, 10.0, 10, 1);
    CHECK(st.norm_drift < 1e-10);
    CHECK(st.energy_final == doctest::Approx(st.energy_initial).epsilon(1e-10));
    CHECK(st.energy_initial < 0.0);
}

TEST_CASE("populations are invariant under a grid-periodic gauge transformation") {
    // smooth synthetic coupling well resolved by the grid
    const Grid2D g{4.0, 64};
    FieldMaps maps = free_maps(g);
    const double M = 50.0;
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const double x = g.coord(static_cast<int>(k % g.N)), y = g.coord(static_cast<int>(k / g.N));
        const double bump = std::exp(-(x * x + y * y));
        maps.Ax[v] << 0.3 * bump, cd(0.0, 0.8 * bump), cd(0.0, -0.8 * bump), -0.2 * bump;
        maps.Ay[v] << 0.1 * bump, 0.5 * bump, 0.5 * bump, 0.4 * bump;
        maps.V[v] = Eigen::Vector2d(0.5 * (x * x + y * y), 0.3 + 0.5 * (x * x + y * y));
        maps.eps[v] = maps.V[v];
    }
    SpinorField2D f = gaussian_packet(g, 0.5, 0.0, 0.8, 1, &maps);
    FieldMaps maps2 = maps;
    SpinorField2D f2 = f;
    const double k0 = M_PI / g.L;
    gauge_transform(maps2, f2, Eigen::Vector2d(3 * k0, -k0), Eigen::Vector2d(-2 * k0, 5 * k0));
    propagate(f, maps, M, 1.0, 8, 1, nullptr, false);
    propagate(f2, maps2, M, 1.0, 8, 1, nullptr, false);
    const Populations p = populations(f), q = populations(f2);
    CHECK(std::abs(p.P1 - q.P1) < 1e-10);
    CHECK(std::abs(p.P2 - q.P2) < 1e-10);
    CHECK(p.P1 > 1e-3);
    const size_t n = g.size();
    double d = 0.0;
    for (int iy = 0; iy < g.N; ++iy)
        for (int ix = 0; ix < g.N; ++ix) {
            const size_t k = g.index(ix, iy);
            const double x = g.coord(ix), y = g.coord(iy);
            d = std::max(d, std::abs(f.psi[k] * std::polar(1.0, -(3 * k0 * x - k0 * y)) - f2.psi[k]));
            d = std::max(d, std::abs(f.psi[n + k] * std::polar(1.0, -(-2 * k0 * x + 5 * k0 * y)) - f2.psi[n + k]));
        }
    CHECK(d < 1e-8);
}

TEST_CASE("maps report the in-plane avoided crossing and the annulus mask") {
    const FieldMaps maps = build_field_maps(small_grid, StarkScheme::standard(-1.16));
    CHECK(std::abs(maps.min_gap_rho - 1.34) < 0.05);
    CHECK(maps.min_gap > 0.03);
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const double r = std::hypot(small_grid.coord(static_cast<int>(k % small_grid.N)),
                                    small_grid.coord(static_cast<int>(k / small_grid.N)));
        CHECK_MESSAGE((r >= 0.6 && r <= 2.2), "valid point outside the annulus");
        if (r < 0.6 || r > 2.2) break;
    }
}

TEST_CASE("a packet touching the wall violates the boundary contract") {
    const FieldMaps maps = build_field_maps(small_grid, StarkScheme::standard(-1.16));
    SpinorField2D f = gaussian_packet(small_grid, 2.15, 0.0, 0.2, 1, &maps);
    CHECK_THROWS_AS(propagate(f, maps, kMass, 10.0, 1, 1), NumericalError);
}

TEST_CASE("full 16-component propagation matches the two-band model") {
    const FieldMaps maps = build_field_maps(small_grid, StarkScheme::standard(-1.16));
    SpinorField2D f = gaussian_packet(small_grid, 1.45, 0.0, 0.2, 1, &maps);
    FullField2D full = embed_spinor(f, maps);
    const Projection p0 = project(full, maps);
    CHECK(p0.P2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p0.leakage < 1e-12);
    propagate(f, maps, kMass, 10.0, 6, 1);
    const OracleStats st = oracle_propagate(full, maps, kMass, 0.2, 300, 1);
    const Projection p = project(full, maps);
    const Populations q = populations(f);
    CHECK(st.norm_drift < 1e-8);
    CHECK(q.P1 > 1e-4);
    CHECK(std::abs(p.P1 - q.P1) < 0.02);
    CHECK(p.leakage < 0.01);
}

TEST_CASE("density snapshots integrate to the populations and round-trip") {
    const FieldMaps maps = build_field_maps(small_grid, StarkScheme::standard(-1.16));
    SpinorField2D f = gaussian_packet(small_grid, 1.5, 0.0, 0.2, 1, &maps);
    propagate(f, maps, kMass, 10.0, 3, 1);
    const DensitySnapshot s = density_snapshot(f);
    const Populations p = populations(f);
    double n1 = 0.0, n2 = 0.0;
    for (size_t k = 0; k < s.rho1.size(); ++k) n1 += s.rho1[k], n2 += s.rho2[k];
    const double a = small_grid.dx() * small_grid.dx();
    CHECK(n1 * a == doctest::Approx(p.P1).epsilon(1e-12));
    CHECK(n2 * a == doctest::Approx(p.P2).epsilon(1e-12));

    const auto dir = std::filesystem::temp_directory_path() / "rydgauge_snapshot_test";
    std::filesystem::create_directories(dir);
    write_snapshot_binary(s, (dir / "s.bin").string());
    std::ifstream in(dir / "s.bin", std::ios::binary);
    std::int32_t N = 0, bands = 0;
    double L = 0.0, t = 0.0;
    in.read(reinterpret_cast<char*>(&N), sizeof N);
    in.read(reinterpret_cast<char*>(&L), sizeof L);
    in.read(reinterpret_cast<char*>(&t), sizeof t);
    in.read(reinterpret_cast<char*>(&bands), sizeof bands);
    CHECK(N == small_grid.N);
    CHECK(L == small_grid.L);
    CHECK(t == doctest::Approx(30.0));
    CHECK(bands == 2);
    std::vector<double> r1(s.rho1.size());
    in.read(reinterpret_cast<char*>(r1.data()), static_cast<std::streamsize>(r1.size() * sizeof(double)));
    CHECK(r1 == s.rho1);

    write_snapshot_csv(s, (dir / "s.csv").string(), "# test\n");
    std::ifstream csv(dir / "s.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "# test");
    while (std::getline(csv, line) && line.rfind("#", 0) == 0) {
    }
    CHECK(line == "x,y,rho1,rho2");
}

TEST_CASE("beamsplitter configuration checks") {
    BeamsplitterConfig c;
    c.grid = {2.2, 256};
    CHECK_THROWS_AS(run_beamsplitter(c), ConfigError);
    c.grid = {2.2, 512};
    c.t_end = 215.0;
    c.dt = 10.0;
    CHECK_THROWS_AS(run_beamsplitter(c), ConfigError);
    CHECK(beamsplitter_mass(BeamsplitterConfig{}) == doctest::Approx(78001.0).epsilon(1e-4));
    CHECK(beamsplitter_fwhm(BeamsplitterConfig{}) == doctest::Approx(75e-9 / 1.28e-6));
}
