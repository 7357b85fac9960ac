#include "rydgauge/semiclassics.hpp"

#include "rydgauge/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace rydgauge;

namespace {

double band_energy(const Eigen::Vector3d& r, const StarkScheme& s) {
    return adiabatic_point(Position3::from(r), s, abelian_band().sector).values(abelian_band().index);
}

}  // namespace

TEST_CASE("analytic force is minus the energy gradient") {
    const StarkScheme s = StarkScheme::standard(-3.0);
    for (const Eigen::Vector3d r : {Eigen::Vector3d(0.3, 0.2, -1.2), Eigen::Vector3d(-0.5, 0.7, 0.4)}) {
        const Eigen::Vector3d F = force(Position3::from(r), s);
        const double h = 1e-5;
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e(k) = h;
            const double fd = -(band_energy(r + e, s) - band_energy(r - e, s)) / (2.0 * h);
            CHECK(F(k) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
        const Eigen::Vector3d Ffd = force(Position3::from(r), s, abelian_band(), ForceMethod::FiniteDifference);
        CHECK((F - Ffd).norm() < 1e-6 * (1.0 + F.norm()));
    }
}

TEST_CASE("mean force of an eigenvector equals the band force") {
    const StarkScheme s = StarkScheme::standard(-3.0);
    const Position3 p{0.2, -0.3, -1.0};
    const auto a = adiabatic_point(p, s, abelian_band().sector);
    const Vec16 psi = a.vectors.col(abelian_band().index);
    CHECK((mean_force(p, psi) - force(p, s)).norm() < 1e-10);
}

TEST_CASE("short adiabatic trajectory conserves energy and the total angular momentum") {
    TrajectoryOptions o;
    o.t_end = 60.0;
    o.dt = 0.02;
    o.record_every = 50;
    TrajectoryState init;
    init.R = {0.05, 0.0, -1.5};
    init.v = Eigen::Vector3d(0.0, 0.0, 195.0 / o.mass);
    const Trajectory t = integrate_trajectory(init, o);
    CHECK_FALSE(t.truncated);
    CHECK(energy_drift(t) < 1e-8);
    CHECK(angular_momentum_audit(t) < 1e-6);
    CHECK(adiabaticity_monitor(t) < 0.2);
    CHECK(t.samples.back().t == doctest::Approx(60.0));
}

TEST_CASE("without the Lorentz term a packet launched in the xz plane stays there") {
    TrajectoryOptions o;
    o.t_end = 100.0;
    o.dt = 0.05;
    o.with_lorentz = false;
    TrajectoryState init;
    init.R = {0.05, 0.0, -1.5};
    init.v = Eigen::Vector3d(0.0, 0.0, 195.0 / o.mass);
    const Trajectory t = integrate_trajectory(init, o);
    double ymax = 0.0;
    for (const auto& s : t.samples) ymax = std::max(ymax, std::abs(s.R.y));
    CHECK(ymax < 1e-12);
    o.with_lorentz = true;
    const Trajectory u = integrate_trajectory(init, o);
    CHECK(std::abs(u.samples.back().R.y) > 1e-6);
}

TEST_CASE("Ehrenfest and adiabatic models agree for slow motion") {
    TrajectoryOptions o;
    o.t_end = 40.0;
    o.dt = 0.02;
    TrajectoryState init;
    init.R = {0.05, 0.0, -1.5};
    init.v = Eigen::Vector3d(0.0, 0.0, 195.0 / o.mass);
    const Trajectory a = integrate_trajectory(init, o);
    o.dynamics = Dynamics::Ehrenfest;
    const Trajectory e = integrate_trajectory(init, o);
    CHECK((a.samples.back().R.vec() - e.samples.back().R.vec()).norm() < 1e-4);
    CHECK(e.samples.back().population > 0.99);
}

TEST_CASE("trajectories stop at the minimum distance") {
    TrajectoryOptions o;
    o.t_end = 200.0;
    o.dt = 0.05;
    TrajectoryState init;
    init.R = {0.0, 0.0, 1.5};
    init.v = Eigen::Vector3d(0.0, 0.0, -0.5);
    o.min_distance = 1.2;
    const Trajectory t = integrate_trajectory(init, o);
    CHECK(t.truncated);
    CHECK_FALSE(t.truncation_reason.empty());
}

TEST_CASE("thermal velocity scale for sodium") {
    const double mu = 0.5 * 22.98976928 * 1.66053906660e-27;
    const double expect = std::sqrt(1.380649e-23 * 1e-9 / mu) / (0.75e-6 * 2.0 * M_PI * 39.0e6);
    CHECK(thermal_velocity_scale(Species::sodium()) == doctest::Approx(expect).epsilon(1e-12));
    ThermalConfig tc;
    tc.n_samples = 4;
    CHECK_THROWS_AS(thermal_deflection_scan(tc), ConfigError);
}

TEST_CASE("dynamics names round-trip") {
    CHECK(dynamics_from_string(to_string(Dynamics::Ehrenfest)) == Dynamics::Ehrenfest);
    CHECK(dynamics_from_string(to_string(Dynamics::AdiabaticLorentz)) == Dynamics::AdiabaticLorentz);
    CHECK_THROWS_AS(dynamics_from_string("bogus"), ConfigError);
}
