#pragma once

#include "rydgauge/spectrum.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace rydgauge {

enum class Dynamics { Ehrenfest, AdiabaticLorentz };
std::string to_string(Dynamics d);
Dynamics dynamics_from_string(const std::string& name);

enum class ForceMethod { Analytic, FiniteDifference };

// -grad eps_b by Hellmann-Feynman. FiniteDifference differentiates H with step h.
Eigen::Vector3d force(const Position3& pos, const StarkScheme& scheme, const BandRef& band = abelian_band(),
                      ForceMethod method = ForceMethod::Analytic, double h = 1e-5);

// -<psi|grad H|psi> for a 16-component state.
Eigen::Vector3d mean_force(const Position3& pos, const Vec16& psi);

struct TrajectoryState {
    double t = 0.0;
    Position3 R;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

struct TrajectoryOptions {
    Dynamics dynamics = Dynamics::AdiabaticLorentz;
    bool with_lorentz = true;  // adiabatic model only; Ehrenfest dynamics carries the field implicitly
    double mass = 24948.0;
    double t_end = 483.0;
    double dt = 0.01;
    int record_every = 10;
    bool monitor = true;  // eta, population and J_z at recorded samples
    std::vector<double> marks;  // times that are always recorded (rounded to the step grid)
    BandRef band = abelian_band();
    StarkScheme scheme = StarkScheme::standard(-3.0);
    double min_distance = 0.3;
    double min_gap = 1e-6;
};

struct TrajectorySample {
    double t = 0.0;
    Position3 R;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    double energy = 0.0;
    double L_tot = 0.0;
    double L_orbital = 0.0;
    double jz = 0.0;
    double eta = 0.0;
    double population = 1.0;  // weight of the tracked band (1 in the adiabatic model)
};

struct Trajectory {
    TrajectoryOptions options;
    std::vector<TrajectorySample> samples;
    bool truncated = false;
    std::string truncation_reason;
    const TrajectorySample& at_time(double t) const;
};

Trajectory integrate_trajectory(const TrajectoryState& init, const TrajectoryOptions& opts);

// eta = |v . A_nb| / (eps_n - eps_b) maximised over the other bands of the sector,
// with A_nb = i <n|grad H|b> / (eps_b - eps_n).
double adiabaticity_ratio(const Position3& pos, const Eigen::Vector3d& v, const BandRef& band,
                          const StarkScheme& scheme);
double adiabaticity_monitor(const Trajectory& traj);
double angular_momentum_audit(const Trajectory& traj);
double orbital_momentum_drift(const Trajectory& traj);
double energy_drift(const Trajectory& traj);  // max |E - E0| / |E0|

struct DeflectionConfig {
    TrajectoryOptions trajectory;
    double x0 = 0.05;
    double z0 = -1.5;
    double v0 = 195.0;  // in units hbar / R0, divided by the mass parameter
    std::vector<double> report_times{238.0, 483.0};
    int threads = 1;
};

struct DeflectionResult {
    DeflectionConfig config;
    Trajectory minus;  // started at +x0 e_x
    Trajectory plus;   // started at -x0 e_x
    std::vector<double> times, y_plus, y_minus, dy;
    std::vector<double> report_dy;
    double max_eta = 0.0;
    double energy_drift = 0.0;
    double L_drift = 0.0;
    double orbital_drift = 0.0;
    double mirror_error = 0.0;
    double min_population = 1.0;
};

DeflectionResult deflection_experiment(const DeflectionConfig& cfg);

struct ThermalConfig {
    DeflectionConfig deflection;
    std::vector<double> temperatures_nK{0.0, 10.0, 30.0, 100.0, 300.0, 1000.0};
    int n_samples = 16;
    std::uint64_t seed = 0;
    double t_star = 238.0;
    double sigma_v_per_sqrt_nK = 0.0;  // dimensionless velocity spread at 1 nK
};

struct ThermalRow {
    double T_nK = 0.0;
    double sigma_v = 0.0;
    double mean_y = 0.0;  // mean of y+ - y-
    double std_y = 0.0;
    int n = 0;
};

struct ThermalResult {
    std::vector<ThermalRow> rows;
    double deterministic_dy = 0.0;
    double crossing_nK = -1.0;  // negative when no crossing inside the scanned range
};

// sqrt(kB T / mu) / (R0 |delta|) at T = 1 nK.
double thermal_velocity_scale(const Species& species);
ThermalResult thermal_deflection_scan(const ThermalConfig& cfg);

}  // namespace rydgauge
