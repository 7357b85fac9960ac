#include "rydgauge/semiclassics.hpp"

#include "rydgauge/errors.hpp"
#include "rydgauge/gauge.hpp"
#include "rydgauge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rydgauge {

namespace {

using MatS = Eigen::MatrixXcd;
using VecS = Eigen::VectorXcd;

// Sector-coordinate phases of exp(-i phi J_z).
Eigen::VectorXcd rotation_phases(Sector sector, double phi) {
    const Eigen::VectorXd& jz = sector_jz(sector);
    Eigen::VectorXcd u(jz.size());
    for (int k = 0; k < jz.size(); ++k) u(k) = std::polar(1.0, -phi * jz(k));
    return u;
}

// Eigenpairs of the sector block at pos, eigenvectors in sector coordinates (rotated gauge).
struct SectorEigen {
    Eigen::VectorXd values;
    MatS vectors;
};

SectorEigen sector_eigen(const Position3& pos, const StarkScheme& scheme, Sector sector) {
    const MeridianEigh m = meridian_eigh(pos.rho(), pos.z, scheme, sector);
    SectorEigen e;
    e.values = m.values;
    e.vectors = rotation_phases(sector, pos.phi()).asDiagonal() * m.vectors.cast<cd>();
    return e;
}

using SectorProducts = std::array<std::array<MatS, 3>, 3>;

const SectorProducts& sector_products(Sector sector) {
    static const std::array<SectorProducts, 7> table = [] {
        std::array<SectorProducts, 7> t;
        const auto& K = dipole_products();
        for (int s = 0; s < 7; ++s) {
            const Eigen::MatrixXcd B = sector_basis(static_cast<Sector>(s)).cast<cd>();
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) t[s][i][j] = B.adjoint() * K[i][j] * B;
        }
        return t;
    }();
    return table[static_cast<int>(sector)];
}

std::array<MatS, 3> sector_gradient(const Position3& pos, Sector sector) {
    const auto dT = interaction_tensor_gradient(pos.vec());
    const auto& K = sector_products(sector);
    std::array<MatS, 3> out;
    for (int k = 0; k < 3; ++k) {
        out[k] = MatS::Zero(K[0][0].rows(), K[0][0].cols());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (dT[k](i, j) != 0.0) out[k] += dT[k](i, j) * K[i][j];
    }
    return out;
}

Eigen::Vector3d expectation_force(const std::array<MatS, 3>& grad, const VecS& psi) {
    Eigen::Vector3d f;
    for (int k = 0; k < 3; ++k) f(k) = -psi.dot(grad[k] * psi).real();
    return f;
}

double band_gap(const Eigen::VectorXd& values, int b) {
    double gap = std::numeric_limits<double>::infinity();
    if (b > 0) gap = std::min(gap, values(b) - values(b - 1));
    if (b + 1 < values.size()) gap = std::min(gap, values(b + 1) - values(b));
    return gap;
}

void check_options(const TrajectoryOptions& o) {
    if (!(o.dt > 0.0)) throw ConfigError("trajectory dt must be positive");
    if (!(o.t_end >= 0.0)) throw ConfigError("trajectory t_end must be non-negative");
    if (!(o.mass > 0.0)) throw ConfigError("mass parameter must be positive");
    if (o.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (sector_is_planar(o.band.sector)) throw ConfigError("trajectories need a three-dimensional band sector");
    if (o.band.index < 0 || o.band.index >= sector_basis(o.band.sector).cols())
        throw ConfigError("band index outside its sector");
}

std::vector<long> mark_steps(const TrajectoryOptions& o, long n) {
    std::vector<long> s;
    for (double t : o.marks) {
        const long k = std::lround(t / o.dt);
        if (k >= 0 && k <= n) s.push_back(k);
    }
    return s;
}

class Recorder {
public:
    Recorder(const TrajectoryOptions& o, long n) : opts_(o), n_(n), marks_(mark_steps(o, n)) {}
    bool wanted(long step) const {
        return step % opts_.record_every == 0 || step == n_ ||
               std::find(marks_.begin(), marks_.end(), step) != marks_.end();
    }

private:
    const TrajectoryOptions& opts_;
    long n_;
    std::vector<long> marks_;
};

struct LocalBand {
    double energy = 0.0;
    Eigen::Vector3d force = Eigen::Vector3d::Zero();
    Eigen::Vector3d B = Eigen::Vector3d::Zero();
};

// Energy, Hellmann-Feynman force and sum-over-states curvature of one band from a single
// meridian eigensolve; vectors are rotated from (rho, 0, z) to the azimuth of r.
LocalBand local_band(const Eigen::Vector3d& r, const BandRef& band, const StarkScheme& scheme, bool need_B) {
    const double rho = std::hypot(r(0), r(1)), phi = std::atan2(r(1), r(0));
    const MeridianEigh m = meridian_eigh(rho, r(2), scheme, band.sector);
    const auto grad = sector_gradient({rho, 0.0, r(2)}, band.sector);
    const int b = band.index;
    const MatS V = m.vectors.cast<cd>();
    std::array<VecS, 3> M;
    Eigen::Vector3d f;
    for (int k = 0; k < 3; ++k) {
        M[k] = V.adjoint() * (grad[k] * V.col(b));
        f(k) = -M[k](b).real();
    }
    Eigen::Vector3d B = Eigen::Vector3d::Zero();
    if (need_B) {
        Eigen::Matrix3cd X = Eigen::Matrix3cd::Zero();
        for (int n = 0; n < m.values.size(); ++n) {
            if (n == b) continue;
            const double d = m.values(b) - m.values(n);
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) X(j, k) += std::conj(M[j](n)) * M[k](n) / (d * d);
        }
        B = {-2.0 * X(1, 2).imag(), -2.0 * X(2, 0).imag(), -2.0 * X(0, 1).imag()};
    }
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return {m.values(b), rot * f, rot * B};
}

}  // namespace

std::string to_string(Dynamics d) { return d == Dynamics::Ehrenfest ? "ehrenfest" : "adiabatic_lorentz"; }

Dynamics dynamics_from_string(const std::string& name) {
    if (name == "ehrenfest") return Dynamics::Ehrenfest;
    if (name == "adiabatic_lorentz") return Dynamics::AdiabaticLorentz;
    throw ConfigError("unknown dynamics '" + name + "'");
}

Eigen::Vector3d mean_force(const Position3& pos, const Vec16& psi) {
    const auto g = dipole_dipole_gradient(pos);
    Eigen::Vector3d f;
    for (int k = 0; k < 3; ++k) f(k) = -psi.dot(g[k] * psi).real();
    return f;
}

Eigen::Vector3d force(const Position3& pos, const StarkScheme& scheme, const BandRef& band, ForceMethod method,
                      double h) {
    const AdiabaticPoint p = adiabatic_point(pos, scheme, band.sector, GaugeTag::AzimuthalRotated);
    if (band.index < 0 || band.index >= p.dim()) throw std::out_of_range("band index outside sector");
    const Vec16 psi = p.vectors.col(band.index);
    if (method == ForceMethod::Analytic) return mean_force(pos, psi);
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    Eigen::Vector3d f;
    for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d d = Eigen::Vector3d::Zero();
        d(k) = h;
        const Mat16 dH = (dipole_dipole(Position3::from(pos.vec() + d)) - dipole_dipole(Position3::from(pos.vec() - d))) /
                         (2.0 * h);
        f(k) = -psi.dot(dH * psi).real();
    }
    return f;
}

const TrajectorySample& Trajectory::at_time(double t) const {
    if (samples.empty()) throw std::out_of_range("empty trajectory");
    const auto it = std::min_element(samples.begin(), samples.end(), [t](const auto& a, const auto& b) {
        return std::abs(a.t - t) < std::abs(b.t - t);
    });
    return *it;
}

double adiabaticity_ratio(const Position3& pos, const Eigen::Vector3d& v, const BandRef& band,
                          const StarkScheme& scheme) {
    const SectorEigen e = sector_eigen(pos, scheme, band.sector);
    const auto grad = sector_gradient(pos, band.sector);
    const int b = band.index;
    MatS dv = v(0) * grad[0] + v(1) * grad[1] + v(2) * grad[2];
    const VecS hb = dv * e.vectors.col(b);
    double eta = 0.0;
    for (int n = 0; n < e.values.size(); ++n) {
        if (n == b) continue;
        const double gap = e.values(n) - e.values(b);
        eta = std::max(eta, std::abs(e.vectors.col(n).dot(hb)) / (gap * gap));
    }
    return eta;
}

Trajectory integrate_trajectory(const TrajectoryState& init, const TrajectoryOptions& opts) {
    check_options(opts);
    const long n = std::lround(opts.t_end / opts.dt);
    const double dt = opts.dt, M = opts.mass;
    const Sector sector = opts.band.sector;
    const int b = opts.band.index;
    const Eigen::MatrixXcd S = sector_basis(sector).cast<cd>();
    Trajectory traj;
    traj.options = opts;
    Recorder rec(opts, n);

    Eigen::Vector3d R = init.R.vec(), v = init.v;
    if (R.norm() < opts.min_distance) throw NumericalError("initial separation below the validity radius");

    auto record = [&](long step, const VecS* psi) {
        const Position3 pos = Position3::from(R);
        TrajectorySample s;
        s.t = init.t + step * dt;
        s.R = pos;
        s.v = v;
        s.L_orbital = M * (R(0) * v(1) - R(1) * v(0));
        const SectorEigen e = sector_eigen(pos, opts.scheme, sector);
        const VecS band_state = e.vectors.col(b);
        const Eigen::VectorXd& jz = sector_jz(sector);
        if (psi) {
            const MatS H = S.adjoint() * total_internal_hamiltonian(pos, opts.scheme) * S;
            s.energy = 0.5 * M * v.squaredNorm() + psi->dot(H * *psi).real();
            s.jz = (psi->cwiseAbs2().array() * jz.array()).sum();
            s.population = std::norm(band_state.dot(*psi));
        } else {
            s.energy = 0.5 * M * v.squaredNorm() + e.values(b);
            s.jz = (band_state.cwiseAbs2().array() * jz.array()).sum();
        }
        s.L_tot = s.L_orbital + s.jz;
        if (opts.monitor) s.eta = adiabaticity_ratio(pos, v, opts.band, opts.scheme);
        traj.samples.push_back(s);
    };

    auto validity = [&](const Eigen::Vector3d& r) -> bool {
        if (r.norm() < opts.min_distance) {
            traj.truncated = true;
            traj.truncation_reason = "separation below validity radius";
            return false;
        }
        const MeridianEigh m = meridian_eigh(std::hypot(r(0), r(1)), r(2), opts.scheme, sector);
        if (band_gap(m.values, b) < opts.min_gap) {
            traj.truncated = true;
            traj.truncation_reason = "band gap collapse";
            return false;
        }
        return true;
    };

    if (opts.dynamics == Dynamics::Ehrenfest) {
        VecS psi = sector_eigen(Position3::from(R), opts.scheme, sector).vectors.col(b);
        Eigen::Vector3d f = expectation_force(sector_gradient(Position3::from(R), sector), psi);
        record(0, &psi);
        for (long step = 1; step <= n; ++step) {
            v += 0.5 * dt / M * f;
            const Eigen::Vector3d Rm = R + 0.5 * dt * v;
            const MeridianEigh m = meridian_eigh(std::hypot(Rm(0), Rm(1)), Rm(2), opts.scheme, sector);
            const Eigen::VectorXcd u = rotation_phases(sector, std::atan2(Rm(1), Rm(0)));
            VecS c = m.vectors.transpose().cast<cd>() * (u.conjugate().asDiagonal() * psi);
            for (int k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -m.values(k) * dt);
            psi = u.asDiagonal() * (m.vectors.cast<cd>() * c);
            R += dt * v;
            if (!validity(R)) break;
            f = expectation_force(sector_gradient(Position3::from(R), sector), psi);
            v += 0.5 * dt / M * f;
            if (rec.wanted(step)) record(step, &psi);
        }
    } else {
        auto accel = [&](const Eigen::Vector3d& r, const Eigen::Vector3d& w) -> Eigen::Vector3d {
            const LocalBand lb = local_band(r, opts.band, opts.scheme, opts.with_lorentz);
            Eigen::Vector3d a = lb.force;
            if (opts.with_lorentz) a += w.cross(lb.B);
            return a / M;
        };
        record(0, nullptr);
        for (long step = 1; step <= n; ++step) {
            const Eigen::Vector3d k1r = v, k1v = accel(R, v);
            const Eigen::Vector3d k2r = v + 0.5 * dt * k1v, k2v = accel(R + 0.5 * dt * k1r, k2r);
            const Eigen::Vector3d k3r = v + 0.5 * dt * k2v, k3v = accel(R + 0.5 * dt * k2r, k3r);
            const Eigen::Vector3d k4r = v + dt * k3v, k4v = accel(R + dt * k3r, k4r);
            R += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if (!validity(R)) break;
            if (rec.wanted(step)) record(step, nullptr);
        }
    }
    return traj;
}

double adiabaticity_monitor(const Trajectory& traj) {
    double m = 0.0;
    for (const auto& s : traj.samples) {
        const double eta = traj.options.monitor ? s.eta
                                                : adiabaticity_ratio(s.R, s.v, traj.options.band, traj.options.scheme);
        m = std::max(m, eta);
    }
    return m;
}

double angular_momentum_audit(const Trajectory& traj) {
    double d = 0.0;
    for (const auto& s : traj.samples) d = std::max(d, std::abs(s.L_tot - traj.samples.front().L_tot));
    return d;
}

double orbital_momentum_drift(const Trajectory& traj) {
    double d = 0.0;
    for (const auto& s : traj.samples) d = std::max(d, std::abs(s.L_orbital - traj.samples.front().L_orbital));
    return d;
}

double energy_drift(const Trajectory& traj) {
    if (traj.samples.empty()) return 0.0;
    const double e0 = traj.samples.front().energy;
    double d = 0.0;
    for (const auto& s : traj.samples) d = std::max(d, std::abs(s.energy - e0));
    return d / std::max(std::abs(e0), 1e-300);
}

DeflectionResult deflection_experiment(const DeflectionConfig& cfg) {
    DeflectionResult r;
    r.config = cfg;
    TrajectoryOptions opts = cfg.trajectory;
    for (double t : cfg.report_times) opts.marks.push_back(t);
    const Eigen::Vector3d v0(0.0, 0.0, cfg.v0 / opts.mass);
    TrajectoryState a, b;
    a.R = {cfg.x0, 0.0, cfg.z0};
    b.R = {-cfg.x0, 0.0, cfg.z0};
    a.v = b.v = v0;
    parallel_for(2, cfg.threads, [&](int i) {
        if (i == 0)
            r.minus = integrate_trajectory(a, opts);
        else
            r.plus = integrate_trajectory(b, opts);
    });
    const size_t n = std::min(r.minus.samples.size(), r.plus.samples.size());
    for (size_t i = 0; i < n; ++i) {
        const auto& m = r.minus.samples[i];
        const auto& p = r.plus.samples[i];
        r.times.push_back(m.t);
        r.y_minus.push_back(m.R.y);
        r.y_plus.push_back(p.R.y);
        r.dy.push_back(p.R.y - m.R.y);
        r.mirror_error = std::max({r.mirror_error, std::abs(p.R.x + m.R.x), std::abs(p.R.y + m.R.y),
                                   std::abs(p.R.z - m.R.z)});
        r.min_population = std::min({r.min_population, m.population, p.population});
    }
    for (double t : cfg.report_times) {
        if (r.minus.truncated || r.plus.truncated || t > opts.t_end + 0.5 * opts.dt) {
            r.report_dy.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        r.report_dy.push_back(r.plus.at_time(t).R.y - r.minus.at_time(t).R.y);
    }
    r.max_eta = std::max(adiabaticity_monitor(r.minus), adiabaticity_monitor(r.plus));
    r.energy_drift = std::max(energy_drift(r.minus), energy_drift(r.plus));
    r.L_drift = std::max(angular_momentum_audit(r.minus), angular_momentum_audit(r.plus));
    r.orbital_drift = std::max(orbital_momentum_drift(r.minus), orbital_momentum_drift(r.plus));
    return r;
}

double thermal_velocity_scale(const Species& species) {
    const double mu = 0.5 * species.mass_amu * constants::amu;
    const double delta = 2.0 * M_PI * species.delta_over_2pi_Hz;
    return std::sqrt(constants::kB * 1e-9 / mu) / (species.R0_m * delta);
}

ThermalResult thermal_deflection_scan(const ThermalConfig& cfg) {
    if (cfg.n_samples < 10) throw ConfigError("thermal scan needs at least 10 samples per temperature");
    if (!(cfg.sigma_v_per_sqrt_nK > 0.0)) throw ConfigError("thermal velocity scale must be positive");
    for (double T : cfg.temperatures_nK)
        if (T < 0.0) throw ConfigError("temperatures must be non-negative");
    TrajectoryOptions opts = cfg.deflection.trajectory;
    opts.t_end = cfg.t_star;
    opts.marks = {cfg.t_star};
    opts.record_every = std::max(1, static_cast<int>(std::lround(cfg.t_star / opts.dt)));
    opts.monitor = false;
    const double vz = cfg.deflection.v0 / opts.mass;

    struct Job {
        int row;
        bool plus;
        Eigen::Vector3d kick;
    };
    std::vector<Job> jobs;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ThermalResult out;
    for (size_t i = 0; i < cfg.temperatures_nK.size(); ++i) {
        const double sv = cfg.sigma_v_per_sqrt_nK * std::sqrt(cfg.temperatures_nK[i]);
        out.rows.push_back({cfg.temperatures_nK[i], sv, 0.0, 0.0, cfg.n_samples});
        for (int s = 0; s < cfg.n_samples; ++s)
            for (bool plus : {false, true}) {
                Eigen::Vector3d k;
                for (int c = 0; c < 3; ++c) k(c) = sv * normal(rng);
                jobs.push_back({static_cast<int>(i), plus, k});
            }
    }
    std::vector<double> y(jobs.size(), 0.0);
    parallel_for(static_cast<int>(jobs.size()), cfg.deflection.threads, [&](int j) {
        TrajectoryState init;
        init.R = {jobs[j].plus ? -cfg.deflection.x0 : cfg.deflection.x0, 0.0, cfg.deflection.z0};
        init.v = Eigen::Vector3d(0.0, 0.0, vz) + jobs[j].kick;
        const Trajectory t = integrate_trajectory(init, opts);
        if (t.truncated) throw NumericalError("thermal sample left the validity region: " + t.truncation_reason);
        y[j] = t.at_time(cfg.t_star).R.y;
    });
    for (size_t i = 0; i < out.rows.size(); ++i) {
        std::vector<double> yp, ym;
        for (size_t j = 0; j < jobs.size(); ++j)
            if (jobs[j].row == static_cast<int>(i)) (jobs[j].plus ? yp : ym).push_back(y[j]);
        auto mean = [](const std::vector<double>& x) {
            double s = 0.0;
            for (double e : x) s += e;
            return s / x.size();
        };
        auto var = [&](const std::vector<double>& x) {
            const double m = mean(x);
            double s = 0.0;
            for (double e : x) s += (e - m) * (e - m);
            return s / (x.size() - 1);
        };
        auto& row = out.rows[i];
        row.mean_y = mean(yp) - mean(ym);
        row.std_y = std::sqrt(0.5 * (var(yp) + var(ym)));
    }
    {
        DeflectionConfig d = cfg.deflection;
        d.trajectory = opts;
        d.report_times = {cfg.t_star};
        d.threads = std::min(2, cfg.deflection.threads);
        out.deterministic_dy = deflection_experiment(d).report_dy.front();
    }
    // First temperature where std_y exceeds |mean_y| / 2, interpolated in log T.
    double prev_T = -1.0, prev_r = 0.0;
    for (const auto& row : out.rows) {
        const double r = row.std_y / std::max(std::abs(row.mean_y), 1e-300);
        if (r > 0.5) {
            if (row.T_nK <= 0.0) {
                out.crossing_nK = 0.0;
            } else if (prev_T > 0.0 && prev_r > 0.0) {
                const double a = std::log(prev_T), bb = std::log(row.T_nK);
                const double la = std::log(prev_r), lb = std::log(r);
                out.crossing_nK = std::exp(a + (std::log(0.5) - la) * (bb - a) / (lb - la));
            } else {
                // std grows as sqrt(T) at small spreads
                out.crossing_nK = row.T_nK * (0.5 / r) * (0.5 / r);
            }
            break;
        }
        if (row.T_nK > 0.0) {
            prev_T = row.T_nK;
            prev_r = r;
        }
    }
    return out;
}

}  // namespace rydgauge
