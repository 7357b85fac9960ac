#include "rydgauge/gauge.hpp"

#include "rydgauge/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rydgauge {

namespace {

const cd I(0.0, 1.0);

// Sum-over-states curvature in Cartesian components; used on the z axis.
Eigen::Vector3d kubo_curvature(const Position3& pos, const BandRef& band, Sector sector, const StarkScheme& scheme) {
    const Eigen::MatrixXcd Bc = sector_basis(sector).cast<cd>();
    const Eigh e = eigh(Bc.adjoint() * total_internal_hamiltonian(pos, scheme) * Bc);
    const int b = band.index;
    const auto grad = dipole_dipole_gradient(pos);
    std::array<Eigen::VectorXcd, 3> M;
    for (int k = 0; k < 3; ++k) M[k] = e.vectors.adjoint() * (Bc.adjoint() * grad[k] * Bc) * e.vectors.col(b);
    Eigen::Matrix3cd X = Eigen::Matrix3cd::Zero();
    for (int n = 0; n < e.values.size(); ++n) {
        if (n == b) continue;
        const double d = e.values(b) - e.values(n);
        if (std::abs(d) < 1e-12) throw NumericalError("abelian_curvature: degenerate band");
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) X(j, k) += std::conj(M[j](n)) * M[k](n) / (d * d);
    }
    return {-2.0 * X(1, 2).imag(), -2.0 * X(2, 0).imag(), -2.0 * X(0, 1).imag()};
}

// Index of a band inside its parent sector; planar bands are matched by energy.
int locate_in_parent(const MeridianEigh& m, const BandRef& band, double rho, double z, const StarkScheme& scheme) {
    if (parent_sector(band.sector) == band.sector) return band.index;
    const double target = meridian_eigh(rho, z, scheme, band.sector).values(band.index);
    int b = 0;
    for (int n = 1; n < m.values.size(); ++n)
        if (std::abs(m.values(n) - target) < std::abs(m.values(b) - target)) b = n;
    return b;
}

struct Frame {
    Eigen::MatrixXd V;       // 16 x q, real, at (rho, 0, z)
    Eigen::VectorXd values;  // energies of the selected bands
};

// Bands at (rho, 0, z). Without a reference the requested sector indices are used;
// with a reference each column is matched by overlap and sign-aligned to it.
Frame frame_at(double rho, double z, const BandSet& bands, const StarkScheme& scheme, const Eigen::MatrixXd* ref) {
    Sector sector = bands.sector;
    if (sector_is_planar(sector) && z != 0.0) {
        if (ref == nullptr) throw std::invalid_argument("planar band set requires z = 0");
        sector = parent_sector(sector);
    }
    const MeridianEigh m = meridian_eigh(rho, z, scheme, sector);
    const Eigen::MatrixXd full = sector_basis(sector) * m.vectors;
    const int q = static_cast<int>(bands.indices.size());
    Frame f;
    f.V.resize(16, q);
    f.values.resize(q);
    if (!ref) {
        for (int k = 0; k < q; ++k) {
            const int b = bands.indices[k];
            if (b < 0 || b >= full.cols()) throw std::out_of_range("band index outside sector");
            f.V.col(k) = full.col(b);
            f.values(k) = m.values(b);
        }
        return f;
    }
    std::vector<int> used;
    for (int k = 0; k < q; ++k) {
        const Eigen::VectorXd ov = full.transpose() * ref->col(k);
        int best = 0;
        for (int b = 1; b < ov.size(); ++b)
            if (std::abs(ov(b)) > std::abs(ov(best))) best = b;
        if (std::abs(ov(best)) < 0.5)
            throw NumericalError("eigenvector continuation failed (overlap " + std::to_string(std::abs(ov(best))) +
                                 "); reduce fd_step or enlarge the band set");
        for (int u : used)
            if (u == best) throw NumericalError("eigenvector continuation matched one state twice");
        used.push_back(best);
        f.V.col(k) = ov(best) < 0.0 ? Eigen::VectorXd(-full.col(best)) : Eigen::VectorXd(full.col(best));
        f.values(k) = m.values(best);
    }
    return f;
}

double gradient_norm(const Position3& pos) {
    const auto g = dipole_dipole_gradient(pos);
    double n = 0.0;
    for (const auto& m : g) n = std::max(n, m.cwiseAbs().rowwise().sum().maxCoeff());
    return n;
}

void check_gap(const Position3& pos, const BandSet& bands, const StarkScheme& scheme, double fd_step) {
    const Sector sector = (sector_is_planar(bands.sector) && pos.z != 0.0) ? parent_sector(bands.sector)
                                                                           : bands.sector;
    const MeridianEigh m = meridian_eigh(pos.rho(), pos.z, scheme, sector);
    std::vector<bool> inside(m.values.size(), false);
    for (int b : bands.indices) inside.at(b) = true;
    double gap = std::numeric_limits<double>::infinity();
    for (int b : bands.indices)
        for (int n = 0; n < m.values.size(); ++n)
            if (!inside[n]) gap = std::min(gap, std::abs(m.values(n) - m.values(b)));
    const double threshold = 10.0 * fd_step * gradient_norm(pos);
    if (gap < threshold)
        throw NumericalError("band set is within " + std::to_string(gap) +
                             " of an outside band; increase q to include it");
}

struct Connection {
    std::array<Eigen::MatrixXcd, 3> A;
    Frame frame;
};

// Fourth-order central difference of frames aligned to `V`.
Eigen::MatrixXd frame_derivative(double rho, double z, bool radial, const BandSet& bands, const StarkScheme& scheme,
                                 double h, const Eigen::MatrixXd& V) {
    auto at = [&](double s) {
        return radial ? frame_at(rho + s, z, bands, scheme, &V).V : frame_at(rho, z + s, bands, scheme, &V).V;
    };
    return (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
}

Connection connection_at(double rho, double z, const BandSet& bands, const StarkScheme& scheme, double h,
                         const Eigen::MatrixXd* ref) {
    if (rho < 1e-6) throw NumericalError("azimuthal connection is undefined on the z axis");
    if (rho <= 4.0 * h) throw NumericalError("fd_step too large for this distance from the axis");
    Connection c;
    c.frame = frame_at(rho, z, bands, scheme, ref);
    const Eigen::MatrixXd& V = c.frame.V;
    const Eigen::MatrixXd dr = V.transpose() * frame_derivative(rho, z, true, bands, scheme, h, V);
    const Eigen::MatrixXd dz = V.transpose() * frame_derivative(rho, z, false, bands, scheme, h, V);
    const Eigen::MatrixXd jz = V.transpose() * jz_diagonal().asDiagonal() * V / rho;
    c.A[0] = I * dr.cast<cd>();
    c.A[1] = jz.cast<cd>();
    c.A[2] = I * dz.cast<cd>();
    return c;
}

Eigen::MatrixXcd comm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return a * b - b * a; }

}  // namespace

BandSet single_band(const BandRef& band) { return {band.sector, {band.index}}; }

GaugeFieldSample berry_connection(const Position3& pos, const BandSet& bands, const StarkScheme& scheme,
                                  double fd_step) {
    if (bands.indices.empty()) throw std::invalid_argument("empty band set");
    check_gap(pos, bands, scheme, fd_step);
    const Connection c = connection_at(pos.rho(), pos.z, bands, scheme, fd_step, nullptr);
    GaugeFieldSample s;
    s.pos = pos;
    s.q = static_cast<int>(bands.indices.size());
    s.A = c.A;
    s.energies = c.frame.values;
    return s;
}

GaugeFieldSample berry_curvature(const Position3& pos, const BandSet& bands, const StarkScheme& scheme,
                                 double fd_step) {
    if (bands.indices.empty()) throw std::invalid_argument("empty band set");
    check_gap(pos, bands, scheme, fd_step);
    const double rho = pos.rho(), z = pos.z, h = fd_step;
    const Connection c = connection_at(rho, z, bands, scheme, h, nullptr);
    const Eigen::MatrixXd& V = c.frame.V;
    if (rho <= 8.0 * h) throw NumericalError("fd_step too large for this distance from the axis");
    auto conn = [&](double dr, double dz) { return connection_at(rho + dr, z + dz, bands, scheme, h, &V).A; };
    auto d4 = [&](const std::array<Eigen::MatrixXcd, 3>& p1, const std::array<Eigen::MatrixXcd, 3>& m1,
                  const std::array<Eigen::MatrixXcd, 3>& p2, const std::array<Eigen::MatrixXcd, 3>& m2, int k,
                  double w1p = 1.0, double w1m = 1.0, double w2p = 1.0, double w2m = 1.0) -> Eigen::MatrixXcd {
        return (8.0 * (w1p * p1[k] - w1m * m1[k]) - (w2p * p2[k] - w2m * m2[k])) / (12.0 * h);
    };
    const auto rp = conn(h, 0.0), rm = conn(-h, 0.0), rp2 = conn(2.0 * h, 0.0), rm2 = conn(-2.0 * h, 0.0);
    const auto zp = conn(0.0, h), zm = conn(0.0, -h), zp2 = conn(0.0, 2.0 * h), zm2 = conn(0.0, -2.0 * h);
    GaugeFieldSample s;
    s.pos = pos;
    s.q = static_cast<int>(bands.indices.size());
    s.A = c.A;
    s.energies = c.frame.values;
    const auto& A = c.A;
    s.commutator[0] = -I * comm(A[1], A[2]);
    s.commutator[1] = -I * comm(A[2], A[0]);
    s.commutator[2] = -I * comm(A[0], A[1]);
    s.B[0] = -d4(zp, zm, zp2, zm2, 1) + s.commutator[0];
    s.B[1] = d4(zp, zm, zp2, zm2, 0) - d4(rp, rm, rp2, rm2, 2) + s.commutator[1];
    s.B[2] = d4(rp, rm, rp2, rm2, 1, rho + h, rho - h, rho + 2.0 * h, rho - 2.0 * h) / rho + s.commutator[2];
    return s;
}

Eigen::Matrix2cd commutator_term(double rho, const StarkScheme& scheme, double fd_step) {
    const GaugeFieldSample s = berry_connection({rho, 0.0, 0.0}, nonabelian_pair(), scheme, fd_step);
    return I * comm(s.A[0], s.A[1]);
}

Eigen::Vector3d abelian_curvature(const Position3& pos, const BandRef& band, const StarkScheme& scheme) {
    const Sector sector = parent_sector(band.sector);
    const double rho = pos.rho();
    if (rho < 1e-6) return kubo_curvature(pos, band, sector, scheme);
    const MeridianEigh m = meridian_eigh(rho, pos.z, scheme, sector);
    const int b = locate_in_parent(m, band, rho, pos.z, scheme);
    double gap = std::numeric_limits<double>::infinity();
    for (int n = 0; n < m.values.size(); ++n)
        if (n != b) gap = std::min(gap, std::abs(m.values(b) - m.values(n)));
    if (gap < 1e-12) throw NumericalError("abelian_curvature: degenerate band");
    // Scalar curl of A_phi = <J_z>/rho with first-order derivatives of <J_z>.
    const Eigen::MatrixXd& Bs = sector_basis(sector);
    const Eigen::MatrixXd V = Bs * m.vectors;
    const auto grad = dipole_dipole_gradient({rho, 0.0, pos.z});
    const Eigen::VectorXd jz_b = jz_diagonal().asDiagonal() * V.col(b);
    const Eigen::VectorXd dr_b = grad[0].real() * V.col(b);
    const Eigen::VectorXd dz_b = grad[2].real() * V.col(b);
    double djz_drho = 0.0, djz_dz = 0.0;
    for (int n = 0; n < m.values.size(); ++n) {
        if (n == b) continue;
        const double w = 2.0 * V.col(n).dot(jz_b) / (m.values(b) - m.values(n));
        djz_drho += w * V.col(n).dot(dr_b);
        djz_dz += w * V.col(n).dot(dz_b);
    }
    const double b_rho = -djz_dz / rho, b_z = djz_drho / rho;
    const double phi = pos.phi();
    return {b_rho * std::cos(phi), b_rho * std::sin(phi), b_z};
}

double azimuthal_connection_fd(const Position3& pos, const BandRef& band, const StarkScheme& scheme, double h) {
    const double rho = pos.rho(), phi = pos.phi();
    if (rho < 1e-6) throw NumericalError("azimuthal connection is undefined on the z axis");
    auto vec = [&](double p) {
        return adiabatic_point(Position3::cylindrical(rho, p, pos.z), scheme, band.sector, GaugeTag::AzimuthalRotated)
            .vectors.col(band.index)
            .eval();
    };
    const Eigen::VectorXcd v0 = vec(phi);
    const cd a = I * v0.dot(vec(phi + h) - vec(phi - h)) / (2.0 * h * rho);
    return a.real();
}

PlaquetteSum plaquette_flux(const std::vector<std::vector<Eigen::VectorXcd>>& grid) {
    PlaquetteSum out;
    const int nt = static_cast<int>(grid.size()) - 1;
    double total = 0.0;
    for (int i = 0; i < nt; ++i) {
        const int np = static_cast<int>(grid[i].size());
        for (int j = 0; j < np; ++j) {
            const int j2 = (j + 1) % np;
            const cd u = grid[i][j].dot(grid[i + 1][j]) * grid[i + 1][j].dot(grid[i + 1][j2]) *
                         grid[i + 1][j2].dot(grid[i][j2]) * grid[i][j2].dot(grid[i][j]);
            const double a = std::arg(u);
            total += a;
            out.max_phase = std::max(out.max_phase, std::abs(a));
        }
    }
    out.flux = -total / (2.0 * M_PI);
    return out;
}

ChernResult chern_number(const Position3& center, double radius, int n_theta, int n_phi, const BandRef& band,
                         const StarkScheme& scheme) {
    if (sector_is_planar(band.sector)) throw std::invalid_argument("Chern spheres need a three-dimensional sector");
    if (radius <= 0.0 || n_theta < 2 || n_phi < 3) throw std::invalid_argument("invalid Chern sphere grid");
    ChernResult r;
    r.center = center;
    r.radius = radius;
    r.n_theta = n_theta;
    r.n_phi = n_phi;
    r.min_gap = std::numeric_limits<double>::infinity();
    std::vector<std::vector<Eigen::VectorXcd>> grid(n_theta + 1, std::vector<Eigen::VectorXcd>(n_phi));
    for (int i = 0; i <= n_theta; ++i) {
        const double th = M_PI * i / n_theta;
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * M_PI * j / n_phi;
            const Position3 p{center.x + radius * std::sin(th) * std::cos(ph),
                              center.y + radius * std::sin(th) * std::sin(ph), center.z + radius * std::cos(th)};
            const AdiabaticPoint a = adiabatic_point(p, scheme, band.sector, GaugeTag::AzimuthalRotated);
            const int b = band.index;
            if (b > 0) r.min_gap = std::min(r.min_gap, a.values(b) - a.values(b - 1));
            if (b + 1 < a.dim()) r.min_gap = std::min(r.min_gap, a.values(b + 1) - a.values(b));
            grid[i][j] = a.vectors.col(b);
        }
    }
    if (r.min_gap < 1e-6) throw NumericalError("degeneracy on the Chern sphere");
    const PlaquetteSum ps = plaquette_flux(grid);
    r.raw = ps.flux;
    r.max_plaquette_phase = ps.max_phase;
    r.chern = static_cast<int>(std::lround(ps.flux));
    r.residual = std::abs(ps.flux - r.chern);
    if (ps.max_phase >= M_PI / 2.0) throw NumericalError("plaquette phase too large; refine the sphere grid");
    if (r.residual > 0.05) throw NumericalError("Chern residual " + std::to_string(r.residual) + " exceeds 0.05");
    return r;
}

Eigen::MatrixXcd scalar_potential_diagnostic(const Position3& pos, const BandSet& bands, const StarkScheme& scheme,
                                             double mass, double fd_step) {
    if (mass <= 0.0) throw std::invalid_argument("mass must be positive");
    const double rho = pos.rho(), z = pos.z, h = fd_step;
    if (rho <= 4.0 * h) throw NumericalError("scalar potential diagnostic needs rho > 4 fd_step");
    const Frame c = frame_at(rho, z, bands, scheme, nullptr);
    const Eigen::MatrixXd& V = c.V;
    const Eigen::MatrixXd dr = frame_derivative(rho, z, true, bands, scheme, h, V);
    const Eigen::MatrixXd dz = frame_derivative(rho, z, false, bands, scheme, h, V);
    const Eigen::MatrixXcd dphi = (-I / rho) * (jz_diagonal().asDiagonal() * V).cast<cd>();
    const Eigen::MatrixXcd Q =
        Eigen::MatrixXcd::Identity(16, 16) - (V * V.transpose()).cast<cd>();
    Eigen::MatrixXcd phi = dr.cast<cd>().adjoint() * Q * dr.cast<cd>() + dz.cast<cd>().adjoint() * Q * dz.cast<cd>() +
                           dphi.adjoint() * Q * dphi;
    phi /= (2.0 * mass);
    return 0.5 * (phi + phi.adjoint());
}

}  // namespace rydgauge
