#include "rydgauge/spectrum.hpp"

#include "rydgauge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rydgauge {

namespace {

constexpr double kPlaneTol = 1e-12;
constexpr double kRefineGap = 1e-4;

Eigen::MatrixXd build_sector_basis(Sector sector) {
    if (sector == Sector::Full) return Eigen::MatrixXd::Identity(16, 16);
    const double r = 1.0 / std::sqrt(2.0);
    const bool gerade = sector == Sector::Gerade || sector == Sector::GeradeEvenM || sector == Sector::GeradeOddM;
    const bool planar = sector_is_planar(sector);
    const bool even = sector == Sector::GeradeEvenM || sector == Sector::UngeradeEvenM;
    std::vector<int> cols;
    for (int k = 0; k < 8; ++k) {
        const int m = pair_basis()[k].jz();
        if (planar && ((m % 2 == 0) != even)) continue;
        cols.push_back(k);
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(16, static_cast<int>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) {
        B(cols[c], c) = r;
        B(exchange_partner(cols[c]), c) = gerade ? r : -r;
    }
    return B;
}

void require_plane(Sector sector, double z) {
    if (sector_is_planar(sector) && std::abs(z) > kPlaneTol)
        throw std::invalid_argument("sector " + to_string(sector) + " is only defined in the z = 0 plane");
}

}  // namespace

std::string to_string(Sector sector) {
    switch (sector) {
        case Sector::Full: return "full";
        case Sector::Gerade: return "gerade";
        case Sector::Ungerade: return "ungerade";
        case Sector::GeradeEvenM: return "gerade_even";
        case Sector::GeradeOddM: return "gerade_odd";
        case Sector::UngeradeEvenM: return "ungerade_even";
        case Sector::UngeradeOddM: return "ungerade_odd";
    }
    return "full";
}

Sector sector_from_string(const std::string& name) {
    for (Sector s : {Sector::Full, Sector::Gerade, Sector::Ungerade, Sector::GeradeEvenM, Sector::GeradeOddM,
                     Sector::UngeradeEvenM, Sector::UngeradeOddM})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown sector '" + name + "'");
}

bool sector_is_planar(Sector sector) {
    return sector == Sector::GeradeEvenM || sector == Sector::GeradeOddM || sector == Sector::UngeradeEvenM ||
           sector == Sector::UngeradeOddM;
}

Sector parent_sector(Sector sector) {
    switch (sector) {
        case Sector::GeradeEvenM:
        case Sector::GeradeOddM: return Sector::Gerade;
        case Sector::UngeradeEvenM:
        case Sector::UngeradeOddM: return Sector::Ungerade;
        default: return sector;
    }
}

const Eigen::MatrixXd& sector_basis(Sector sector) {
    static const std::array<Eigen::MatrixXd, 7> bases = [] {
        std::array<Eigen::MatrixXd, 7> out;
        for (int s = 0; s < 7; ++s) out[s] = build_sector_basis(static_cast<Sector>(s));
        return out;
    }();
    return bases[static_cast<int>(sector)];
}

const Eigen::VectorXd& sector_jz(Sector sector) {
    static const std::array<Eigen::VectorXd, 7> jz = [] {
        std::array<Eigen::VectorXd, 7> out;
        for (int s = 0; s < 7; ++s) {
            const Eigen::MatrixXd& B = sector_basis(static_cast<Sector>(s));
            out[s] = (B.transpose() * jz_diagonal().asDiagonal() * B).diagonal();
        }
        return out;
    }();
    return jz[static_cast<int>(sector)];
}

BandRef abelian_band() { return {Sector::Gerade, 3}; }
BandRef planar_lower_band() { return {Sector::GeradeOddM, 1}; }
BandRef planar_upper_band() { return {Sector::GeradeOddM, 2}; }
BandSet nonabelian_pair() { return {Sector::GeradeOddM, {1, 2}}; }

Eigh eigh(const Eigen::MatrixXcd& H) {
    if (H.rows() != H.cols()) throw std::invalid_argument("eigh: matrix is not square");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NumericalError("eigh: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("eigh: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

Eigh eigh16(const Mat16& H) { return eigh(Eigen::MatrixXcd(H)); }

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    int best = 0;
    double mag = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > mag + 1e-12) {
            mag = a;
            best = i;
        }
    }
    if (v(best) < 0.0) v = -v;
}

double AdiabaticPoint::jz(int band) const {
    return (vectors.col(band).adjoint() * jz_diagonal().cast<cd>().asDiagonal() * vectors.col(band))(0).real();
}

MeridianEigh meridian_eigh(double rho, double z, const StarkScheme& scheme, Sector sector) {
    require_plane(sector, z);
    const Eigen::MatrixXd& B = sector_basis(sector);
    const Eigen::MatrixXd Hs = B.transpose() * meridian_hamiltonian(rho, z, scheme) * B;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs);
    if (es.info() != Eigen::Success) throw NumericalError("meridian eigensolver failed");
    MeridianEigh out{es.eigenvalues(), es.eigenvectors()};
    const Eigen::VectorXd& ev = out.values;
    if (ev.size() > 1 && (ev.tail(ev.size() - 1) - ev.head(ev.size() - 1)).minCoeff() <
                              kRefineGap * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
        // Near-degenerate pairs: solve again in extended precision.
        using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
        Eigen::SelfAdjointEigenSolver<MatL> el(Hs.cast<long double>().eval());
        if (el.info() != Eigen::Success) throw NumericalError("meridian eigensolver failed");
        out.values = el.eigenvalues().cast<double>();
        out.vectors = el.eigenvectors().cast<double>();
    }
    for (int b = 0; b < out.vectors.cols(); ++b) fix_sign(out.vectors.col(b));
    return out;
}

AdiabaticPoint adiabatic_point(const Position3& pos, const StarkScheme& scheme, Sector sector, GaugeTag gauge) {
    if (pos.norm() <= 0.0) throw NumericalError("adiabatic_point: R = 0");
    require_plane(sector, pos.z);
    AdiabaticPoint out;
    out.pos = pos;
    out.sector = sector;
    out.gauge = gauge;
    const Eigen::MatrixXd& B = sector_basis(sector);
    if (gauge == GaugeTag::RawSolver) {
        const Eigen::MatrixXcd Hs = B.transpose().cast<cd>() * total_internal_hamiltonian(pos, scheme) * B.cast<cd>();
        Eigh e = eigh(Hs);
        out.values = e.values;
        out.vectors = B.cast<cd>() * e.vectors;
    } else {
        const MeridianEigh m = meridian_eigh(pos.rho(), pos.z, scheme, sector);
        out.values = m.values;
        out.vectors = (B * m.vectors).cast<cd>();
        if (gauge == GaugeTag::AzimuthalRotated) {
            const double phi = pos.phi();
            for (int k = 0; k < 16; ++k) out.vectors.row(k) *= std::polar(1.0, -phi * jz_diagonal()(k));
        }
    }
    const int n = out.dim();
    out.sign_unstable.assign(n, false);
    for (int b = 0; b < n; ++b) {
        if (b > 0 && out.values(b) - out.values(b - 1) < 1e-9) out.sign_unstable[b] = true;
        if (b + 1 < n && out.values(b + 1) - out.values(b) < 1e-9) out.sign_unstable[b] = true;
    }
    return out;
}

int global_band_index(const Position3& pos, const StarkScheme& scheme, const BandRef& band) {
    const AdiabaticPoint p = adiabatic_point(pos, scheme, band.sector, GaugeTag::RealAtPhiZero);
    const double e = p.values(band.index);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(total_internal_hamiltonian(pos, scheme),
                                                       Eigen::EigenvaluesOnly);
    int best = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 16; ++i) {
        const double d = std::abs(es.eigenvalues()(i) - e);
        if (d < dmin - 1e-9) {
            dmin = d;
            best = i;
        }
    }
    return best;
}

Position3 ScanGrid::point(int i, int j) const {
    const double a = na > 1 ? a0 + (a1 - a0) * i / (na - 1) : a0;
    const double b = nb > 1 ? b0 + (b1 - b0) * j / (nb - 1) : b0;
    return Position3::from(origin.vec() + a * e1 + b * e2);
}

ScanGrid ScanGrid::radial(double r0, double r1, int n, double phi, double z) {
    ScanGrid g;
    g.origin = {0.0, 0.0, z};
    g.e1 = {std::cos(phi), std::sin(phi), 0.0};
    g.a0 = r0;
    g.a1 = r1;
    g.na = n;
    g.nb = 1;
    g.label = "radial";
    return g;
}

ScanGrid ScanGrid::plane_xy(double x0, double x1, int nx, double y0, double y1, int ny, double z) {
    ScanGrid g;
    g.origin = {0.0, 0.0, z};
    g.e1 = {1.0, 0.0, 0.0};
    g.e2 = {0.0, 1.0, 0.0};
    g.a0 = x0;
    g.a1 = x1;
    g.na = nx;
    g.b0 = y0;
    g.b1 = y1;
    g.nb = ny;
    g.label = "xy";
    return g;
}

ScanGrid ScanGrid::plane_xz(double x0, double x1, int nx, double z0, double z1, int nz, double y) {
    ScanGrid g;
    g.origin = {0.0, y, 0.0};
    g.e1 = {1.0, 0.0, 0.0};
    g.e2 = {0.0, 0.0, 1.0};
    g.a0 = x0;
    g.a1 = x1;
    g.na = nx;
    g.b0 = z0;
    g.b1 = z1;
    g.nb = nz;
    g.label = "xz";
    return g;
}

bool SurfaceScan::all_tracked() const {
    return std::all_of(points.begin(), points.end(), [](const ScanPoint& p) { return p.track_ok; });
}

SurfaceScan scan_surface(const BandRef& band, const ScanGrid& grid, const StarkScheme& scheme) {
    if (grid.na < 1 || grid.nb < 1) throw std::invalid_argument("scan grid must have at least one point");
    SurfaceScan scan;
    scan.band = band;
    scan.grid = grid;
    scan.points.resize(static_cast<size_t>(grid.na) * grid.nb);

    auto evaluate = [&](int i, int j, const Eigen::VectorXcd* prev) -> Eigen::VectorXcd {
        ScanPoint sp;
        sp.pos = grid.point(i, j);
        sp.i = i;
        sp.j = j;
        const AdiabaticPoint p = adiabatic_point(sp.pos, scheme, band.sector, GaugeTag::AzimuthalRotated);
        if (band.index < 0 || band.index >= p.dim()) throw std::out_of_range("band index outside sector");
        int pick = band.index;
        double ov = 1.0;
        if (prev) {
            ov = -1.0;
            for (int b = 0; b < p.dim(); ++b) {
                const double o = std::abs(prev->dot(p.vectors.col(b)));
                if (o > ov) {
                    ov = o;
                    pick = b;
                }
            }
        }
        sp.overlap = ov;
        sp.track_ok = ov > 0.5;
        sp.sector_index = pick;
        sp.energy = p.values(pick);
        sp.jz = p.jz(pick);
        sp.global_index = global_band_index(sp.pos, scheme, {band.sector, pick});
        scan.points[static_cast<size_t>(j) * grid.na + i] = sp;
        return p.vectors.col(pick);
    };

    std::vector<Eigen::VectorXcd> column(grid.nb);
    column[0] = evaluate(0, 0, nullptr);
    for (int j = 1; j < grid.nb; ++j) column[j] = evaluate(0, j, &column[j - 1]);
    for (int j = 0; j < grid.nb; ++j) {
        Eigen::VectorXcd prev = column[j];
        for (int i = 1; i < grid.na; ++i) prev = evaluate(i, j, &prev);
    }
    return scan;
}

double golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol,
                               double* fmin) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    if (fmin) *fmin = f(x);
    return x;
}

WellResult locate_well(const BandRef& band, double r0, double r1, const StarkScheme& scheme, int n_scan) {
    if (!(r1 > r0) || r0 <= 0.0) throw std::invalid_argument("locate_well: invalid radial window");
    const SurfaceScan scan = scan_surface(band, ScanGrid::radial(r0, r1, n_scan), scheme);
    int imin = -1;
    for (int i = 1; i + 1 < n_scan; ++i) {
        const double e = scan.at(i, 0).energy;
        if (e < scan.at(i - 1, 0).energy && e < scan.at(i + 1, 0).energy &&
            (imin < 0 || e < scan.at(imin, 0).energy))
            imin = i;
    }
    if (imin < 0) throw NumericalError("locate_well: no interior minimum in the radial window");
    const int idx = scan.at(imin, 0).sector_index;
    const double h = (r1 - r0) / (n_scan - 1);
    auto f = [&](double R) { return meridian_eigh(R, 0.0, scheme, band.sector).values(idx); };
    WellResult w;
    w.R_min = golden_section_minimize(f, std::max(r0, scan.at(imin, 0).pos.x - h),
                                      std::min(r1, scan.at(imin, 0).pos.x + h), 1e-8, &w.energy);
    int ibar = imin;
    for (int i = imin; i < n_scan; ++i)
        if (scan.at(i, 0).energy > scan.at(ibar, 0).energy) ibar = i;
    w.barrier_R = scan.at(ibar, 0).pos.x;
    w.barrier_energy = scan.at(ibar, 0).energy;
    if (ibar > imin && ibar + 1 < n_scan) {
        auto g = [&](double R) { return -f(R); };
        double fm = 0.0;
        w.barrier_R = golden_section_minimize(g, w.barrier_R - h, w.barrier_R + h, 1e-8, &fm);
        w.barrier_energy = -fm;
    }
    w.depth = w.barrier_energy - w.energy;
    w.global_index = global_band_index({w.R_min, 0.0, 0.0}, scheme, {band.sector, idx});
    return w;
}

DegeneracyResult locate_degeneracy_on_axis(const BandRef& lower, double z0, double z1, const StarkScheme& scheme,
                                           int n_scan) {
    if (sector_is_planar(lower.sector)) throw std::invalid_argument("axis search needs a three-dimensional sector");
    const int b = lower.index;
    if (b < 0 || b + 1 >= sector_basis(lower.sector).cols()) throw std::out_of_range("band pair outside sector");
    const Eigen::VectorXd& jz = sector_jz(lower.sector);
    struct Sample {
        double gap, signed_gap;
    };
    auto sample = [&](double z) {
        const MeridianEigh m = meridian_eigh(0.0, z, scheme, lower.sector);
        const double gap = m.values(b + 1) - m.values(b);
        const double j0 = m.vectors.col(b).cwiseAbs2().dot(jz);
        const double j1 = m.vectors.col(b + 1).cwiseAbs2().dot(jz);
        const double s = j1 > j0 + 1e-6 ? 1.0 : (j1 < j0 - 1e-6 ? -1.0 : 0.0);
        return Sample{gap, s * gap};
    };
    std::vector<double> zs(n_scan);
    std::vector<Sample> ss(n_scan);
    for (int i = 0; i < n_scan; ++i) {
        zs[i] = z0 + (z1 - z0) * i / (n_scan - 1);
        ss[i] = sample(zs[i]);
    }
    int bracket = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n_scan; ++i) {
        if (ss[i].signed_gap * ss[i + 1].signed_gap < 0.0 && ss[i].gap + ss[i + 1].gap < best) {
            best = ss[i].gap + ss[i + 1].gap;
            bracket = i;
        }
    }
    DegeneracyResult out;
    if (bracket >= 0) {
        double a = zs[bracket], c = zs[bracket + 1];
        double fa = ss[bracket].signed_gap;
        while (c - a > 1e-10) {
            const double m = 0.5 * (a + c);
            const double fm = sample(m).signed_gap;
            if (fm == 0.0) {
                a = c = m;
                break;
            }
            if ((fm < 0.0) == (fa < 0.0)) {
                a = m;
                fa = fm;
            } else {
                c = m;
            }
        }
        out.z = 0.5 * (a + c);
        out.gap = sample(out.z).gap;
    } else {
        int imin = 0;
        for (int i = 1; i < n_scan; ++i)
            if (ss[i].gap < ss[imin].gap) imin = i;
        const double h = (z1 - z0) / (n_scan - 1);
        out.z = golden_section_minimize([&](double z) { return sample(z).gap; }, std::max(z0, zs[imin] - h),
                                        std::min(z1, zs[imin] + h), 1e-10, &out.gap);
    }
    if (out.gap > 1e-3) throw NumericalError("locate_degeneracy_on_axis: no degeneracy in window");
    return out;
}

AvoidedCrossing locate_avoided_crossing(const BandRef& lower, double r0, double r1, const StarkScheme& scheme,
                                        int n_scan) {
    const int b = lower.index;
    auto gap = [&](double R) {
        const MeridianEigh m = meridian_eigh(R, 0.0, scheme, lower.sector);
        if (b < 0 || b + 1 >= m.values.size()) throw std::out_of_range("band pair outside sector");
        return m.values(b + 1) - m.values(b);
    };
    int imin = 0;
    double gmin = std::numeric_limits<double>::infinity();
    const double h = (r1 - r0) / (n_scan - 1);
    for (int i = 0; i < n_scan; ++i) {
        const double g = gap(r0 + h * i);
        if (g < gmin) {
            gmin = g;
            imin = i;
        }
    }
    AvoidedCrossing out;
    const double c = r0 + h * imin;
    out.R = golden_section_minimize(gap, std::max(r0, c - h), std::min(r1, c + h), 1e-9, &out.gap);
    return out;
}

}  // namespace rydgauge
