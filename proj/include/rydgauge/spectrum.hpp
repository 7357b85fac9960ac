#pragma once

#include "rydgauge/pairham.hpp"

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace rydgauge {

// Symmetry blocks of the internal Hamiltonian. Exchange parity (gerade/ungerade) is exact
// everywhere; the even/odd M split is exact only in the z = 0 plane.
enum class Sector { Full, Gerade, Ungerade, GeradeEvenM, GeradeOddM, UngeradeEvenM, UngeradeOddM };

std::string to_string(Sector sector);
Sector sector_from_string(const std::string& name);
bool sector_is_planar(Sector sector);
Sector parent_sector(Sector sector);
// 16 x n real isometry whose columns span the sector.
const Eigen::MatrixXd& sector_basis(Sector sector);
// J_z of each sector basis column.
const Eigen::VectorXd& sector_jz(Sector sector);

struct BandRef {
    Sector sector = Sector::Gerade;
    int index = 3;
};

struct BandSet {
    Sector sector = Sector::GeradeOddM;
    std::vector<int> indices{1, 2};
};

// Lower monopole-carrying surface in three dimensions.
BandRef abelian_band();
// In-plane lower and upper well surfaces.
BandRef planar_lower_band();
BandRef planar_upper_band();
BandSet nonabelian_pair();

struct Eigh {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
};

Eigh eigh16(const Mat16& H);
Eigh eigh(const Eigen::MatrixXcd& H);

// Makes the largest-magnitude component positive (lowest index on ties).
void fix_sign(Eigen::Ref<Eigen::VectorXd> v);

enum class GaugeTag { RawSolver, RealAtPhiZero, AzimuthalRotated };

struct AdiabaticPoint {
    Position3 pos;
    Sector sector = Sector::Full;
    GaugeTag gauge = GaugeTag::AzimuthalRotated;
    Eigen::VectorXd values;     // ascending within the sector
    Eigen::MatrixXcd vectors;   // 16 x n, embedded in the pair basis
    std::vector<bool> sign_unstable;
    int dim() const { return static_cast<int>(values.size()); }
    double jz(int band) const;
};

AdiabaticPoint adiabatic_point(const Position3& pos, const StarkScheme& scheme, Sector sector = Sector::Full,
                               GaugeTag gauge = GaugeTag::AzimuthalRotated);

// Real eigensolution of the sector block at (rho, 0, z) in sector coordinates, signs fixed.
struct MeridianEigh {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
MeridianEigh meridian_eigh(double rho, double z, const StarkScheme& scheme, Sector sector);

// Ascending index of the band within the full 16-state spectrum.
int global_band_index(const Position3& pos, const StarkScheme& scheme, const BandRef& band);

struct ScanGrid {
    Position3 origin;
    Eigen::Vector3d e1{1.0, 0.0, 0.0};
    Eigen::Vector3d e2{0.0, 1.0, 0.0};
    double a0 = 0.0, a1 = 1.0;
    int na = 2;
    double b0 = 0.0, b1 = 0.0;
    int nb = 1;
    std::string label = "radial";

    Position3 point(int i, int j) const;
    static ScanGrid radial(double r0, double r1, int n, double phi = 0.0, double z = 0.0);
    static ScanGrid plane_xy(double x0, double x1, int nx, double y0, double y1, int ny, double z = 0.0);
    static ScanGrid plane_xz(double x0, double x1, int nx, double z0, double z1, int nz, double y = 0.0);
};

struct ScanPoint {
    Position3 pos;
    int i = 0, j = 0;
    double energy = 0.0;
    double jz = 0.0;
    double overlap = 1.0;
    bool track_ok = true;
    int sector_index = 0;
    int global_index = 0;
};

// Sweep order: the first column (i = 0) is tracked along j from (0,0), then each line j
// is tracked along i from its first point.
struct SurfaceScan {
    BandRef band;
    ScanGrid grid;
    std::vector<ScanPoint> points;  // index j * na + i
    bool all_tracked() const;
    const ScanPoint& at(int i, int j) const { return points[static_cast<size_t>(j) * grid.na + i]; }
};

SurfaceScan scan_surface(const BandRef& band, const ScanGrid& grid, const StarkScheme& scheme);

double golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol,
                               double* fmin = nullptr);

struct WellResult {
    double R_min = 0.0;
    double energy = 0.0;
    double barrier_R = 0.0;
    double barrier_energy = 0.0;
    double depth = 0.0;
    int global_index = 0;
};

// In-plane radial well of `band` inside [r0, r1] along phi = 0.
WellResult locate_well(const BandRef& band, double r0, double r1, const StarkScheme& scheme, int n_scan = 600);

struct DegeneracyResult {
    double z = 0.0;
    double gap = 0.0;
};

// Crossing of bands lower.index and lower.index + 1 on the z axis.
DegeneracyResult locate_degeneracy_on_axis(const BandRef& lower, double z0, double z1, const StarkScheme& scheme,
                                           int n_scan = 400);

struct AvoidedCrossing {
    double R = 0.0;
    double gap = 0.0;
};

// Minimum in-plane gap between lower.index and lower.index + 1 in [r0, r1].
AvoidedCrossing locate_avoided_crossing(const BandRef& lower, double r0, double r1, const StarkScheme& scheme,
                                        int n_scan = 400);

}  // namespace rydgauge
