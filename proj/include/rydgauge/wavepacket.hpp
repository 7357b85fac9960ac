#pragma once

#include "rydgauge/spectrum.hpp"

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rydgauge {

// FFTW planning mode: estimated plans (default) give bit-identical results from run to run;
// measured plans are faster but may pick a different algorithm each run.
void set_fft_planning(bool measure);

// Square periodic grid x_i = (i - N/2) dx with dx = 2L/N.
struct Grid2D {
    double L = 2.2;
    int N = 512;
    double dx() const { return 2.0 * L / N; }
    double coord(int i) const { return (i - N / 2) * dx(); }
    size_t size() const { return static_cast<size_t>(N) * N; }
    size_t index(int ix, int iy) const { return static_cast<size_t>(iy) * N + ix; }
    void validate() const;
};

// Adiabatic frame of the in-plane pair at one radius (phi = 0): columns of V are the lower and
// upper band in coordinates of the gerade odd-M sector.
struct RadialFrame {
    double rho = 0.0;
    Eigen::Vector2d eps = Eigen::Vector2d::Zero();
    Eigen::Matrix<double, 4, 2> V = Eigen::Matrix<double, 4, 2>::Zero();
    Eigen::Matrix2cd A_rho = Eigen::Matrix2cd::Zero();
    Eigen::Matrix2d A_phi = Eigen::Matrix2d::Zero();
};

struct MapOptions {
    double r_inner = 0.6;
    double r_outer = 2.2;
    double potential_cap = 0.5;
    double reference_step = 1e-3;
};

// Pointwise data of the q = 2 problem on the valid (masked-in) points.
struct FieldMaps {
    Grid2D grid;
    MapOptions options;
    std::vector<std::uint8_t> mask;  // per grid point
    std::vector<int> valid;          // flat indices of valid points
    std::vector<Eigen::Matrix2cd> Ax, Ay;  // per valid point, Cartesian
    std::vector<Eigen::Vector2d> eps;      // uncapped surfaces per valid point
    std::vector<Eigen::Vector2d> V;        // potential used in propagation
    // Radial frames (empty for hand-built maps); shell[k] indexes `radial` for valid point k.
    std::vector<RadialFrame> radial;
    std::vector<int> shell;
    StarkScheme scheme;
    double min_gap = 0.0;
    double min_gap_rho = 0.0;
};

// Frames at arbitrary radii with signs continued from a reference table starting at r0.
std::vector<RadialFrame> radial_frames(const std::vector<double>& rho, const StarkScheme& scheme, double r0,
                                       double r1, double reference_step = 1e-3);

FieldMaps build_field_maps(const Grid2D& grid, const StarkScheme& scheme, const MapOptions& opts = {});
// Maps with every point valid, A = 0 and the given potentials; used for benchmarks.
FieldMaps free_maps(const Grid2D& grid);

// Two-component amplitudes, component-major (component c at offset c * N * N).
struct SpinorField2D {
    Grid2D grid;
    double t = 0.0;
    std::vector<std::complex<double>> psi;
    std::complex<double>& at(int c, size_t k) { return psi[c * grid.size() + k]; }
    std::complex<double> at(int c, size_t k) const { return psi[c * grid.size() + k]; }
};

// Isotropic Gaussian with the given FWHM of |alpha|^2 in component `band` (0 lower, 1 upper).
SpinorField2D gaussian_packet(const Grid2D& grid, double cx, double cy, double fwhm, int band,
                              const FieldMaps* maps = nullptr);

struct Populations {
    double P1 = 0.0, P2 = 0.0, norm = 0.0;
};
Populations populations(const SpinorField2D& field);

struct SpectralBounds {
    double lower = 0.0, upper = 0.0;
};

// Applies H = (p - A)^2 / 2M + V spectrally; owns FFT plans and work buffers.
class SpinorHamiltonian {
public:
    SpinorHamiltonian(const FieldMaps& maps, double mass, int threads = 1);
    ~SpinorHamiltonian();
    SpinorHamiltonian(const SpinorHamiltonian&) = delete;
    SpinorHamiltonian& operator=(const SpinorHamiltonian&) = delete;

    void apply(const std::complex<double>* in, std::complex<double>* out);
    double energy(const SpinorField2D& field);
    SpectralBounds bounds() const { return bounds_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SpectralBounds bounds_;
};

struct PropagationStats {
    int steps = 0;
    int chebyshev_terms = 0;
    double norm_drift = 0.0;
    double energy_initial = 0.0, energy_final = 0.0;
    double boundary_fraction = 0.0;
};

// Chebyshev expansion of exp(-i H dt) applied n_steps times; `on_step` sees the field after each step.
PropagationStats propagate(SpinorField2D& field, const FieldMaps& maps, double mass, double dt, int n_steps,
                           int threads = 1,
                           const std::function<void(const SpinorField2D&)>& on_step = nullptr,
                           bool check_contracts = true);

// Weight within `width` of the hard walls relative to the norm.
double boundary_fraction(const SpinorField2D& field, const FieldMaps& maps, double width);

// Rephases band k by exp(i g_k . R) in the maps and exp(-i g_k . R) in the field.
void gauge_transform(FieldMaps& maps, SpinorField2D& field, const Eigen::Vector2d& g1, const Eigen::Vector2d& g2);

// Sixteen pair-basis amplitudes stored in the symmetry-adapted basis of the four planar sectors.
struct FullField2D {
    Grid2D grid;
    double t = 0.0;
    std::vector<std::complex<double>> psi;  // component-major, 16 components
};

FullField2D embed_spinor(const SpinorField2D& field, const FieldMaps& maps);

struct Projection {
    double P1 = 0.0, P2 = 0.0, norm = 0.0, leakage = 0.0;
};
Projection project(const FullField2D& full, const FieldMaps& maps);

struct OracleStats {
    int steps = 0;
    double norm_drift = 0.0;
    double max_block_coupling = 0.0;
};

// Strang split-step for p^2/2M + H_int with exact pointwise exponentials. Adjacent potential
// half steps are merged between callbacks, which fire every `callback_every` steps.
OracleStats oracle_propagate(FullField2D& full, const FieldMaps& maps, double mass, double dt, int n_steps,
                             int threads = 1, const std::function<void(const FullField2D&)>& on_step = nullptr,
                             int callback_every = 1);

struct DensitySnapshot {
    Grid2D grid;
    double t = 0.0;
    std::vector<double> rho1, rho2;
};
DensitySnapshot density_snapshot(const SpinorField2D& field);
void write_snapshot_csv(const DensitySnapshot& snap, const std::string& path, const std::string& header = "");
// Header: int32 N, double L, double t, int32 band count; then row-major doubles per band.
void write_snapshot_binary(const DensitySnapshot& snap, const std::string& path);

struct BeamsplitterConfig {
    Species species = Species::potassium();
    double mass = 0.0;  // overrides the species value when positive
    StarkScheme scheme = StarkScheme::standard(-1.16);
    Grid2D grid{2.2, 512};
    MapOptions maps;
    double dt = 10.0;
    double t_end = 220.0;
    double center_x = 1.5, center_y = 0.0;
    double fwhm_m = 75e-9;
    bool fwhm_is_sigma = false;
    int record_every = 1;
    bool oracle = false;
    int oracle_N = 512;
    double oracle_dt = 0.1;
    int threads = 1;
    bool measure_fft = false;
};

struct PopulationTrace {
    std::vector<double> t, P1, P2, norm;
};

struct BeamsplitterResult {
    BeamsplitterConfig config;
    double mass = 0.0;
    double fwhm = 0.0;
    Populations final;
    PropagationStats stats;
    PopulationTrace trace;
    DensitySnapshot initial, final_snapshot;
    double map_min_gap = 0.0, map_min_gap_rho = 0.0;
    bool has_oracle = false;
    Projection oracle_final;
    OracleStats oracle_stats;
    PopulationTrace oracle_trace;
    double max_leakage = 0.0;
};

double beamsplitter_mass(const BeamsplitterConfig& cfg);
double beamsplitter_fwhm(const BeamsplitterConfig& cfg);
BeamsplitterResult run_beamsplitter(const BeamsplitterConfig& cfg);

}  // namespace rydgauge
