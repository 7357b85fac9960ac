#pragma once

#include "rydgauge/spectrum.hpp"

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace rydgauge {

// Matrix-valued connection and curvature at one point. Components are cylindrical
// (0 = radial, 1 = azimuthal, 2 = z); at phi = 0 they coincide with (x, y, z).
// Eigenvectors are in the azimuthally rotated gauge, so the components do not depend on phi.
struct GaugeFieldSample {
    Position3 pos;
    int q = 1;
    std::array<Eigen::MatrixXcd, 3> A;
    std::array<Eigen::MatrixXcd, 3> B;
    std::array<Eigen::MatrixXcd, 3> commutator;  // the -i[A_k, A_l] part of each B component
    Eigen::VectorXd energies;
};

GaugeFieldSample berry_connection(const Position3& pos, const BandSet& bands, const StarkScheme& scheme,
                                  double fd_step = 1e-4);
GaugeFieldSample berry_curvature(const Position3& pos, const BandSet& bands, const StarkScheme& scheme,
                                 double fd_step = 1e-3);

BandSet single_band(const BandRef& band);

// C = i[A_rho, A_phi] for the in-plane pair at (rho, 0, 0).
Eigen::Matrix2cd commutator_term(double rho, const StarkScheme& scheme, double fd_step = 1e-4);

// Abelian curvature in Cartesian components from the sum-over-states formula (no derivatives of states).
Eigen::Vector3d abelian_curvature(const Position3& pos, const BandRef& band, const StarkScheme& scheme);

// i <psi| (1/rho) d_phi |psi> by central differences of rotated eigenvectors.
double azimuthal_connection_fd(const Position3& pos, const BandRef& band, const StarkScheme& scheme,
                               double h = 1e-5);

struct ChernResult {
    Position3 center;
    double radius = 0.0;
    int n_theta = 0, n_phi = 0;
    int chern = 0;
    double raw = 0.0;
    double residual = 0.0;
    double max_plaquette_phase = 0.0;
    double min_gap = 0.0;
};

// Plaquette sum over a (theta, phi) sphere grid: rows are theta = 0..pi inclusive,
// columns phi periodic. Returns the flux in units of 2 pi with outward orientation.
struct PlaquetteSum {
    double flux = 0.0;
    double max_phase = 0.0;
};
PlaquetteSum plaquette_flux(const std::vector<std::vector<Eigen::VectorXcd>>& grid);

ChernResult chern_number(const Position3& center, double radius, int n_theta, int n_phi, const BandRef& band,
                         const StarkScheme& scheme);

// Phi_kl = (1/2M*) sum_i <d_i psi_k|(1 - P)|d_i psi_l>.
Eigen::MatrixXcd scalar_potential_diagnostic(const Position3& pos, const BandSet& bands, const StarkScheme& scheme,
                                             double mass, double fd_step = 1e-3);

}  // namespace rydgauge
