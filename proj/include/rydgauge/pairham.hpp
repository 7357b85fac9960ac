#pragma once

#include "rydgauge/angular.hpp"

#include <Eigen/Dense>
#include <array>
#include <string>

namespace rydgauge {

using Mat16 = Eigen::Matrix<cd, 16, 16>;
using Vec16 = Eigen::Matrix<cd, 16, 1>;
using RMat16 = Eigen::Matrix<double, 16, 16>;

enum class PairConfig { Atom1S_Atom2P = 0, Atom1P_Atom2S = 1 };

struct PairBasisState {
    PairConfig config = PairConfig::Atom1S_Atom2P;
    HalfInt ms;
    HalfInt mp;
    int jz() const { return (ms.twice + mp.twice) / 2; }
};

// index = config*8 + (ms index)*4 + (mp index)
const std::array<PairBasisState, 16>& pair_basis();
int pair_index(PairConfig config, HalfInt ms, HalfInt mp);
// Index of the state with the atom labels swapped.
int exchange_partner(int index);

enum class StarkKind { Stretched, Inner, InnerMirrored, SLevels, Custom };

std::string to_string(StarkKind kind);
StarkKind stark_kind_from_string(const std::string& name);

struct StarkScheme {
    StarkKind kind = StarkKind::Inner;
    double delta_bar = -1.0;
    double Delta_bar = -3.0;
    std::array<double, 4> p_shift{};  // m_p = -3/2, -1/2, +1/2, +3/2
    std::array<double, 2> s_shift{};  // m_s = -1/2, +1/2

    // Stretched: delta on p +3/2, Delta on p -3/2.
    // Inner: delta on p -1/2, Delta on p +1/2 (default).
    // InnerMirrored: delta on p +1/2, Delta on p -1/2.
    // SLevels: delta on s +1/2, Delta on s -1/2.
    static StarkScheme make(StarkKind kind, double delta_bar, double Delta_bar);
    static StarkScheme standard(double Delta_bar) { return make(StarkKind::Inner, -1.0, Delta_bar); }
    static StarkScheme custom(const std::array<double, 4>& p, const std::array<double, 2>& s);
};

struct Position3 {
    double x = 0.0, y = 0.0, z = 0.0;
    double rho() const;
    double phi() const;
    double norm() const;
    Eigen::Vector3d vec() const { return {x, y, z}; }
    static Position3 from(const Eigen::Vector3d& r) { return {r.x(), r.y(), r.z()}; }
    static Position3 cylindrical(double rho, double phi, double z);
};

Mat16 stark_hamiltonian(const StarkScheme& scheme);
Mat16 dipole_dipole(const Position3& pos);
// d V_dd / d x_k for k = x, y, z.
std::array<Mat16, 3> dipole_dipole_gradient(const Position3& pos);
Mat16 total_internal_hamiltonian(const Position3& pos, const StarkScheme& scheme);
// H at (rho, phi=0, z), which is real symmetric.
RMat16 meridian_hamiltonian(double rho, double z, const StarkScheme& scheme);
Mat16 jz_operator();
const Eigen::Matrix<double, 16, 1>& jz_diagonal();
Mat16 exchange_operator();

// Expectation values G_ij = <psi| d1_i d2_j |psi> projected; V_dd energy and force follow by contraction.
using DipoleTensor = Eigen::Matrix3d;
DipoleTensor interaction_tensor(const Eigen::Vector3d& r);
std::array<DipoleTensor, 3> interaction_tensor_gradient(const Eigen::Vector3d& r);
const std::array<std::array<Mat16, 3>, 3>& dipole_products();

struct Species {
    std::string name;
    double mass_amu = 0.0;
    double R0_m = 0.0;
    double delta_over_2pi_Hz = 0.0;
    static Species sodium();
    static Species potassium();
};

// M* = mu R0^2 |delta| / hbar with mu = m/2.
double mass_parameter(const Species& species);

namespace constants {
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double amu = 1.66053906660e-27;
inline constexpr double kB = 1.380649e-23;
}  // namespace constants

}  // namespace rydgauge
