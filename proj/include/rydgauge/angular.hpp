#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace rydgauge {

using cd = std::complex<double>;
using Mat6 = Eigen::Matrix<cd, 6, 6>;

// Angular-momentum quantum number stored as twice its value.
struct HalfInt {
    int twice = 0;
    double value() const { return 0.5 * twice; }
    friend bool operator==(HalfInt, HalfInt) = default;
};

constexpr HalfInt half(int twice) { return HalfInt{twice}; }

enum class Orbital { S, P };

struct SingleAtomLevel {
    Orbital orbital = Orbital::S;
    HalfInt mj;
    friend bool operator==(const SingleAtomLevel&, const SingleAtomLevel&) = default;
};

// Single-atom basis order: (S,-1/2) (S,+1/2) (P,-3/2) (P,-1/2) (P,+1/2) (P,+3/2).
const std::array<SingleAtomLevel, 6>& single_atom_levels();
int level_index(const SingleAtomLevel& level);

// Condon-Shortley <j1 m1; j2 m2 | J M>.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

// <P m'| d_q |S m> in units of the reduced element; symmetric under swapping from/to.
double dipole_component(int q, const SingleAtomLevel& from, const SingleAtomLevel& to);

// Upward spherical part U_q with (U_q)_{P m', S m} = dipole_component(q, S m, P m').
Mat6 spherical_raising(int q);

struct CartesianDipoles {
    Mat6 x, y, z;
    const Mat6& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

const CartesianDipoles& cartesian_dipole_matrices();

}  // namespace rydgauge
