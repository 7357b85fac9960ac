#include "rydgauge/angular.hpp"

#include <doctest.h>

#include <cmath>

using namespace rydgauge;

TEST_CASE("Clebsch-Gordan values match the Condon-Shortley table") {
    const double a = std::sqrt(2.0 / 3.0), b = std::sqrt(1.0 / 3.0);
    // j1 = 1, j2 = 1/2
    CHECK(clebsch_gordan(half(2), half(2), half(1), half(1), half(3), half(3)) == doctest::Approx(1.0));
    CHECK(clebsch_gordan(half(2), half(0), half(1), half(1), half(3), half(1)) == doctest::Approx(a));
    CHECK(clebsch_gordan(half(2), half(2), half(1), half(-1), half(3), half(1)) == doctest::Approx(b));
    CHECK(clebsch_gordan(half(2), half(0), half(1), half(1), half(1), half(1)) == doctest::Approx(-b));
    CHECK(clebsch_gordan(half(2), half(2), half(1), half(-1), half(1), half(1)) == doctest::Approx(a));
    // j1 = 1/2, j2 = 1: the J = 1/2 column picks up (-1)^(j1 + j2 - J) = -1
    CHECK(clebsch_gordan(half(1), half(1), half(2), half(0), half(3), half(1)) == doctest::Approx(a));
    CHECK(clebsch_gordan(half(1), half(1), half(2), half(0), half(1), half(1)) == doctest::Approx(b));
    CHECK(clebsch_gordan(half(1), half(-1), half(2), half(2), half(1), half(1)) == doctest::Approx(-a));
}

TEST_CASE("Clebsch-Gordan selection rules") {
    CHECK(clebsch_gordan(half(2), half(2), half(1), half(1), half(3), half(1)) == 0.0);
    CHECK(clebsch_gordan(half(2), half(2), half(1), half(1), half(5), half(3)) == 0.0);
}

TEST_CASE("Cartesian dipole matrices are Hermitian and isotropic") {
    const auto& d = cartesian_dipole_matrices();
    Mat6 sum = Mat6::Zero();
    for (int i = 0; i < 3; ++i) {
        CHECK((d[i] - d[i].adjoint()).cwiseAbs().maxCoeff() < 1e-15);
        sum += d[i] * d[i];
    }
    // S block: sum over final P states of squared couplings is 2; P block: 1 per state.
    Eigen::Matrix<double, 6, 1> expect;
    expect << 2, 2, 1, 1, 1, 1;
    CHECK((sum - Mat6(expect.cast<cd>().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("d_z conserves m and d_x, d_y change it by one") {
    const auto& levels = single_atom_levels();
    const auto& d = cartesian_dipole_matrices();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const int dm = levels[i].mj.twice - levels[j].mj.twice;
            if (dm != 0) CHECK(std::abs(d.z(i, j)) == 0.0);
            if (std::abs(dm) != 2) {
                CHECK(std::abs(d.x(i, j)) == 0.0);
                CHECK(std::abs(d.y(i, j)) == 0.0);
            }
        }
}

TEST_CASE("level_index inverts single_atom_levels and rejects unknown levels") {
    const auto& levels = single_atom_levels();
    for (int i = 0; i < 6; ++i) CHECK(level_index(levels[i]) == i);
    CHECK_THROWS(level_index({Orbital::S, half(3)}));
    CHECK_THROWS(dipole_component(2, levels[0], levels[2]));
}
