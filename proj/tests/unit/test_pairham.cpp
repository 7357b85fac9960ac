#include "rydgauge/pairham.hpp"

#include <doctest.h>

#include <cmath>

using namespace rydgauge;

namespace {

// Direct assembly of sum_ij T_ij d1_i d2_j over the 16 pair states from single-atom matrices.
Mat16 reference_vdd(const Eigen::Vector3d& r) {
    const double R = r.norm();
    const Eigen::Matrix3d T = Eigen::Matrix3d::Identity() / std::pow(R, 3) - 3.0 * r * r.transpose() / std::pow(R, 5);
    const auto& d = cartesian_dipole_matrices();
    auto levels_of = [](const PairBasisState& s) {
        const int sl = level_index({Orbital::S, s.ms}), pl = level_index({Orbital::P, s.mp});
        return s.config == PairConfig::Atom1S_Atom2P ? std::pair{sl, pl} : std::pair{pl, sl};
    };
    Mat16 V = Mat16::Zero();
    const auto& basis = pair_basis();
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            const auto [a1, a2] = levels_of(basis[a]);
            const auto [b1, b2] = levels_of(basis[b]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) V(a, b) += T(i, j) * d[i](a1, b1) * d[j](a2, b2);
        }
    return V;
}

}  // namespace

TEST_CASE("pair basis ordering and exchange partners") {
    const auto& basis = pair_basis();
    for (int i = 0; i < 16; ++i) {
        CHECK(pair_index(basis[i].config, basis[i].ms, basis[i].mp) == i);
        const int j = exchange_partner(i);
        CHECK(exchange_partner(j) == i);
        CHECK(basis[j].config != basis[i].config);
        CHECK(basis[j].ms == basis[i].ms);
        CHECK(basis[j].mp == basis[i].mp);
    }
}

TEST_CASE("dipole-dipole matrix equals a direct single-atom assembly") {
    for (const Eigen::Vector3d r : {Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(0.3, -0.7, 1.1),
                                    Eigen::Vector3d(0.0, 0.0, -0.9), Eigen::Vector3d(-1.4, 0.2, 0.5)}) {
        const Mat16 V = dipole_dipole(Position3::from(r));
        CHECK((V - reference_vdd(r)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("dipole-dipole scales as 1/R^3") {
    const Position3 p{0.4, -0.5, 0.6};
    const Mat16 a = dipole_dipole(p), b = dipole_dipole({2.0 * p.x, 2.0 * p.y, 2.0 * p.z});
    CHECK((a - 8.0 * b).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("dipole-dipole gradient matches central differences") {
    const Position3 p{0.7, 0.3, -0.4};
    const auto g = dipole_dipole_gradient(p);
    const double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(k) = h;
        const Mat16 fd = (dipole_dipole(Position3::from(p.vec() + e)) - dipole_dipole(Position3::from(p.vec() - e))) /
                         (2.0 * h);
        CHECK((g[k] - fd).cwiseAbs().maxCoeff() < 1e-6 * fd.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("total Hamiltonian symmetries") {
    const StarkScheme s = StarkScheme::standard(-3.0);
    const Position3 p{0.8, -0.3, 0.5};
    const Mat16 H = total_internal_hamiltonian(p, s);
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    const Mat16 P = exchange_operator();
    CHECK((H * P - P * H).cwiseAbs().maxCoeff() < 1e-13);
    const Mat16 Hz = total_internal_hamiltonian({0.0, 0.0, 1.2}, s);
    const Mat16 J = jz_operator();
    CHECK((Hz * J - J * Hz).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((H * J - J * H).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("meridian Hamiltonian is the real phi = 0 slice") {
    const StarkScheme s = StarkScheme::standard(-1.16);
    const RMat16 Hm = meridian_hamiltonian(1.1, -0.4, s);
    const Mat16 H = total_internal_hamiltonian({1.1, 0.0, -0.4}, s);
    CHECK((Hm.cast<cd>() - H).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Stark schemes place the shifts on the intended sublevels") {
    const StarkScheme inner = StarkScheme::standard(-3.0);
    CHECK(inner.p_shift[1] == -1.0);
    CHECK(inner.p_shift[2] == -3.0);
    CHECK(inner.p_shift[0] == 0.0);
    CHECK(inner.p_shift[3] == 0.0);
    const StarkScheme st = StarkScheme::make(StarkKind::Stretched, -1.0, -3.0);
    CHECK(st.p_shift[3] == -1.0);
    CHECK(st.p_shift[0] == -3.0);
    const StarkScheme sl = StarkScheme::make(StarkKind::SLevels, -1.0, -3.0);
    CHECK(sl.s_shift[1] == -1.0);
    CHECK(sl.s_shift[0] == -3.0);
    // Each pair state carries the shift of its s and p atom.
    const Mat16 Hs = stark_hamiltonian(inner);
    for (int i = 0; i < 16; ++i) {
        const auto& st16 = pair_basis()[i];
        const double expect = inner.p_shift[(st16.mp.twice + 3) / 2] + inner.s_shift[(st16.ms.twice + 1) / 2];
        CHECK(Hs(i, i).real() == doctest::Approx(expect));
    }
    CHECK(stark_kind_from_string(to_string(StarkKind::InnerMirrored)) == StarkKind::InnerMirrored);
    CHECK_THROWS(stark_kind_from_string("nonsense"));
}

TEST_CASE("mass parameter for sodium") {
    const double m = 22.98976928 * 1.66053906660e-27;
    const double expect = 0.5 * m * 0.75e-6 * 0.75e-6 * 2.0 * M_PI * 39.0e6 / 1.054571817e-34;
    CHECK(mass_parameter(Species::sodium()) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(mass_parameter(Species::sodium()) == doctest::Approx(24948.5).epsilon(1e-5));
}
