#include "rydgauge/angular.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rydgauge {

namespace {

double factorial(int n) {
    if (n < 0) throw std::domain_error("factorial of negative integer");
    return std::tgamma(n + 1.0);
}

void check_pair(HalfInt j, HalfInt m) {
    if (j.twice < 0) throw std::domain_error("negative angular momentum");
    if (std::abs(m.twice) > j.twice) throw std::domain_error("|m| exceeds j");
    if ((j.twice - m.twice) % 2 != 0) throw std::domain_error("j and m differ by a half-integer");
}

}  // namespace

const std::array<SingleAtomLevel, 6>& single_atom_levels() {
    static const std::array<SingleAtomLevel, 6> levels{{
        {Orbital::S, half(-1)},
        {Orbital::S, half(1)},
        {Orbital::P, half(-3)},
        {Orbital::P, half(-1)},
        {Orbital::P, half(1)},
        {Orbital::P, half(3)},
    }};
    return levels;
}

int level_index(const SingleAtomLevel& level) {
    const auto& levels = single_atom_levels();
    for (int i = 0; i < 6; ++i)
        if (levels[i] == level) return i;
    throw std::domain_error("not an s1/2 or p3/2 level");
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
    check_pair(j1, m1);
    check_pair(j2, m2);
    check_pair(J, M);
    if (m1.twice + m2.twice != M.twice) return 0.0;
    if (J.twice > j1.twice + j2.twice || J.twice < std::abs(j1.twice - j2.twice)) return 0.0;
    if ((j1.twice + j2.twice + J.twice) % 2 != 0) return 0.0;

    // Racah formula; every argument below is an integer.
    const int a = (j1.twice + j2.twice - J.twice) / 2;
    const int b = (j1.twice - m1.twice) / 2;
    const int c = (j2.twice + m2.twice) / 2;
    const int d = (J.twice - j2.twice + m1.twice) / 2;
    const int e = (J.twice - j1.twice - m2.twice) / 2;

    const double pref = std::sqrt((J.twice + 1.0) * factorial((J.twice + j1.twice - j2.twice) / 2) *
                                  factorial((J.twice - j1.twice + j2.twice) / 2) * factorial(a) /
                                  factorial((j1.twice + j2.twice + J.twice) / 2 + 1)) *
                        std::sqrt(factorial((J.twice + M.twice) / 2) * factorial((J.twice - M.twice) / 2) *
                                  factorial((j1.twice - m1.twice) / 2) * factorial((j1.twice + m1.twice) / 2) *
                                  factorial((j2.twice - m2.twice) / 2) * factorial((j2.twice + m2.twice) / 2));

    double sum = 0.0;
    for (int k = 0; k <= a; ++k) {
        if (b - k < 0 || c - k < 0 || d + k < 0 || e + k < 0) continue;
        const double term = 1.0 / (factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k) *
                                   factorial(d + k) * factorial(e + k));
        sum += (k % 2 == 0) ? term : -term;
    }
    return pref * sum;
}

double dipole_component(int q, const SingleAtomLevel& from, const SingleAtomLevel& to) {
    if (q < -1 || q > 1) throw std::domain_error("spherical component q must be -1, 0 or +1");
    level_index(from);
    level_index(to);
    const SingleAtomLevel* s = nullptr;
    const SingleAtomLevel* p = nullptr;
    if (from.orbital == Orbital::S && to.orbital == Orbital::P) {
        s = &from;
        p = &to;
    } else if (from.orbital == Orbital::P && to.orbital == Orbital::S) {
        s = &to;
        p = &from;
    } else {
        return 0.0;
    }
    if (p->mj.twice != s->mj.twice + 2 * q) return 0.0;
    return clebsch_gordan(half(1), s->mj, half(2), half(2 * q), half(3), p->mj);
}

Mat6 spherical_raising(int q) {
    const auto& levels = single_atom_levels();
    Mat6 u = Mat6::Zero();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (levels[i].orbital == Orbital::P && levels[j].orbital == Orbital::S)
                u(i, j) = dipole_component(q, levels[j], levels[i]);
    return u;
}

const CartesianDipoles& cartesian_dipole_matrices() {
    static const CartesianDipoles d = [] {
        const Mat6 um = spherical_raising(-1), u0 = spherical_raising(0), up = spherical_raising(1);
        const double r2 = std::sqrt(2.0);
        const cd I(0.0, 1.0);
        const Mat6 x = (um - up) / r2;
        const Mat6 y = I * (um + up) / r2;
        CartesianDipoles out;
        out.x = x + x.adjoint();
        out.y = y + y.adjoint();
        out.z = u0 + u0.adjoint();
        return out;
    }();
    return d;
}

}  // namespace rydgauge
