#include "rydgauge/pairham.hpp"

#include "rydgauge/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace rydgauge {

namespace {

int ms_index(HalfInt ms) {
    if (ms.twice == -1) return 0;
    if (ms.twice == 1) return 1;
    throw std::domain_error("m_s must be +/-1/2");
}

int mp_index(HalfInt mp) {
    switch (mp.twice) {
        case -3: return 0;
        case -1: return 1;
        case 1: return 2;
        case 3: return 3;
        default: throw std::domain_error("m_p must be +/-1/2 or +/-3/2");
    }
}

// 36 -> 16 selection: column k holds the tensor-product index of pair state k.
Eigen::Matrix<double, 36, 16> embedding() {
    Eigen::Matrix<double, 36, 16> P = Eigen::Matrix<double, 36, 16>::Zero();
    const auto& basis = pair_basis();
    for (int k = 0; k < 16; ++k) {
        const SingleAtomLevel s{Orbital::S, basis[k].ms};
        const SingleAtomLevel p{Orbital::P, basis[k].mp};
        const bool s_first = basis[k].config == PairConfig::Atom1S_Atom2P;
        const int a = level_index(s_first ? s : p);
        const int b = level_index(s_first ? p : s);
        P(a * 6 + b, k) = 1.0;
    }
    return P;
}

}  // namespace

const std::array<PairBasisState, 16>& pair_basis() {
    static const std::array<PairBasisState, 16> basis = [] {
        std::array<PairBasisState, 16> b{};
        const int ms[2] = {-1, 1};
        const int mp[4] = {-3, -1, 1, 3};
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 4; ++j)
                    b[c * 8 + i * 4 + j] = {static_cast<PairConfig>(c), half(ms[i]), half(mp[j])};
        return b;
    }();
    return basis;
}

int pair_index(PairConfig config, HalfInt ms, HalfInt mp) {
    return static_cast<int>(config) * 8 + ms_index(ms) * 4 + mp_index(mp);
}

int exchange_partner(int index) {
    if (index < 0 || index >= 16) throw std::out_of_range("pair index");
    return index < 8 ? index + 8 : index - 8;
}

std::string to_string(StarkKind kind) {
    switch (kind) {
        case StarkKind::Stretched: return "stretched";
        case StarkKind::Inner: return "inner";
        case StarkKind::InnerMirrored: return "inner_mirrored";
        case StarkKind::SLevels: return "s_levels";
        case StarkKind::Custom: return "custom";
    }
    return "custom";
}

StarkKind stark_kind_from_string(const std::string& name) {
    if (name == "stretched") return StarkKind::Stretched;
    if (name == "inner") return StarkKind::Inner;
    if (name == "inner_mirrored") return StarkKind::InnerMirrored;
    if (name == "s_levels") return StarkKind::SLevels;
    if (name == "custom") return StarkKind::Custom;
    throw ConfigError("unknown Stark scheme kind '" + name + "'");
}

StarkScheme StarkScheme::make(StarkKind kind, double delta_bar, double Delta_bar) {
    StarkScheme s;
    s.kind = kind;
    s.delta_bar = delta_bar;
    s.Delta_bar = Delta_bar;
    switch (kind) {
        case StarkKind::Stretched:
            s.p_shift = {Delta_bar, 0.0, 0.0, delta_bar};
            break;
        case StarkKind::Inner:
            s.p_shift = {0.0, delta_bar, Delta_bar, 0.0};
            break;
        case StarkKind::InnerMirrored:
            s.p_shift = {0.0, Delta_bar, delta_bar, 0.0};
            break;
        case StarkKind::SLevels:
            s.s_shift = {Delta_bar, delta_bar};
            break;
        case StarkKind::Custom:
            throw ConfigError("custom Stark schemes are built from explicit sublevel shifts");
    }
    return s;
}

StarkScheme StarkScheme::custom(const std::array<double, 4>& p, const std::array<double, 2>& s) {
    StarkScheme out;
    out.kind = StarkKind::Custom;
    out.p_shift = p;
    out.s_shift = s;
    out.delta_bar = 0.0;
    out.Delta_bar = 0.0;
    return out;
}

double Position3::rho() const { return std::hypot(x, y); }
double Position3::phi() const { return std::atan2(y, x); }
double Position3::norm() const { return std::sqrt(x * x + y * y + z * z); }
Position3 Position3::cylindrical(double rho, double phi, double z) {
    return {rho * std::cos(phi), rho * std::sin(phi), z};
}

Mat16 stark_hamiltonian(const StarkScheme& scheme) {
    Mat16 h = Mat16::Zero();
    const auto& basis = pair_basis();
    for (int k = 0; k < 16; ++k)
        h(k, k) = scheme.p_shift[mp_index(basis[k].mp)] + scheme.s_shift[ms_index(basis[k].ms)];
    return h;
}

const std::array<std::array<Mat16, 3>, 3>& dipole_products() {
    static const std::array<std::array<Mat16, 3>, 3> K = [] {
        std::array<std::array<Mat16, 3>, 3> out{};
        const auto& d = cartesian_dipole_matrices();
        const auto P = embedding();
        const Eigen::Matrix<cd, 6, 6> I6 = Eigen::Matrix<cd, 6, 6>::Identity();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Eigen::Matrix<cd, 36, 36> d1, d2;
                for (int a = 0; a < 6; ++a)
                    for (int b = 0; b < 6; ++b) {
                        d1.block<6, 6>(a * 6, b * 6) = d[i](a, b) * I6;
                        d2.block<6, 6>(a * 6, b * 6) = I6(a, b) * d[j];
                    }
                out[i][j] = P.transpose().cast<cd>() * (d1 * d2) * P.cast<cd>();
            }
        return out;
    }();
    return K;
}

DipoleTensor interaction_tensor(const Eigen::Vector3d& r) {
    const double R2 = r.squaredNorm();
    if (R2 == 0.0) throw NumericalError("dipole-dipole interaction is singular at R = 0");
    const double R = std::sqrt(R2);
    const double inv3 = 1.0 / (R2 * R);
    const double inv5 = inv3 / R2;
    return inv3 * DipoleTensor::Identity() - 3.0 * inv5 * (r * r.transpose());
}

std::array<DipoleTensor, 3> interaction_tensor_gradient(const Eigen::Vector3d& r) {
    const double R2 = r.squaredNorm();
    if (R2 == 0.0) throw NumericalError("dipole-dipole interaction is singular at R = 0");
    const double R = std::sqrt(R2);
    const double inv5 = 1.0 / (R2 * R2 * R);
    const double inv7 = inv5 / R2;
    std::array<DipoleTensor, 3> g{};
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = -3.0 * (i == j ? r[k] : 0.0) * inv5;
                v -= 3.0 * ((i == k ? r[j] : 0.0) + (j == k ? r[i] : 0.0)) * inv5;
                v += 15.0 * r[i] * r[j] * r[k] * inv7;
                g[k](i, j) = v;
            }
    return g;
}

Mat16 dipole_dipole(const Position3& pos) {
    const DipoleTensor T = interaction_tensor(pos.vec());
    const auto& K = dipole_products();
    Mat16 V = Mat16::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (T(i, j) != 0.0) V += T(i, j) * K[i][j];
    return V;
}

std::array<Mat16, 3> dipole_dipole_gradient(const Position3& pos) {
    const auto dT = interaction_tensor_gradient(pos.vec());
    const auto& K = dipole_products();
    std::array<Mat16, 3> g{};
    for (int k = 0; k < 3; ++k) {
        g[k] = Mat16::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (dT[k](i, j) != 0.0) g[k] += dT[k](i, j) * K[i][j];
    }
    return g;
}

Mat16 total_internal_hamiltonian(const Position3& pos, const StarkScheme& scheme) {
    return stark_hamiltonian(scheme) + dipole_dipole(pos);
}

RMat16 meridian_hamiltonian(double rho, double z, const StarkScheme& scheme) {
    static const std::array<std::array<RMat16, 3>, 3> Kr = [] {
        std::array<std::array<RMat16, 3>, 3> out{};
        const auto& K = dipole_products();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out[i][j] = K[i][j].real();
        return out;
    }();
    const DipoleTensor T = interaction_tensor({rho, 0.0, z});
    RMat16 H = stark_hamiltonian(scheme).real();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (T(i, j) != 0.0) H.noalias() += T(i, j) * Kr[i][j];
    return H;
}

const Eigen::Matrix<double, 16, 1>& jz_diagonal() {
    static const Eigen::Matrix<double, 16, 1> d = [] {
        Eigen::Matrix<double, 16, 1> v;
        const auto& b = pair_basis();
        for (int k = 0; k < 16; ++k) v(k) = b[k].jz();
        return v;
    }();
    return d;
}

Mat16 jz_operator() { return jz_diagonal().cast<cd>().asDiagonal(); }

Mat16 exchange_operator() {
    Mat16 X = Mat16::Zero();
    for (int k = 0; k < 16; ++k) X(exchange_partner(k), k) = 1.0;
    return X;
}

Species Species::sodium() { return {"Na23", 22.98976928, 0.75e-6, 39.0e6}; }
Species Species::potassium() { return {"K39", 38.9637064864, 1.28e-6, 24.7e6}; }

double mass_parameter(const Species& species) {
    if (species.mass_amu <= 0.0 || species.R0_m <= 0.0 || species.delta_over_2pi_Hz <= 0.0)
        throw ConfigError("species mass, R0 and |delta| must be positive");
    const double mu = 0.5 * species.mass_amu * constants::amu;
    const double delta = 2.0 * M_PI * species.delta_over_2pi_Hz;
    return mu * species.R0_m * species.R0_m * delta / constants::hbar;
}

}  // namespace rydgauge
