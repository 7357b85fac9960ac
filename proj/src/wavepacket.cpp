#include "rydgauge/wavepacket.hpp"

#include "rydgauge/errors.hpp"
#include "rydgauge/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace rydgauge {

namespace {

using cplx = std::complex<double>;
const cplx I(0.0, 1.0);
constexpr Sector kPairSector = Sector::GeradeOddM;
constexpr std::array<Sector, 4> kPlanarSectors{Sector::GeradeEvenM, Sector::GeradeOddM, Sector::UngeradeEvenM,
                                               Sector::UngeradeOddM};
constexpr int kPairBlock = 1;

bool g_measure_plans = false;

// FFTW buffer of `planes` N x N arrays with an in-place batched plan in each direction.
class FftPlanes {
public:
    FftPlanes(int N, int planes) : n_(static_cast<size_t>(N) * N), planes_(planes) {
        data_ = reinterpret_cast<cplx*>(fftw_alloc_complex(n_ * planes));
        if (!data_) throw std::bad_alloc();
        std::fill(data_, data_ + n_ * planes, cplx(0.0));
        int dims[2] = {N, N};
        auto* raw = reinterpret_cast<fftw_complex*>(data_);
        fwd_ = fftw_plan_many_dft(2, dims, planes, raw, nullptr, 1, static_cast<int>(n_), raw, nullptr, 1,
                                  static_cast<int>(n_), FFTW_FORWARD, flags());
        inv_ = fftw_plan_many_dft(2, dims, planes, raw, nullptr, 1, static_cast<int>(n_), raw, nullptr, 1,
                                  static_cast<int>(n_), FFTW_BACKWARD, flags());
        if (!fwd_ || !inv_) throw std::runtime_error("FFTW planning failed");
        std::fill(data_, data_ + n_ * planes, cplx(0.0));
    }
    ~FftPlanes() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(data_);
    }
    FftPlanes(const FftPlanes&) = delete;
    FftPlanes& operator=(const FftPlanes&) = delete;
    void forward() { fftw_execute(fwd_); }
    void inverse() { fftw_execute(inv_); }
    cplx* plane(int p) { return data_ + p * n_; }
    cplx* data() { return data_; }

private:
    static unsigned flags() { return g_measure_plans ? FFTW_MEASURE : FFTW_ESTIMATE; }
    size_t n_;
    int planes_;
    cplx* data_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

std::vector<double> wavenumbers(const Grid2D& g) {
    std::vector<double> k(g.N);
    const double base = 2.0 * M_PI / (2.0 * g.L);
    for (int i = 0; i < g.N; ++i) k[i] = base * (i < g.N / 2 ? i : i - g.N);
    return k;
}

double frobenius(const Eigen::Matrix2cd& m) { return m.norm(); }

Eigen::Matrix<double, 4, 2> pair_columns(const MeridianEigh& m) {
    Eigen::Matrix<double, 4, 2> V;
    V.col(0) = m.vectors.col(1);
    V.col(1) = m.vectors.col(2);
    return V;
}

// 16 x 16 orthogonal matrix whose column blocks are the four planar sectors.
const Eigen::Matrix<double, 16, 16>& adapted_basis() {
    static const Eigen::Matrix<double, 16, 16> B = [] {
        Eigen::Matrix<double, 16, 16> out;
        for (int b = 0; b < 4; ++b) out.middleCols<4>(4 * b) = sector_basis(kPlanarSectors[b]);
        return out;
    }();
    return B;
}

// J_z of each adapted-basis component.
const std::array<int, 16>& adapted_jz() {
    static const std::array<int, 16> jz = [] {
        std::array<int, 16> out{};
        for (int b = 0; b < 4; ++b) {
            const Eigen::VectorXd& j = sector_jz(kPlanarSectors[b]);
            for (int k = 0; k < 4; ++k) out[4 * b + k] = static_cast<int>(std::lround(j(k)));
        }
        return out;
    }();
    return jz;
}

double point_phi(const Grid2D& g, size_t flat) {
    const int ix = static_cast<int>(flat % g.N), iy = static_cast<int>(flat / g.N);
    return std::atan2(g.coord(iy), g.coord(ix));
}

}  // namespace

void set_fft_planning(bool measure) { g_measure_plans = measure; }

void Grid2D::validate() const {
    if (N < 8 || N % 2 != 0) throw ConfigError("grid N must be even and at least 8");
    if (!(L > 0.0)) throw ConfigError("grid half-width L must be positive");
}

std::vector<RadialFrame> radial_frames(const std::vector<double>& rho, const StarkScheme& scheme, double r0,
                                       double r1, double reference_step) {
    if (!(reference_step > 0.0) || !(r1 > r0) || !(r0 > 0.0)) throw std::invalid_argument("bad reference range");
    const int nref = static_cast<int>(std::ceil((r1 - r0) / reference_step)) + 1;
    std::vector<Eigen::Matrix<double, 4, 2>> ref(nref);
    for (int j = 0; j < nref; ++j) {
        ref[j] = pair_columns(meridian_eigh(r0 + j * reference_step, 0.0, scheme, kPairSector));
        if (j == 0) continue;
        for (int c = 0; c < 2; ++c) {
            const double ov = ref[j].col(c).dot(ref[j - 1].col(c));
            if (std::abs(ov) < 0.9)
                throw NumericalError("radial frame continuation lost track near rho = " +
                                     std::to_string(r0 + j * reference_step));
            if (ov < 0.0) ref[j].col(c) *= -1.0;
        }
    }
    const Eigen::VectorXd& jz = sector_jz(kPairSector);
    const Eigen::MatrixXd& Bs = sector_basis(kPairSector);
    std::vector<RadialFrame> out(rho.size());
    for (size_t i = 0; i < rho.size(); ++i) {
        const double r = rho[i];
        if (r < r0 - 1e-12 || r > r1 + reference_step) throw std::out_of_range("radius outside the reference table");
        const int j = std::clamp(static_cast<int>(std::lround((r - r0) / reference_step)), 0, nref - 1);
        const MeridianEigh m = meridian_eigh(r, 0.0, scheme, kPairSector);
        RadialFrame f;
        f.rho = r;
        f.eps = {m.values(1), m.values(2)};
        Eigen::MatrixXd W = m.vectors;
        for (int c = 0; c < 2; ++c)
            if (W.col(c + 1).dot(ref[j].col(c)) < 0.0) W.col(c + 1) *= -1.0;
        f.V.col(0) = W.col(1);
        f.V.col(1) = W.col(2);
        f.A_phi = f.V.transpose() * jz.asDiagonal() * f.V / r;
        // A_12 = i <1|d_rho H|2> / (eps_2 - eps_1); the diagonal vanishes for real frames.
        const Eigen::MatrixXd G = (Bs.transpose() * dipole_dipole_gradient({r, 0.0, 0.0})[0] * Bs).real();
        const double m12 = f.V.col(0).dot(G * f.V.col(1));
        const cplx a12 = I * m12 / (f.eps(1) - f.eps(0));
        f.A_rho << 0.0, a12, std::conj(a12), 0.0;
        out[i] = f;
    }
    return out;
}

FieldMaps build_field_maps(const Grid2D& grid, const StarkScheme& scheme, const MapOptions& opts) {
    grid.validate();
    if (!(opts.r_inner > 0.0) || !(opts.r_outer > opts.r_inner)) throw ConfigError("map radii must satisfy 0 < r_inner < r_outer");
    if (opts.r_outer > grid.L + 1e-12) throw ConfigError("map outer radius exceeds the grid half-width");
    FieldMaps maps;
    maps.grid = grid;
    maps.options = opts;
    maps.scheme = scheme;
    maps.mask.assign(grid.size(), 0);
    const double dx = grid.dx();
    const int h = grid.N / 2;
    std::vector<int> shell_of_s(static_cast<size_t>(2 * h * h + 1), -1);
    std::vector<long> s_values;
    for (int iy = 0; iy < grid.N; ++iy)
        for (int ix = 0; ix < grid.N; ++ix) {
            const long a = ix - h, b = iy - h, s = a * a + b * b;
            const double r = dx * std::sqrt(static_cast<double>(s));
            if (r < opts.r_inner || r > opts.r_outer || r < 2.0 * dx) continue;
            const size_t k = grid.index(ix, iy);
            maps.mask[k] = 1;
            maps.valid.push_back(static_cast<int>(k));
            if (shell_of_s[s] < 0) {
                shell_of_s[s] = 0;
                s_values.push_back(s);
            }
        }
    std::sort(s_values.begin(), s_values.end());
    std::vector<double> radii(s_values.size());
    for (size_t i = 0; i < s_values.size(); ++i) {
        shell_of_s[s_values[i]] = static_cast<int>(i);
        radii[i] = dx * std::sqrt(static_cast<double>(s_values[i]));
    }
    maps.radial = radial_frames(radii, scheme, opts.r_inner, opts.r_outer, opts.reference_step);
    maps.min_gap = std::numeric_limits<double>::infinity();
    for (const auto& f : maps.radial)
        if (f.eps(1) - f.eps(0) < maps.min_gap) {
            maps.min_gap = f.eps(1) - f.eps(0);
            maps.min_gap_rho = f.rho;
        }
    if (maps.min_gap < 1e-6) throw NumericalError("lower and upper surfaces degenerate inside the box");

    const size_t nv = maps.valid.size();
    maps.shell.resize(nv);
    maps.Ax.resize(nv);
    maps.Ay.resize(nv);
    maps.eps.resize(nv);
    maps.V.resize(nv);
    for (size_t k = 0; k < nv; ++k) {
        const size_t flat = maps.valid[k];
        const int ix = static_cast<int>(flat % grid.N), iy = static_cast<int>(flat / grid.N);
        const long a = ix - h, b = iy - h;
        const int sh = shell_of_s[a * a + b * b];
        const RadialFrame& f = maps.radial[sh];
        const double phi = std::atan2(static_cast<double>(b), static_cast<double>(a));
        const double c = std::cos(phi), s = std::sin(phi);
        const Eigen::Matrix2cd Aphi = f.A_phi.cast<cplx>();
        maps.shell[k] = sh;
        maps.Ax[k] = c * f.A_rho - s * Aphi;
        maps.Ay[k] = s * f.A_rho + c * Aphi;
        maps.eps[k] = f.eps;
        maps.V[k] = f.eps.cwiseMin(opts.potential_cap);
    }
    return maps;
}

FieldMaps free_maps(const Grid2D& grid) {
    grid.validate();
    FieldMaps maps;
    maps.grid = grid;
    maps.options.r_inner = 0.0;
    maps.options.r_outer = std::numeric_limits<double>::infinity();
    maps.mask.assign(grid.size(), 1);
    maps.valid.resize(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) maps.valid[k] = static_cast<int>(k);
    maps.Ax.assign(grid.size(), Eigen::Matrix2cd::Zero());
    maps.Ay.assign(grid.size(), Eigen::Matrix2cd::Zero());
    maps.eps.assign(grid.size(), Eigen::Vector2d::Zero());
    maps.V.assign(grid.size(), Eigen::Vector2d::Zero());
    maps.min_gap = std::numeric_limits<double>::infinity();
    return maps;
}

SpinorField2D gaussian_packet(const Grid2D& grid, double cx, double cy, double fwhm, int band, const FieldMaps* maps) {
    grid.validate();
    if (!(fwhm > 0.0)) throw ConfigError("packet FWHM must be positive");
    if (band != 0 && band != 1) throw ConfigError("packet band must be 0 (lower) or 1 (upper)");
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    SpinorField2D f;
    f.grid = grid;
    f.psi.assign(2 * grid.size(), 0.0);
    double norm = 0.0;
    for (int iy = 0; iy < grid.N; ++iy)
        for (int ix = 0; ix < grid.N; ++ix) {
            const size_t k = grid.index(ix, iy);
            if (maps && !maps->mask[k]) continue;
            const double dxp = grid.coord(ix) - cx, dyp = grid.coord(iy) - cy;
            const double a = std::exp(-(dxp * dxp + dyp * dyp) / (4.0 * sigma * sigma));
            f.at(band, k) = a;
            norm += a * a;
        }
    norm *= grid.dx() * grid.dx();
    if (norm <= 0.0) throw ConfigError("packet lies entirely outside the valid region");
    const double s = 1.0 / std::sqrt(norm);
    for (auto& v : f.psi) v *= s;
    return f;
}

Populations populations(const SpinorField2D& field) {
    Populations p;
    const size_t n = field.grid.size();
    for (size_t k = 0; k < n; ++k) {
        p.P1 += std::norm(field.psi[k]);
        p.P2 += std::norm(field.psi[n + k]);
    }
    const double w = field.grid.dx() * field.grid.dx();
    p.P1 *= w;
    p.P2 *= w;
    p.norm = p.P1 + p.P2;
    return p;
}

struct SpinorHamiltonian::Impl {
    const FieldMaps& maps;
    double mass;
    int threads;
    size_t n;
    std::vector<double> kx, ky;
    FftPlanes psi_hat, grad, chi, out_hat;
    std::vector<Eigen::Matrix2cd> W;  // A^2 / 2M + V per valid point

    Impl(const FieldMaps& m, double M, int th)
        : maps(m), mass(M), threads(th), n(m.grid.size()), kx(wavenumbers(m.grid)), ky(kx),
          psi_hat(m.grid.N, 2), grad(m.grid.N, 4), chi(m.grid.N, 4), out_hat(m.grid.N, 2) {
        W.resize(maps.valid.size());
        for (size_t k = 0; k < W.size(); ++k) {
            W[k] = (maps.Ax[k] * maps.Ax[k] + maps.Ay[k] * maps.Ay[k]) / (2.0 * mass);
            W[k](0, 0) += maps.V[k](0);
            W[k](1, 1) += maps.V[k](1);
        }
    }

    void apply(const cplx* in, cplx* out) {
        const int N = maps.grid.N;
        const double inv = 1.0 / static_cast<double>(n);
        std::copy(in, in + 2 * n, psi_hat.data());
        psi_hat.forward();
        parallel_chunks(static_cast<size_t>(N), threads, [&](size_t r0, size_t r1) {
            for (size_t iy = r0; iy < r1; ++iy)
                for (int ix = 0; ix < N; ++ix) {
                    const size_t k = iy * N + ix;
                    for (int c = 0; c < 2; ++c) {
                        const cplx v = psi_hat.plane(c)[k] * inv;
                        grad.plane(c)[k] = I * kx[ix] * v;
                        grad.plane(2 + c)[k] = I * ky[iy] * v;
                    }
                }
        });
        grad.inverse();
        std::fill(chi.data(), chi.data() + 4 * n, cplx(0.0));
        const auto& valid = maps.valid;
        parallel_chunks(valid.size(), threads, [&](size_t b, size_t e) {
            for (size_t v = b; v < e; ++v) {
                const size_t k = valid[v];
                const Eigen::Vector2cd p(in[k], in[n + k]);
                const Eigen::Vector2cd cx = maps.Ax[v] * p, cy = maps.Ay[v] * p;
                chi.plane(0)[k] = cx(0);
                chi.plane(1)[k] = cx(1);
                chi.plane(2)[k] = cy(0);
                chi.plane(3)[k] = cy(1);
            }
        });
        chi.forward();
        const double s = inv / (2.0 * mass);
        parallel_chunks(static_cast<size_t>(N), threads, [&](size_t r0, size_t r1) {
            for (size_t iy = r0; iy < r1; ++iy)
                for (int ix = 0; ix < N; ++ix) {
                    const size_t k = iy * N + ix;
                    const double k2 = kx[ix] * kx[ix] + ky[iy] * ky[iy];
                    for (int c = 0; c < 2; ++c)
                        out_hat.plane(c)[k] =
                            s * (k2 * psi_hat.plane(c)[k] - kx[ix] * chi.plane(c)[k] - ky[iy] * chi.plane(2 + c)[k]);
                }
        });
        out_hat.inverse();
        std::fill(out, out + 2 * n, cplx(0.0));
        const cplx pre = I / (2.0 * mass);
        parallel_chunks(valid.size(), threads, [&](size_t b, size_t e) {
            for (size_t v = b; v < e; ++v) {
                const size_t k = valid[v];
                const Eigen::Vector2cd p(in[k], in[n + k]);
                const Eigen::Vector2cd gx(grad.plane(0)[k], grad.plane(1)[k]);
                const Eigen::Vector2cd gy(grad.plane(2)[k], grad.plane(3)[k]);
                const Eigen::Vector2cd r = pre * (maps.Ax[v] * gx + maps.Ay[v] * gy) + W[v] * p;
                out[k] = out_hat.plane(0)[k] + r(0);
                out[n + k] = out_hat.plane(1)[k] + r(1);
            }
        });
    }
};

SpinorHamiltonian::SpinorHamiltonian(const FieldMaps& maps, double mass, int threads) {
    if (!(mass > 0.0)) throw ConfigError("mass parameter must be positive");
    impl_ = std::make_unique<Impl>(maps, mass, threads);
    double ax = 0.0, ay = 0.0, w_hi = -std::numeric_limits<double>::infinity();
    double v_lo = std::numeric_limits<double>::infinity(), a2 = 0.0;
    for (size_t k = 0; k < maps.valid.size(); ++k) {
        ax = std::max(ax, frobenius(maps.Ax[k]));
        ay = std::max(ay, frobenius(maps.Ay[k]));
        a2 = std::max(a2, frobenius(maps.Ax[k] * maps.Ax[k] + maps.Ay[k] * maps.Ay[k]));
        v_lo = std::min(v_lo, maps.V[k].minCoeff());
        w_hi = std::max(w_hi, maps.V[k].maxCoeff());
    }
    const double kmax = M_PI / maps.grid.dx();
    const double kinetic = (2.0 * kmax * kmax + 2.0 * kmax * (ax + ay) + a2) / (2.0 * mass);
    bounds_.lower = v_lo;
    bounds_.upper = w_hi + kinetic;
}

SpinorHamiltonian::~SpinorHamiltonian() = default;

void SpinorHamiltonian::apply(const cplx* in, cplx* out) { impl_->apply(in, out); }

double SpinorHamiltonian::energy(const SpinorField2D& field) {
    std::vector<cplx> h(field.psi.size());
    apply(field.psi.data(), h.data());
    cplx e = 0.0;
    double norm = 0.0;
    for (size_t k = 0; k < h.size(); ++k) {
        e += std::conj(field.psi[k]) * h[k];
        norm += std::norm(field.psi[k]);
    }
    return e.real() / norm;
}

double boundary_fraction(const SpinorField2D& field, const FieldMaps& maps, double width) {
    const Grid2D& g = field.grid;
    const size_t n = g.size();
    double edge = 0.0, total = 0.0;
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const double w = std::norm(field.psi[k]) + std::norm(field.psi[n + k]);
        total += w;
        const int ix = static_cast<int>(k % g.N), iy = static_cast<int>(k / g.N);
        const double r = std::hypot(g.coord(ix), g.coord(iy));
        const bool near_outer = std::isfinite(maps.options.r_outer) && r > maps.options.r_outer - width;
        const bool near_inner = maps.options.r_inner > 0.0 && r < maps.options.r_inner + width;
        if (near_outer || near_inner) edge += w;
    }
    return total > 0.0 ? edge / total : 0.0;
}

PropagationStats propagate(SpinorField2D& field, const FieldMaps& maps, double mass, double dt, int n_steps,
                           int threads, const std::function<void(const SpinorField2D&)>& on_step,
                           bool check_contracts) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (n_steps < 0) throw ConfigError("step count must be non-negative");
    if (field.grid.N != maps.grid.N || field.grid.L != maps.grid.L) throw ConfigError("field and maps grids differ");
    const size_t n = field.grid.size();
    for (size_t k = 0; k < n; ++k)
        if (!maps.mask[k]) field.psi[k] = field.psi[n + k] = 0.0;

    SpinorHamiltonian H(maps, mass, threads);
    const SpectralBounds b = H.bounds();
    const double c = 0.5 * (b.upper + b.lower);
    const double r = 0.5 * (b.upper - b.lower) * 1.01 + 1e-12;
    const double x = r * dt;
    std::vector<cplx> coef;
    for (int k = 0;; ++k) {
        const double j = std::cyl_bessel_j(static_cast<double>(k), x);
        coef.push_back((k == 0 ? 1.0 : 2.0) * std::pow(-I, k) * j);
        if (k > x && std::abs(j) < 1e-16) break;
        if (k > 100000) throw NumericalError("Chebyshev expansion did not converge");
    }
    const cplx phase = std::exp(-I * c * dt);

    PropagationStats st;
    st.chebyshev_terms = static_cast<int>(coef.size());
    const double norm0 = populations(field).norm;
    st.energy_initial = H.energy(field);
    const size_t m = 2 * n;
    std::vector<cplx> t0(m), t1(m), t2(m), acc(m);
    auto apply_scaled = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        H.apply(in.data(), out.data());
        for (size_t k = 0; k < m; ++k) out[k] = (out[k] - c * in[k]) / r;
    };
    const double width = 4.0 * maps.grid.dx();
    for (int s = 0; s < n_steps; ++s) {
        t0 = field.psi;
        apply_scaled(t0, t1);
        for (size_t k = 0; k < m; ++k) acc[k] = coef[0] * t0[k] + coef[1] * t1[k];
        for (size_t j = 2; j < coef.size(); ++j) {
            apply_scaled(t1, t2);
            for (size_t k = 0; k < m; ++k) {
                t2[k] = 2.0 * t2[k] - t0[k];
                acc[k] += coef[j] * t2[k];
            }
            std::swap(t0, t1);
            std::swap(t1, t2);
        }
        for (size_t k = 0; k < m; ++k) field.psi[k] = phase * acc[k];
        field.t += dt;
        ++st.steps;
        const double nrm = populations(field).norm;
        st.norm_drift = std::max(st.norm_drift, std::abs(nrm - norm0));
        st.boundary_fraction = std::max(st.boundary_fraction, boundary_fraction(field, maps, width));
        if (check_contracts) {
            if (st.norm_drift > 1e-6)
                throw NumericalError("norm drift " + std::to_string(st.norm_drift) + " exceeds 1e-6 at t = " +
                                     std::to_string(field.t));
            if (st.boundary_fraction > 1e-4)
                throw NumericalError("boundary weight " + std::to_string(st.boundary_fraction) +
                                     " exceeds 1e-4; enlarge the box");
        }
        if (on_step) on_step(field);
    }
    st.energy_final = H.energy(field);
    return st;
}

void gauge_transform(FieldMaps& maps, SpinorField2D& field, const Eigen::Vector2d& g1, const Eigen::Vector2d& g2) {
    const Grid2D& g = maps.grid;
    const size_t n = g.size();
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const double x = g.coord(static_cast<int>(k % g.N)), y = g.coord(static_cast<int>(k / g.N));
        const double th1 = g1(0) * x + g1(1) * y, th2 = g2(0) * x + g2(1) * y;
        const cplx e12 = std::polar(1.0, th2 - th1);
        for (auto* A : {&maps.Ax[v], &maps.Ay[v]}) {
            (*A)(0, 1) *= e12;
            (*A)(1, 0) *= std::conj(e12);
        }
        maps.Ax[v](0, 0) -= g1(0);
        maps.Ax[v](1, 1) -= g2(0);
        maps.Ay[v](0, 0) -= g1(1);
        maps.Ay[v](1, 1) -= g2(1);
        field.psi[k] *= std::polar(1.0, -th1);
        field.psi[n + k] *= std::polar(1.0, -th2);
    }
    maps.radial.clear();
    maps.shell.clear();
}

FullField2D embed_spinor(const SpinorField2D& field, const FieldMaps& maps) {
    if (maps.radial.empty()) throw ConfigError("embedding needs maps built from the pair Hamiltonian");
    FullField2D full;
    full.grid = field.grid;
    full.t = field.t;
    const size_t n = field.grid.size();
    full.psi.assign(16 * n, 0.0);
    const auto& jz = adapted_jz();
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const RadialFrame& f = maps.radial[maps.shell[v]];
        const double phi = point_phi(field.grid, k);
        const Eigen::Vector2cd a(field.psi[k], field.psi[n + k]);
        for (int j = 0; j < 4; ++j) {
            const int comp = 4 * kPairBlock + j;
            const cplx u = std::polar(1.0, -phi * jz[comp]);
            full.psi[comp * n + k] = u * (f.V(j, 0) * a(0) + f.V(j, 1) * a(1));
        }
    }
    return full;
}

Projection project(const FullField2D& full, const FieldMaps& maps) {
    if (maps.radial.empty()) throw ConfigError("projection needs maps built from the pair Hamiltonian");
    Projection p;
    const size_t n = full.grid.size();
    const auto& jz = adapted_jz();
    for (size_t k = 0; k < 16 * n; ++k) p.norm += std::norm(full.psi[k]);
    for (size_t v = 0; v < maps.valid.size(); ++v) {
        const size_t k = maps.valid[v];
        const RadialFrame& f = maps.radial[maps.shell[v]];
        const double phi = point_phi(full.grid, k);
        cplx a1 = 0.0, a2 = 0.0;
        for (int j = 0; j < 4; ++j) {
            const int comp = 4 * kPairBlock + j;
            const cplx c = std::polar(1.0, phi * jz[comp]) * full.psi[comp * n + k];
            a1 += f.V(j, 0) * c;
            a2 += f.V(j, 1) * c;
        }
        p.P1 += std::norm(a1);
        p.P2 += std::norm(a2);
    }
    const double w = full.grid.dx() * full.grid.dx();
    p.norm *= w;
    p.P1 *= w;
    p.P2 *= w;
    p.leakage = p.norm - p.P1 - p.P2;
    return p;
}

OracleStats oracle_propagate(FullField2D& full, const FieldMaps& maps, double mass, double dt, int n_steps,
                             int threads, const std::function<void(const FullField2D&)>& on_step,
                             int callback_every) {
    if (maps.radial.empty()) throw ConfigError("oracle needs maps built from the pair Hamiltonian");
    if (!(dt > 0.0) || !(mass > 0.0)) throw ConfigError("oracle dt and mass must be positive");
    if (callback_every < 1) throw ConfigError("callback interval must be >= 1");
    const Grid2D& g = full.grid;
    const size_t n = g.size();
    const int N = g.N;
    OracleStats st;

    // Per-radius exponentials of the full 16 x 16 interaction, block by block.
    const auto& B = adapted_basis();
    const size_t ns = maps.radial.size();
    std::vector<std::array<Eigen::Matrix4cd, 4>> half(ns), whole(ns);
    for (size_t s = 0; s < ns; ++s) {
        const RMat16 Hb = B.transpose() * meridian_hamiltonian(maps.radial[s].rho, 0.0, maps.scheme) * B;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) st.max_block_coupling = std::max(st.max_block_coupling, Hb.block<4, 4>(4 * i, 4 * j).cwiseAbs().maxCoeff());
        for (int b = 0; b < 4; ++b) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(Hb.block<4, 4>(4 * b, 4 * b));
            const Eigen::Matrix4cd V = es.eigenvectors().cast<cplx>();
            Eigen::Vector4cd eh, ew;
            for (int k = 0; k < 4; ++k) {
                eh(k) = std::polar(1.0, -0.5 * dt * es.eigenvalues()(k));
                ew(k) = std::polar(1.0, -dt * es.eigenvalues()(k));
            }
            half[s][b] = V * eh.asDiagonal() * V.transpose();
            whole[s][b] = V * ew.asDiagonal() * V.transpose();
        }
    }
    if (st.max_block_coupling > 1e-12) throw NumericalError("interaction is not block diagonal in the plane");

    const auto& jz = adapted_jz();
    const size_t nv = maps.valid.size();
    std::vector<std::array<cplx, 5>> phases(nv);  // exp(-i phi m) for m = -2..2
    for (size_t v = 0; v < nv; ++v) {
        const double phi = point_phi(g, maps.valid[v]);
        for (int m = -2; m <= 2; ++m) phases[v][m + 2] = std::polar(1.0, -phi * m);
    }
    for (int j : jz)
        if (j < -2 || j > 2) throw std::logic_error("unexpected J_z value");

    FftPlanes buf(N, 16);
    std::copy(full.psi.begin(), full.psi.end(), buf.data());
    for (size_t k = 0; k < n; ++k)
        if (!maps.mask[k])
            for (int c = 0; c < 16; ++c) buf.plane(c)[k] = 0.0;

    auto potential = [&](const std::vector<std::array<Eigen::Matrix4cd, 4>>& table) {
        parallel_chunks(nv, threads, [&](size_t b0, size_t b1) {
            for (size_t v = b0; v < b1; ++v) {
                const size_t k = maps.valid[v];
                const auto& E = table[maps.shell[v]];
                for (int b = 0; b < 4; ++b) {
                    Eigen::Vector4cd c;
                    for (int j = 0; j < 4; ++j) c(j) = std::conj(phases[v][jz[4 * b + j] + 2]) * buf.plane(4 * b + j)[k];
                    const Eigen::Vector4cd r = E[b] * c;
                    for (int j = 0; j < 4; ++j) buf.plane(4 * b + j)[k] = phases[v][jz[4 * b + j] + 2] * r(j);
                }
            }
        });
    };
    const std::vector<double> kv = wavenumbers(g);
    std::vector<cplx> kin(n);
    for (int iy = 0; iy < N; ++iy)
        for (int ix = 0; ix < N; ++ix)
            kin[static_cast<size_t>(iy) * N + ix] =
                std::polar(1.0 / static_cast<double>(n), -dt * (kv[ix] * kv[ix] + kv[iy] * kv[iy]) / (2.0 * mass));
    auto kinetic = [&] {
        buf.forward();
        for (int c = 0; c < 16; ++c) {
            cplx* p = buf.plane(c);
            for (size_t k = 0; k < n; ++k) p[k] *= kin[k];
        }
        buf.inverse();
        for (size_t k = 0; k < n; ++k)
            if (!maps.mask[k])
                for (int c = 0; c < 16; ++c) buf.plane(c)[k] = 0.0;
    };
    auto norm_now = [&] {
        double s = 0.0;
        for (size_t k = 0; k < 16 * n; ++k) s += std::norm(buf.data()[k]);
        return s * g.dx() * g.dx();
    };
    const double norm0 = norm_now();

    const double t0 = full.t;
    bool open_half = false;  // a trailing half step is still owed
    for (int s = 1; s <= n_steps; ++s) {
        potential(open_half ? whole : half);
        kinetic();
        open_half = true;
        const bool report = on_step && (s % callback_every == 0 || s == n_steps);
        if (report || s == n_steps) {
            potential(half);
            open_half = false;
            std::copy(buf.data(), buf.data() + 16 * n, full.psi.begin());
            full.t = t0 + s * dt;
            st.norm_drift = std::max(st.norm_drift, std::abs(norm_now() - norm0));
        }
        st.steps = s;
        if (report) on_step(full);
    }
    if (st.norm_drift > 1e-6)
        throw NumericalError("oracle norm drift " + std::to_string(st.norm_drift) + " exceeds 1e-6");
    return st;
}

DensitySnapshot density_snapshot(const SpinorField2D& field) {
    DensitySnapshot s;
    s.grid = field.grid;
    s.t = field.t;
    const size_t n = field.grid.size();
    s.rho1.resize(n);
    s.rho2.resize(n);
    for (size_t k = 0; k < n; ++k) {
        s.rho1[k] = std::norm(field.psi[k]);
        s.rho2[k] = std::norm(field.psi[n + k]);
    }
    return s;
}

void write_snapshot_csv(const DensitySnapshot& snap, const std::string& path, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << header;
    out << "# t = " << snap.t << "\n";
    out << "x,y,rho1,rho2\n";
    out.precision(17);
    const Grid2D& g = snap.grid;
    for (int iy = 0; iy < g.N; ++iy)
        for (int ix = 0; ix < g.N; ++ix) {
            const size_t k = g.index(ix, iy);
            out << g.coord(ix) << ',' << g.coord(iy) << ',' << snap.rho1[k] << ',' << snap.rho2[k] << '\n';
        }
}

void write_snapshot_binary(const DensitySnapshot& snap, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const std::int32_t N = snap.grid.N, bands = 2;
    out.write(reinterpret_cast<const char*>(&N), sizeof N);
    out.write(reinterpret_cast<const char*>(&snap.grid.L), sizeof(double));
    out.write(reinterpret_cast<const char*>(&snap.t), sizeof(double));
    out.write(reinterpret_cast<const char*>(&bands), sizeof bands);
    out.write(reinterpret_cast<const char*>(snap.rho1.data()), static_cast<std::streamsize>(snap.rho1.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(snap.rho2.data()), static_cast<std::streamsize>(snap.rho2.size() * sizeof(double)));
}

double beamsplitter_mass(const BeamsplitterConfig& cfg) {
    return cfg.mass > 0.0 ? cfg.mass : mass_parameter(cfg.species);
}

double beamsplitter_fwhm(const BeamsplitterConfig& cfg) {
    if (!(cfg.fwhm_m > 0.0) || !(cfg.species.R0_m > 0.0)) throw ConfigError("packet width and R0 must be positive");
    const double w = cfg.fwhm_m / cfg.species.R0_m;
    return cfg.fwhm_is_sigma ? w * 2.0 * std::sqrt(2.0 * std::log(2.0)) : w;
}

BeamsplitterResult run_beamsplitter(const BeamsplitterConfig& cfg) {
    if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");
    set_fft_planning(cfg.measure_fft);
    BeamsplitterResult res;
    res.config = cfg;
    res.mass = beamsplitter_mass(cfg);
    res.fwhm = beamsplitter_fwhm(cfg);
    if (cfg.grid.dx() >= res.fwhm / 6.0) throw ConfigError("grid spacing must be below FWHM / 6");
    const int n_steps = static_cast<int>(std::lround(cfg.t_end / cfg.dt));
    if (std::abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end) throw ConfigError("t_end must be a multiple of dt");

    const FieldMaps maps = build_field_maps(cfg.grid, cfg.scheme, cfg.maps);
    res.map_min_gap = maps.min_gap;
    res.map_min_gap_rho = maps.min_gap_rho;
    SpinorField2D field = gaussian_packet(cfg.grid, cfg.center_x, cfg.center_y, res.fwhm, 1, &maps);
    res.initial = density_snapshot(field);
    auto push = [](PopulationTrace& tr, double t, double p1, double p2, double nrm) {
        tr.t.push_back(t);
        tr.P1.push_back(p1);
        tr.P2.push_back(p2);
        tr.norm.push_back(nrm);
    };
    const Populations p0 = populations(field);
    push(res.trace, 0.0, p0.P1, p0.P2, p0.norm);
    int step = 0;
    res.stats = propagate(field, maps, res.mass, cfg.dt, n_steps, cfg.threads, [&](const SpinorField2D& f) {
        ++step;
        if (step % cfg.record_every == 0 || step == n_steps) {
            const Populations p = populations(f);
            push(res.trace, f.t, p.P1, p.P2, p.norm);
        }
    });
    res.final = populations(field);
    res.final_snapshot = density_snapshot(field);

    if (cfg.oracle) {
        res.has_oracle = true;
        const Grid2D og{cfg.grid.L, cfg.oracle_N};
        const FieldMaps omaps = og.N == cfg.grid.N ? maps : build_field_maps(og, cfg.scheme, cfg.maps);
        const SpinorField2D seed = gaussian_packet(og, cfg.center_x, cfg.center_y, res.fwhm, 1, &omaps);
        FullField2D full = embed_spinor(seed, omaps);
        const int on = static_cast<int>(std::lround(cfg.t_end / cfg.oracle_dt));
        if (std::abs(on * cfg.oracle_dt - cfg.t_end) > 1e-9 * cfg.t_end)
            throw ConfigError("t_end must be a multiple of the oracle dt");
        const int every = std::max(1, static_cast<int>(std::lround(cfg.record_every * cfg.dt / cfg.oracle_dt)));
        const Projection q0 = project(full, omaps);
        push(res.oracle_trace, 0.0, q0.P1, q0.P2, q0.norm);
        res.max_leakage = std::abs(q0.leakage);
        res.oracle_stats = oracle_propagate(full, omaps, res.mass, cfg.oracle_dt, on, cfg.threads,
                                            [&](const FullField2D& f) {
                                                const Projection q = project(f, omaps);
                                                push(res.oracle_trace, f.t, q.P1, q.P2, q.norm);
                                                res.max_leakage = std::max(res.max_leakage, std::abs(q.leakage));
                                            },
                                            every);
        res.oracle_final = project(full, omaps);
        res.max_leakage = std::max(res.max_leakage, std::abs(res.oracle_final.leakage));
    }
    return res;
}

}  // namespace rydgauge
