// Asynchronous two-user MAC front end: pulse correlations, matched-filter
// signal and colored-noise generation, spectral factorization of the noise
// spectrum, whitening, and the equivalent vector-ISI channel.
//
// Conventions. tau_a = 0, tau_b = epsilon; all asynchrony is the difference
// delta = iota + epsilon. Noise levels are per real dimension: a complex
// sample with "variance sigma2" has E|w|^2 = 2*sigma2. Lambda(l) follows the
// paper's printed orientation, i.e. cov(w(k), w(k+l)) / sigma2; internally
// everything derives from R(l) = Lambda(-l), the lag-l correlation matrix
// multiplying c(k-l) in the matched-filter signal model.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "gf4.hpp"

namespace pnc {

using cplx = std::complex<double>;
using Cvec2 = std::array<cplx, 2>;
using Mat2c = std::array<std::array<cplx, 2>, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kCorrThreshold = 1e-6;  // lags below this are dropped
inline constexpr int kQuadOversampling = 32;    // samples per symbol period

// ---------------------------------------------------------------------------
// Pulse shapes

struct PulseShape {
    enum class Kind { Rectangular, Srrc };
    Kind kind = Kind::Rectangular;
    double beta = 1.0;       // SRRC roll-off
    double span = 40.0;      // SRRC quadrature half-width around the center
    double amplitude = 1.0;  // 1.0 for a unit-energy pulse

    static PulseShape rectangular() { return PulseShape{Kind::Rectangular, 0.0, 1.0, 1.0}; }
    static PulseShape srrc(double beta_, double span_ = 40.0) {
        return PulseShape{Kind::Srrc, beta_, span_, 1.0};
    }

    double value(double t) const {
        if (kind == Kind::Rectangular) return (t >= 0.0 && t < 1.0) ? amplitude : 0.0;
        const double b = beta;
        const double at = std::abs(t);
        double v;
        if (at < 1e-10) {
            v = 1.0 - b + 4.0 * b / kPi;
        } else if (b > 0.0 && std::abs(at - 1.0 / (4.0 * b)) < 1e-10) {
            v = (b / std::sqrt(2.0)) * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) +
                                        (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
        } else {
            const double num = std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b));
            const double den = kPi * t * (1.0 - 16.0 * b * b * t * t);
            v = num / den;
        }
        return amplitude * v;
    }

    // Center of mass of the pulse support, used to place quadrature windows.
    double center() const { return kind == Kind::Rectangular ? 0.5 : 0.0; }
    double half_width() const { return kind == Kind::Rectangular ? 0.5 : span; }
};

// Trapezoidal quadrature of g_a(t) * g_b(t + tau) over the union of the two
// pulse supports. The SRRC product is bandlimited well under the sampling
// rate, so the rule is exact to roundoff for smooth pulses.
inline double correlate_pulses_quad(const PulseShape& ga, const PulseShape& gb, double tau,
                                    int oversampling = kQuadOversampling) {
    const double ca = ga.center();
    const double cb = gb.center() - tau;  // center of g_b(t + tau) in t
    const double lo = std::min(ca - ga.half_width(), cb - gb.half_width());
    const double hi = std::max(ca + ga.half_width(), cb + gb.half_width());
    const double h = 1.0 / oversampling;
    const int steps = static_cast<int>(std::ceil((hi - lo) / h));
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double t = lo + i * h;
        const double f = ga.value(t) * gb.value(t + tau);
        acc += (i == 0 || i == steps) ? 0.5 * f : f;
    }
    return acc * h;
}

inline double correlate_pulses(const PulseShape& ga, const PulseShape& gb, double tau,
                               int oversampling = kQuadOversampling) {
    if (ga.kind == PulseShape::Kind::Rectangular && gb.kind == PulseShape::Kind::Rectangular) {
        // Overlap of [0,1) with [-tau, 1-tau): exact triangular correlation.
        return ga.amplitude * gb.amplitude * std::max(0.0, 1.0 - std::abs(tau));
    }
    return correlate_pulses_quad(ga, gb, tau, oversampling);
}

inline double pulse_energy(const PulseShape& g, int oversampling = kQuadOversampling) {
    if (g.kind == PulseShape::Kind::Rectangular) return g.amplitude * g.amplitude;
    return correlate_pulses_quad(g, g, 0.0, oversampling);
}

// ---------------------------------------------------------------------------
// Correlations and the noise covariance

struct CorrelationSet {
    std::map<int, double> rho_ab;  // lag -> int g_a*(t) g_b(t + l + tau_a - tau_b) dt
    std::map<int, double> rho_ba;
    std::map<int, double> rho_aa;  // pulse autocorrelations at integer lags
    std::map<int, double> rho_bb;
    int memory_length = 0;  // L: largest retained |lag|

    double ab(int l) const {
        auto it = rho_ab.find(l);
        return it == rho_ab.end() ? 0.0 : it->second;
    }
    double ba(int l) const {
        auto it = rho_ba.find(l);
        return it == rho_ba.end() ? 0.0 : it->second;
    }
    double aa(int l) const {
        auto it = rho_aa.find(l);
        return it == rho_aa.end() ? 0.0 : it->second;
    }
    double bb(int l) const {
        auto it = rho_bb.find(l);
        return it == rho_bb.end() ? 0.0 : it->second;
    }
};

inline CorrelationSet compute_correlations(const PulseShape& ga, const PulseShape& gb, double epsilon,
                                           int oversampling = kQuadOversampling,
                                           double threshold = kCorrThreshold) {
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("compute_correlations: epsilon must be in [0,1)");
    for (const auto* g : {&ga, &gb})
        if (std::abs(pulse_energy(*g, oversampling) - 1.0) > 1e-6)
            throw std::invalid_argument("compute_correlations: pulse is not unit energy");

    CorrelationSet c;
    const int lmax = static_cast<int>(std::ceil(ga.half_width() + gb.half_width())) + 2;
    for (int l = -lmax; l <= lmax; ++l) {
        // tau_a - tau_b = -epsilon
        const double v_ab = correlate_pulses(ga, gb, l - epsilon, oversampling);
        const double v_ba = correlate_pulses(gb, ga, l + epsilon, oversampling);
        const double v_aa = correlate_pulses(ga, ga, l, oversampling);
        const double v_bb = correlate_pulses(gb, gb, l, oversampling);
        if (std::abs(v_ab) >= threshold) c.rho_ab[l] = v_ab;
        if (std::abs(v_ba) >= threshold) c.rho_ba[l] = v_ba;
        if (std::abs(v_aa) >= threshold) c.rho_aa[l] = v_aa;
        if (std::abs(v_bb) >= threshold) c.rho_bb[l] = v_bb;
    }
    int L = 0;
    for (const auto* m : {&c.rho_ab, &c.rho_ba, &c.rho_aa, &c.rho_bb})
        for (const auto& [l, v] : *m) L = std::max(L, std::abs(l));
    c.memory_length = L;
    return c;
}

struct NoiseCovariance {
    int L = 0;
    std::vector<Eigen::Matrix2d> R;  // R[l], l = 0..L; R(-l) = R(l)^T

    // Paper-print orientation: Lambda(l) = cov(w(k), w(k+l)) / sigma2 = R(-l).
    Eigen::Matrix2d lambda(int l) const {
        const int a = std::abs(l);
        if (a > L) return Eigen::Matrix2d::Zero();
        return l >= 0 ? Eigen::Matrix2d(R[a].transpose()) : R[a];
    }
    Eigen::Matrix2d corr(int l) const {  // R(l) for signed l
        const int a = std::abs(l);
        if (a > L) return Eigen::Matrix2d::Zero();
        return l >= 0 ? R[a] : Eigen::Matrix2d(R[a].transpose());
    }
};

inline NoiseCovariance noise_covariance(const CorrelationSet& c) {
    NoiseCovariance nc;
    nc.L = c.memory_length;
    nc.R.resize(nc.L + 1);
    for (int l = 0; l <= nc.L; ++l) {
        Eigen::Matrix2d m;
        m << c.aa(l), c.ab(l), c.ba(l), c.bb(l);
        nc.R[l] = m;
    }
    // Quadrature wiggle and the dropped sub-threshold lags can leave the
    // spectrum indefinite at DC by ~1e-7 (these MAC spectra touch zero
    // there). Floor the spectrum so an exact factor exists; the lift is far
    // inside the correlation threshold.
    double wmin = 0.0;
    for (int j = 0; j < 512; ++j) {
        const double w = 2.0 * kPi * j / 512;
        Eigen::Matrix2cd om = nc.R[0].cast<cplx>();
        for (int l = 1; l <= nc.L; ++l) {
            const cplx e = std::polar(1.0, -w * l);
            om += nc.R[l].cast<cplx>() * e + nc.R[l].transpose().cast<cplx>() * std::conj(e);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(om);
        wmin = std::min(wmin, es.eigenvalues().minCoeff());
    }
    if (wmin < 1e-9) nc.R[0] += (1e-9 - wmin) * Eigen::Matrix2d::Identity();
    return nc;
}

// ---------------------------------------------------------------------------
// Spectral factorization: Omega(z) = F~(z) F(z), F(z) = sum_l F_l z^{-l},
// F_0 lower-triangular with positive diagonal.

inline Eigen::Matrix2cd omega_at(const NoiseCovariance& cov, double w) {
    Eigen::Matrix2cd m = cov.R[0].cast<cplx>();
    for (int l = 1; l <= cov.L; ++l) {
        const cplx e = std::polar(1.0, -w * l);
        m += cov.R[l].cast<cplx>() * e + cov.R[l].transpose().cast<cplx>() * std::conj(e);
    }
    return m;
}

inline double factorization_residual(const NoiseCovariance& cov, const std::vector<Eigen::Matrix2d>& F,
                                     int grid = 256) {
    double worst = 0.0;
    for (int j = 0; j < grid; ++j) {
        const double w = 2.0 * kPi * j / grid;
        Eigen::Matrix2cd Fw = Eigen::Matrix2cd::Zero();
        for (int l = 0; l < (int)F.size(); ++l) Fw += F[l].cast<cplx>() * std::polar(1.0, -w * l);
        worst = std::max(worst, (omega_at(cov, w) - Fw.adjoint() * Fw).norm());
    }
    return worst;
}

namespace detail {

// Bauer initialization: Cholesky of the m-block banded block-Toeplitz matrix
// with blocks T(i,j) = R(j-i); the converged last band row, transposed, is
// the causal factor.
inline std::vector<Eigen::Matrix2d> bauer_factor(const NoiseCovariance& cov, int m) {
    const int L = cov.L;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
        for (int j = std::max(0, i - L); j <= std::min(m - 1, i + L); ++j)
            T.block<2, 2>(2 * i, 2 * j) = cov.corr(j - i);
    Eigen::LLT<Eigen::MatrixXd> llt;
    double reg = 0.0;
    for (int tries = 0; tries < 4; ++tries) {
        llt.compute(T + reg * Eigen::MatrixXd::Identity(2 * m, 2 * m));
        if (llt.info() == Eigen::Success) break;
        reg = reg == 0.0 ? 1e-12 : reg * 1e3;
    }
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("spectral_factorize: covariance assembly is not positive definite");
    Eigen::MatrixXd Lm = llt.matrixL();
    const int k = m - 1 - L;
    std::vector<Eigen::Matrix2d> F(L + 1);
    for (int l = 0; l <= L; ++l) F[l] = Lm.block<2, 2>(2 * (k + l), 2 * k).transpose();
    return F;
}

// One Wilson refinement pass on an offset frequency grid (the spectra here
// are singular at w = 0, which the offset grid avoids). Returns the updated
// coefficients S*F truncated to degree L.
inline void wilson_refine(const NoiseCovariance& cov, std::vector<Eigen::Matrix2d>& F, int grid) {
    const int L = cov.L;
    std::vector<Eigen::Matrix2d> D(L + 1, Eigen::Matrix2d::Zero());
    for (int j = 0; j < grid; ++j) {
        const double w = 2.0 * kPi * (j + 0.5) / grid;
        Eigen::Matrix2cd Fw = Eigen::Matrix2cd::Zero();
        for (int l = 0; l <= L; ++l) Fw += F[l].cast<cplx>() * std::polar(1.0, -w * l);
        const Eigen::Matrix2cd Fi = Fw.inverse();
        const Eigen::Matrix2cd X = Fi.adjoint() * omega_at(cov, w) * Fi - Eigen::Matrix2cd::Identity();
        for (int d = 0; d <= L; ++d) {
            const cplx e = std::polar(1.0, w * d);
            D[d] += (X * e).real();
        }
    }
    for (auto& d : D) d /= grid;
    // S(z) = I + lower-half(D_0) + sum_{d>=1} D_d z^{-d};  S~S ~= I + Delta.
    Eigen::Matrix2d lam = Eigen::Matrix2d::Zero();
    lam(0, 0) = D[0](0, 0) / 2;
    lam(1, 1) = D[0](1, 1) / 2;
    lam(1, 0) = D[0](1, 0);
    std::vector<Eigen::Matrix2d> S(L + 1);
    S[0] = Eigen::Matrix2d::Identity() + lam;
    for (int d = 1; d <= L; ++d) S[d] = D[d];
    std::vector<Eigen::Matrix2d> Fn(L + 1, Eigen::Matrix2d::Zero());
    for (int l = 0; l <= L; ++l)
        for (int d = 0; d <= l; ++d) Fn[l] += S[d] * F[l - d];
    F = std::move(Fn);
}

// Left-orthogonal rotation making F_0 lower-triangular with positive
// diagonal; a left factor leaves F~F unchanged.
inline void canonicalize(std::vector<Eigen::Matrix2d>& F) {
    Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
    const double a = F[0](0, 1), b = F[0](1, 1);
    const double n = std::hypot(a, b);
    if (n > 0.0 && std::abs(a) > 1e-300) {
        const double c = b / n, s = -a / n;
        Q << c, s, -s, c;
    }
    Eigen::Matrix2d F0 = Q * F[0];
    Eigen::Matrix2d sign = Eigen::Matrix2d::Identity();
    if (F0(0, 0) < 0.0) sign(0, 0) = -1.0;
    if (F0(1, 1) < 0.0) sign(1, 1) = -1.0;
    Q = sign * Q;
    for (auto& f : F) f = Q * f;
    F[0](0, 1) = 0.0;  // exact by construction
}

}  // namespace detail

inline std::vector<Eigen::Matrix2d> spectral_factorize(const NoiseCovariance& cov,
                                                       double residual_limit = 1e-8,
                                                       int max_refine_iters = 300) {
    const int L = cov.L;
    const int m = std::max(64, 4 * (L + 1));
    std::vector<Eigen::Matrix2d> F = detail::bauer_factor(cov, m);
    const int grid = std::max(1024, 32 * (L + 1));
    double best = factorization_residual(cov, F);
    std::vector<Eigen::Matrix2d> best_F = F;
    for (int it = 0; it < max_refine_iters && best > 5e-12; ++it) {
        detail::wilson_refine(cov, F, grid);
        const double r = factorization_residual(cov, F);
        if (r < best) {
            best = r;
            best_F = F;
        }
    }
    if (best >= residual_limit) {
        char msg[96];
        std::snprintf(msg, sizeof(msg), "spectral_factorize: residual %.3e above limit after refinement cap",
                      best);
        throw std::runtime_error(msg);
    }
    detail::canonicalize(best_F);
    return best_F;
}

// ---------------------------------------------------------------------------
// Equivalent vector-ISI channel

// G_l = F_l * diag(h_a, h_b): the 2x2 complex taps multiplying c_ab(k-l).
inline std::vector<Mat2c> build_psi(cplx h_a, cplx h_b, const std::vector<Eigen::Matrix2d>& taps) {
    std::vector<Mat2c> g(taps.size());
    for (std::size_t l = 0; l < taps.size(); ++l) {
        g[l][0][0] = taps[l](0, 0) * h_a;
        g[l][0][1] = taps[l](0, 1) * h_b;
        g[l][1][0] = taps[l](1, 0) * h_a;
        g[l][1][1] = taps[l](1, 1) * h_b;
    }
    return g;
}

// window[l] = (x_a(k-l), x_b(k-l)) as +-1 BPSK amplitudes (0 = silence).
inline Cvec2 psi_apply(const std::vector<Mat2c>& g, const std::vector<std::array<double, 2>>& window) {
    Cvec2 out{cplx(0.0, 0.0), cplx(0.0, 0.0)};
    for (std::size_t l = 0; l < g.size(); ++l) {
        out[0] += g[l][0][0] * window[l][0] + g[l][0][1] * window[l][1];
        out[1] += g[l][1][0] * window[l][0] + g[l][1][1] * window[l][1];
    }
    return out;
}

enum class BoundaryMode { SilentGuard, Continuous };

struct ChannelRealization {
    cplx h_a{1.0, 0.0}, h_b{1.0, 0.0};
    double epsilon = 0.0;
    int iota = 0;
    double sigma2 = 1.0;  // noise variance per real dimension
    PulseShape pulse_a, pulse_b;
    CorrelationSet corr;
    NoiseCovariance cov;
    std::vector<Eigen::Matrix2d> taps;  // F_0..F_L (real)
    std::vector<Mat2c> gtaps;           // F_l * diag(h)
    BoundaryMode boundary = BoundaryMode::SilentGuard;

    int memory() const { return cov.L; }
};

inline ChannelRealization make_channel(const PulseShape& pulse, double epsilon, int iota, cplx h_a,
                                       cplx h_b, double sigma2,
                                       BoundaryMode boundary = BoundaryMode::SilentGuard) {
    ChannelRealization ch;
    ch.h_a = h_a;
    ch.h_b = h_b;
    ch.epsilon = epsilon;
    ch.iota = iota;
    ch.sigma2 = sigma2;
    ch.pulse_a = pulse;
    ch.pulse_b = pulse;
    ch.corr = compute_correlations(pulse, pulse, epsilon);
    ch.cov = noise_covariance(ch.corr);
    ch.taps = spectral_factorize(ch.cov);
    ch.gtaps = build_psi(h_a, h_b, ch.taps);
    ch.boundary = boundary;
    return ch;
}

// Received sequence with optional per-sample erasures (erased samples carry
// no observation; the detector skips their branch-metric term).
struct Observation {
    std::vector<Cvec2> r;
    std::vector<std::uint8_t> erased;

    std::size_t size() const { return r.size(); }
};

inline double bpsk(std::uint8_t bit) { return bit ? -1.0 : 1.0; }

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Symbol lookup with the boundary convention applied: indices outside [0,N)
// are silence, or deterministic adjacent-frame symbols in continuous mode.
struct StreamView {
    const std::vector<std::uint8_t>* bits;
    int offset;  // symbol index k maps to bits[k - offset]
    BoundaryMode boundary;
    std::uint64_t guard_seed;
    int tag;

    double at(int k) const {
        const int idx = k - offset;
        if (idx >= 0 && idx < (int)bits->size()) return bpsk((*bits)[idx]);
        if (boundary == BoundaryMode::SilentGuard) return 0.0;
        const std::uint64_t h =
            splitmix64(guard_seed ^ (static_cast<std::uint64_t>(tag) << 56) ^
                       static_cast<std::uint64_t>(static_cast<std::int64_t>(idx) + (1ll << 40)));
        return (h & 1ull) ? -1.0 : 1.0;
    }
};

}  // namespace detail

// Whitened-domain simulation: r(k) = sum_l G_l [x_a(k-l); x_b(k-l-iota)] + n(k),
// n white complex Gaussian with variance sigma2 per real dimension.
inline Observation simulate_whitened(const std::vector<std::uint8_t>& bits_a,
                                     const std::vector<std::uint8_t>& bits_b,
                                     const ChannelRealization& ch, std::mt19937_64& rng) {
    if (bits_a.size() != bits_b.size())
        throw std::invalid_argument("simulate_whitened: source sequences differ in length");
    const int n = static_cast<int>(bits_a.size());
    const int L = ch.memory();
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::uint64_t guard_seed = rng();
    detail::StreamView sa{&bits_a, 0, ch.boundary, guard_seed, 1};
    detail::StreamView sb{&bits_b, ch.iota, ch.boundary, guard_seed, 2};

    Observation obs;
    obs.r.resize(n);
    obs.erased.assign(n, 0);
    const double sd = std::sqrt(ch.sigma2);
    for (int k = 0; k < n; ++k) {
        Cvec2 acc{cplx(0, 0), cplx(0, 0)};
        for (int l = 0; l <= L; ++l) {
            const double xa = sa.at(k - l);
            const double xb = sb.at(k - l);
            acc[0] += ch.gtaps[l][0][0] * xa + ch.gtaps[l][0][1] * xb;
            acc[1] += ch.gtaps[l][1][0] * xa + ch.gtaps[l][1][1] * xb;
        }
        acc[0] += cplx(sd * gauss(rng), sd * gauss(rng));
        acc[1] += cplx(sd * gauss(rng), sd * gauss(rng));
        obs.r[k] = acc;
    }
    return obs;
}

// Matched-filter-domain simulation: y(k) = sum_{l=-L..L} R(l) diag(h) c(k-l)
// plus colored noise drawn through a banded block-Cholesky of the
// Lambda-assembled covariance.
inline std::vector<Cvec2> simulate_matched_filter_domain(const std::vector<std::uint8_t>& bits_a,
                                                         const std::vector<std::uint8_t>& bits_b,
                                                         const ChannelRealization& ch,
                                                         std::mt19937_64& rng) {
    if (bits_a.size() != bits_b.size())
        throw std::invalid_argument("simulate_matched_filter_domain: length mismatch");
    const int n = static_cast<int>(bits_a.size());
    const int L = ch.memory();
    const std::uint64_t guard_seed = rng();
    detail::StreamView sa{&bits_a, 0, ch.boundary, guard_seed, 1};
    detail::StreamView sb{&bits_b, ch.iota, ch.boundary, guard_seed, 2};

    std::vector<Cvec2> y(n, Cvec2{cplx(0, 0), cplx(0, 0)});
    for (int k = 0; k < n; ++k) {
        for (int l = -L; l <= L; ++l) {
            const Eigen::Matrix2d R = ch.cov.corr(l);
            const double xa = sa.at(k - l);
            const double xb = sb.at(k - l);
            y[k][0] += ch.h_a * (R(0, 0) * xa) + ch.h_b * (R(0, 1) * xb);
            y[k][1] += ch.h_a * (R(1, 0) * xa) + ch.h_b * (R(1, 1) * xb);
        }
    }

    // Banded scalar Cholesky of the 2n x 2n covariance (bandwidth 2L+1).
    const int dim = 2 * n;
    const int bw = 2 * L + 1;
    auto entry = [&](int p, int q) -> double {  // (1/sigma2) * (1/2) E[w_p w_q*]
        const int i = p / 2, j = q / 2;
        if (std::abs(i - j) > L) return 0.0;
        return ch.cov.corr(i - j)(p % 2, q % 2) + (p == q ? 1e-12 : 0.0);
    };
    std::vector<double> band((std::size_t)dim * (bw + 1), 0.0);  // band[i*(bw+1)+d] = L(i, i-d)
    auto Lb = [&](int i, int j) -> double& { return band[(std::size_t)i * (bw + 1) + (i - j)]; };
    for (int i = 0; i < dim; ++i) {
        for (int j = std::max(0, i - bw); j <= i; ++j) {
            double s = entry(i, j);
            for (int k2 = std::max(0, i - bw); k2 < j; ++k2)
                if (i - k2 <= bw && j - k2 <= bw) s -= Lb(i, k2) * Lb(j, k2);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("matched-filter noise: covariance not positive definite");
                Lb(i, j) = std::sqrt(s);
            } else {
                Lb(i, j) = s / Lb(j, j);
            }
        }
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cplx> u(dim);
    for (auto& v : u) v = cplx(gauss(rng), gauss(rng));
    const double sd = std::sqrt(ch.sigma2);
    for (int i = 0; i < dim; ++i) {
        cplx w(0, 0);
        for (int j = std::max(0, i - bw); j <= i; ++j) w += Lb(i, j) * u[j];
        y[i / 2][i % 2] += sd * w;
    }
    return y;
}

// Whitening filter (F~(z))^{-1}: anticausal recursion solving
// y(k) = sum_l F_l^T r(k+l) backwards from the tail (r = 0 beyond it).
inline Observation whiten(const std::vector<Cvec2>& y, const std::vector<Eigen::Matrix2d>& taps) {
    const int n = static_cast<int>(y.size());
    const int L = static_cast<int>(taps.size()) - 1;
    Observation obs;
    obs.r.assign(n, Cvec2{cplx(0, 0), cplx(0, 0)});
    obs.erased.assign(n, 0);
    const double f00 = taps[0](0, 0), f10 = taps[0](1, 0), f11 = taps[0](1, 1);
    for (int k = n - 1; k >= 0; --k) {
        cplx t0 = y[k][0], t1 = y[k][1];
        for (int l = 1; l <= L && k + l < n; ++l) {
            t0 -= taps[l](0, 0) * obs.r[k + l][0] + taps[l](1, 0) * obs.r[k + l][1];
            t1 -= taps[l](0, 1) * obs.r[k + l][0] + taps[l](1, 1) * obs.r[k + l][1];
        }
        // F_0^T is upper triangular.
        const cplx rb = t1 / f11;
        const cplx ra = (t0 - f10 * rb) / f00;
        obs.r[k] = {ra, rb};
    }
    return obs;
}

// Rectangular-pulse sufficient statistics: partial-interval samples with the
// model y_e(k) = h_a x_a(k) + h_b x_b(k-1) + w_e, y_o(k) = h_a x_a(k) +
// h_b x_b(k) + w_o, with independent noises of variance sigma2/eps and
// sigma2/(1-eps) per real dimension.
struct RectangularSamples {
    std::vector<cplx> y_e, y_o;
};

inline RectangularSamples rectangular_samples(const std::vector<std::uint8_t>& bits_a,
                                              const std::vector<std::uint8_t>& bits_b,
                                              const ChannelRealization& ch, std::mt19937_64& rng) {
    if (ch.pulse_a.kind != PulseShape::Kind::Rectangular || ch.pulse_b.kind != PulseShape::Kind::Rectangular)
        throw std::invalid_argument("rectangular_samples: rectangular pulses required");
    if (ch.epsilon <= 0.0 || ch.epsilon >= 1.0)
        throw std::invalid_argument("rectangular_samples: epsilon in (0,1) required (intervals vanish)");
    if (bits_a.size() != bits_b.size()) throw std::invalid_argument("rectangular_samples: length mismatch");
    const int n = static_cast<int>(bits_a.size());
    const std::uint64_t guard_seed = rng();
    detail::StreamView sa{&bits_a, 0, ch.boundary, guard_seed, 1};
    detail::StreamView sb{&bits_b, ch.iota, ch.boundary, guard_seed, 2};
    std::normal_distribution<double> gauss(0.0, 1.0);
    RectangularSamples out;
    out.y_e.resize(n + 1);  // y_e defined through index n (used by the y_b relation)
    out.y_o.resize(n);
    const double se = std::sqrt(ch.sigma2 / ch.epsilon);
    const double so = std::sqrt(ch.sigma2 / (1.0 - ch.epsilon));
    for (int k = 0; k <= n; ++k) {
        out.y_e[k] = ch.h_a * sa.at(k) + ch.h_b * sb.at(k - 1) + cplx(se * gauss(rng), se * gauss(rng));
        if (k < n)
            out.y_o[k] = ch.h_a * sa.at(k) + ch.h_b * sb.at(k) + cplx(so * gauss(rng), so * gauss(rng));
    }
    return out;
}

}  // namespace pnc
