// Trellis construction and the log-domain BCJR detector for the whitened
// vector-ISI MAC channel. The trellis input alphabet is the GF(4) pair
// symbol c_ab(k); the reduced form keeps only source B's past bits when the
// taps make the output independent of c_a(k-1), ..., c_a(k-L).

#pragma once

#include <functional>
#include <vector>

#include "gf4.hpp"
#include "macchannel.hpp"

namespace pnc {

enum class DetectorMode { Exact, MaxLog };

struct Trellis {
    int memory = 0;     // L
    bool reduced = false;
    int n_states = 1;
    std::vector<int> next;                    // [s*4+u] -> next state
    std::vector<std::vector<int>> incoming;   // per state: packed (s_prev*4+u)
};

inline constexpr double kReducedTapTol = 1e-7;
inline constexpr int kMaxTrellisStates = 4096;

inline Trellis build_trellis(const ChannelRealization& ch, bool reduced) {
    Trellis t;
    t.memory = ch.memory();
    t.reduced = reduced;
    const int L = t.memory;
    if (reduced) {
        for (int l = 1; l <= L; ++l) {
            const double amag = std::max(std::abs(ch.gtaps[l][0][0]), std::abs(ch.gtaps[l][1][0]));
            if (amag > kReducedTapTol)
                throw std::invalid_argument(
                    "build_trellis: reduced state requested but lag-" + std::to_string(l) +
                    " taps depend on source A");
        }
        if (L > 12) throw std::invalid_argument("build_trellis: channel memory too large");
        t.n_states = 1 << L;
    } else {
        if (L > 6) throw std::invalid_argument("build_trellis: channel memory too large for full state");
        t.n_states = 1;
        for (int l = 0; l < L; ++l) t.n_states *= 4;
    }
    t.next.resize(t.n_states * 4);
    t.incoming.assign(t.n_states, {});
    for (int s = 0; s < t.n_states; ++s) {
        for (int u = 0; u < 4; ++u) {
            int ns;
            if (L == 0) {
                ns = 0;
            } else if (reduced) {
                ns = ((s << 1) & (t.n_states - 1)) | ((u >> 1) & 1);
            } else {
                ns = ((s << 2) & (t.n_states - 1)) | u;
            }
            t.next[s * 4 + u] = ns;
            t.incoming[ns].push_back(s * 4 + u);
        }
    }
    return t;
}

// Noiseless branch outputs, one 2-vector per (state, input).
inline std::vector<Cvec2> branch_outputs(const ChannelRealization& ch, const Trellis& t) {
    const int L = t.memory;
    std::vector<Cvec2> psi(t.n_states * 4);
    std::vector<std::array<double, 2>> window(L + 1);
    for (int s = 0; s < t.n_states; ++s) {
        for (int u = 0; u < 4; ++u) {
            window[0] = {bpsk(u & 1), bpsk((u >> 1) & 1)};
            for (int l = 1; l <= L; ++l) {
                if (t.reduced) {
                    // A's contribution at past lags is below tolerance.
                    window[l] = {0.0, bpsk((s >> (l - 1)) & 1)};
                } else {
                    const int v = (s >> (2 * (l - 1))) & 3;
                    window[l] = {bpsk(v & 1), bpsk((v >> 1) & 1)};
                }
            }
            psi[s * 4 + u] = psi_apply(ch.gtaps, window);
        }
    }
    return psi;
}

// log gamma up to a per-step constant: log prior + Gaussian observation term.
inline double branch_metric(const Cvec2& r, double prior_logp, const Cvec2& psi_val, double sigma2) {
    const double d0r = r[0].real() - psi_val[0].real(), d0i = r[0].imag() - psi_val[0].imag();
    const double d1r = r[1].real() - psi_val[1].real(), d1i = r[1].imag() - psi_val[1].imag();
    return prior_logp - (d0r * d0r + d0i * d0i + d1r * d1r + d1i * d1i) / (2.0 * sigma2);
}

struct ApSequence {
    std::vector<LlrVec4> priors;      // normalized log-probabilities
    std::vector<LlrVec4> extrinsics;  // zero-anchored (l[0] = 0)
    std::vector<LlrVec4> posteriors;  // normalized log-probabilities
};

namespace detail {

inline double lse4(const double* v, int count, bool maxlog) {
    double m = v[0];
    for (int i = 1; i < count; ++i) m = std::max(m, v[i]);
    if (maxlog || !std::isfinite(m)) return m;
    double s = 0.0;
    for (int i = 0; i < count; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

}  // namespace detail

inline ApSequence bcjr(const Observation& obs, const std::vector<LlrVec4>& priors, const Trellis& t,
                       const std::vector<Cvec2>& psi, double sigma2,
                       DetectorMode mode = DetectorMode::Exact) {
    const int n = static_cast<int>(obs.size());
    if ((int)priors.size() != n) throw std::invalid_argument("bcjr: priors length mismatch");
    const bool maxlog = mode == DetectorMode::MaxLog;
    const int S = t.n_states;

    ApSequence out;
    out.priors.resize(n);
    for (int k = 0; k < n; ++k) {
        double tmp[4];
        for (int i = 0; i < 4; ++i) tmp[i] = priors[k][i];
        const double z = detail::lse4(tmp, 4, false);
        if (!std::isfinite(z)) throw std::invalid_argument("bcjr: degenerate prior at symbol " + std::to_string(k));
        for (int i = 0; i < 4; ++i) out.priors[k][i] = std::max(priors[k][i] - z, kLogFloor);
    }

    // gamma[k][s*4+u]
    std::vector<double> gamma((std::size_t)n * S * 4);
    for (int k = 0; k < n; ++k) {
        double* g = gamma.data() + (std::size_t)k * S * 4;
        const bool erased = obs.erased[k] != 0;
        for (int s = 0; s < S; ++s)
            for (int u = 0; u < 4; ++u)
                g[s * 4 + u] = erased ? out.priors[k][u]
                                      : branch_metric(obs.r[k], out.priors[k][u], psi[s * 4 + u], sigma2);
    }

    // Forward/backward recursions with per-step max normalization; open
    // boundaries (uniform alpha_0 and beta_N).
    std::vector<double> alpha((std::size_t)(n + 1) * S, 0.0);
    std::vector<double> beta((std::size_t)(n + 1) * S, 0.0);
    std::vector<double> acc;
    for (int k = 0; k < n; ++k) {
        const double* a = alpha.data() + (std::size_t)k * S;
        double* an = alpha.data() + (std::size_t)(k + 1) * S;
        const double* g = gamma.data() + (std::size_t)k * S * 4;
        double step_max = -std::numeric_limits<double>::infinity();
        for (int ns = 0; ns < S; ++ns) {
            acc.clear();
            for (int in : t.incoming[ns]) acc.push_back(a[in >> 2] + g[in]);
            an[ns] = detail::lse4(acc.data(), (int)acc.size(), maxlog);
            step_max = std::max(step_max, an[ns]);
        }
        for (int ns = 0; ns < S; ++ns) an[ns] -= step_max;
    }
    for (int k = n - 1; k >= 0; --k) {
        double* b = beta.data() + (std::size_t)k * S;
        const double* bn = beta.data() + (std::size_t)(k + 1) * S;
        const double* g = gamma.data() + (std::size_t)k * S * 4;
        double step_max = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < S; ++s) {
            double tmp[4];
            for (int u = 0; u < 4; ++u) tmp[u] = g[s * 4 + u] + bn[t.next[s * 4 + u]];
            b[s] = detail::lse4(tmp, 4, maxlog);
            step_max = std::max(step_max, b[s]);
        }
        for (int s = 0; s < S; ++s) b[s] -= step_max;
    }

    out.posteriors.resize(n);
    out.extrinsics.resize(n);
    for (int k = 0; k < n; ++k) {
        const double* a = alpha.data() + (std::size_t)k * S;
        const double* bn = beta.data() + (std::size_t)(k + 1) * S;
        const double* g = gamma.data() + (std::size_t)k * S * 4;
        LlrVec4 post;
        for (int u = 0; u < 4; ++u) {
            acc.clear();
            for (int s = 0; s < S; ++s) acc.push_back(a[s] + g[s * 4 + u] + bn[t.next[s * 4 + u]]);
            post[u] = detail::lse4(acc.data(), (int)acc.size(), maxlog);
        }
        const double z = detail::lse4(post.l.data(), 4, false);
        for (int u = 0; u < 4; ++u) post[u] = std::max(post[u] - z, kLogFloor);
        out.posteriors[k] = post;
        out.extrinsics[k] = normalize(post - out.priors[k], LlrAnchor::ZeroSymbol);
    }
    return out;
}

// The Log-BCJR bound to one channel realization; repeated calls with the
// same inputs are bit-identical.
class BMac {
  public:
    BMac(const ChannelRealization& ch, bool reduced)
        : ch_(&ch), trellis_(build_trellis(ch, reduced)), psi_(branch_outputs(ch, trellis_)) {}

    static BMac make_auto(const ChannelRealization& ch) {
        try {
            return BMac(ch, true);
        } catch (const std::invalid_argument&) {
            return BMac(ch, false);
        }
    }

    const Trellis& trellis() const { return trellis_; }

    ApSequence run(const Observation& obs, const std::vector<LlrVec4>& priors,
                   DetectorMode mode = DetectorMode::Exact) const {
        return bcjr(obs, priors, trellis_, psi_, ch_->sigma2, mode);
    }

    ApSequence run_uniform(const Observation& obs, DetectorMode mode = DetectorMode::Exact) const {
        return run(obs, std::vector<LlrVec4>(obs.size()), mode);
    }

  private:
    const ChannelRealization* ch_;
    Trellis trellis_;
    std::vector<Cvec2> psi_;
};

}  // namespace pnc
