// Joint LDPC + physical-layer network coding decoding: the log-domain
// generalized sum-product algorithm over the virtual GF(4) codeword, and the
// JCNC baseline that collapses joint posteriors to XOR-bit LLRs before a
// standard binary sum-product pass.

#pragma once

#include <functional>
#include <vector>

#include "detector.hpp"
#include "gf4.hpp"
#include "ldpc.hpp"

namespace pnc {

// GF(4) box-plus: distribution of v1 + v2 given the two incoming messages.
// Subtraction equals addition (characteristic 2), so alpha_i - x indexes as
// i XOR x. Output is zero-anchored.
inline LlrVec4 box_plus(const LlrVec4& a, const LlrVec4& b) {
    const LlrVec4 fa = floored(a), fb = floored(b);
    LlrVec4 out;
    for (int i = 0; i < 4; ++i) {
        double acc = fa[0] + fb[i];
        for (int x = 1; x < 4; ++x) acc = jacobian_log_sum(acc, fa[x] + fb[i ^ x]);
        out[i] = acc;
    }
    return normalize(out, LlrAnchor::ZeroSymbol);
}

// Check node processing: outgoing message on each edge is the box-plus of
// all other incoming messages (forward/backward partial accumulations).
// A degree-1 check contributes the neutral zero message.
inline std::vector<LlrVec4> check_node_update(const std::vector<LlrVec4>& incoming) {
    const int d = static_cast<int>(incoming.size());
    std::vector<LlrVec4> out(d);
    if (d == 0) return out;
    if (d == 1) {
        out[0] = LlrVec4{};
        return out;
    }
    std::vector<LlrVec4> fwd(d), bwd(d);
    fwd[0] = normalize(floored(incoming[0]), LlrAnchor::ZeroSymbol);
    for (int i = 1; i < d; ++i) fwd[i] = box_plus(fwd[i - 1], incoming[i]);
    bwd[d - 1] = normalize(floored(incoming[d - 1]), LlrAnchor::ZeroSymbol);
    for (int i = d - 2; i >= 0; --i) bwd[i] = box_plus(incoming[i], bwd[i + 1]);
    out[0] = bwd[1];
    out[d - 1] = fwd[d - 2];
    for (int i = 1; i < d - 1; ++i) out[i] = box_plus(fwd[i - 1], bwd[i + 1]);
    return out;
}

// Variable node processing: posterior = channel term + all incoming check
// messages; outgoing on each edge excludes that edge's own contribution.
struct VariableUpdate {
    LlrVec4 posterior;
    std::vector<LlrVec4> outgoing;
};

inline VariableUpdate variable_node_update(const LlrVec4& channel_term,
                                           const std::vector<LlrVec4>& incoming) {
    VariableUpdate r;
    r.posterior = channel_term;
    for (const auto& m : incoming) r.posterior += m;
    r.outgoing.resize(incoming.size());
    for (std::size_t i = 0; i < incoming.size(); ++i)
        r.outgoing[i] = normalize(r.posterior - incoming[i], LlrAnchor::ZeroSymbol);
    return r;
}

struct DecodeResult {
    Codeword xor_codeword;
    Codeword part_a, part_b;  // bit streams read from the GF(4) decisions
    bool has_pair = false;
    bool converged = false;
    int outer_iters_used = 0;
    int inner_iters_used = 0;
};

// argmax decision with ties broken toward the lowest symbol index.
inline DecodeResult hard_decision(const std::vector<LlrVec4>& posteriors) {
    DecodeResult r;
    const int n = static_cast<int>(posteriors.size());
    r.xor_codeword.resize(n);
    r.part_a.resize(n);
    r.part_b.resize(n);
    r.has_pair = true;
    for (int k = 0; k < n; ++k) {
        const int v = posteriors[k].argmax();
        r.part_a[k] = static_cast<std::uint8_t>(v & 1);
        r.part_b[k] = static_cast<std::uint8_t>((v >> 1) & 1);
        r.xor_codeword[k] = static_cast<std::uint8_t>((v & 1) ^ ((v >> 1) & 1));
    }
    return r;
}

using BMacFn = std::function<ApSequence(const std::vector<LlrVec4>& priors)>;

// Log-G-SPA schedule: up to n_o B_MAC rounds, each followed by up to n_i
// LDPC iterations; the syndrome of the XOR decision is tested after the
// B_MAC output and after every inner iteration, terminating early on
// success. Between rounds the LDPC extrinsic L_i = posterior - L_e feeds
// back as the detector prior.
inline DecodeResult log_g_spa(const ParityCheckMatrix& h, const BMacFn& b_mac, int n_o, int n_i) {
    if (n_o < 1 || n_i < 1) throw std::invalid_argument("log_g_spa: schedule must be >= 1");
    const int n = h.n;

    // Edge-indexed message stores. For variable j, edge t is h.cols[j][t];
    // the same edge seen from check i has slot index slot_of[j][t].
    std::vector<std::vector<LlrVec4>> var_to_check(h.m);  // per check, by row slot
    std::vector<std::vector<LlrVec4>> check_to_var(h.m);
    std::vector<std::vector<int>> slot_of(n);
    for (int i = 0; i < h.m; ++i) {
        var_to_check[i].resize(h.rows[i].size());
        check_to_var[i].resize(h.rows[i].size());
    }
    for (int j = 0; j < n; ++j) {
        slot_of[j].reserve(h.cols[j].size());
        for (int i : h.cols[j]) {
            const auto& row = h.rows[i];
            const int slot = static_cast<int>(std::lower_bound(row.begin(), row.end(), j) - row.begin());
            slot_of[j].push_back(slot);
        }
    }

    std::vector<LlrVec4> l_i(n);  // detector prior (zero at S1)
    std::vector<LlrVec4> posteriors(n);
    DecodeResult result;

    for (int outer = 1; outer <= n_o; ++outer) {
        result.outer_iters_used = outer;
        ApSequence ap = b_mac(l_i);
        const std::vector<LlrVec4>& l_e = ap.extrinsics;

        // S2: channel terms become the fresh variable-to-check messages.
        for (int i = 0; i < h.m; ++i)
            for (std::size_t t = 0; t < h.rows[i].size(); ++t) var_to_check[i][t] = l_e[h.rows[i][t]];
        posteriors = l_e;
        DecodeResult cand = hard_decision(posteriors);
        if (syndrome_ok(h, cand.xor_codeword)) {
            cand.converged = true;
            cand.outer_iters_used = result.outer_iters_used;
            cand.inner_iters_used = result.inner_iters_used;
            return cand;
        }

        for (int inner = 1; inner <= n_i; ++inner) {
            ++result.inner_iters_used;
            // S4: check node processing.
            for (int i = 0; i < h.m; ++i) check_to_var[i] = check_node_update(var_to_check[i]);
            // S5: posteriors.
            for (int j = 0; j < n; ++j) {
                LlrVec4 post = l_e[j];
                for (std::size_t t = 0; t < h.cols[j].size(); ++t)
                    post += check_to_var[h.cols[j][t]][slot_of[j][t]];
                posteriors[j] = post;
            }
            // S3: hard decision and stopping test.
            cand = hard_decision(posteriors);
            if (syndrome_ok(h, cand.xor_codeword)) {
                cand.converged = true;
                cand.outer_iters_used = result.outer_iters_used;
                cand.inner_iters_used = result.inner_iters_used;
                return cand;
            }
            // S6: variable node processing.
            if (inner < n_i) {
                for (int j = 0; j < n; ++j)
                    for (std::size_t t = 0; t < h.cols[j].size(); ++t) {
                        const int i = h.cols[j][t];
                        const int slot = slot_of[j][t];
                        var_to_check[i][slot] =
                            normalize(posteriors[j] - check_to_var[i][slot], LlrAnchor::ZeroSymbol);
                    }
            }
        }
        // S6 extrinsic extraction for the next detector round.
        for (int j = 0; j < n; ++j) l_i[j] = normalize(posteriors[j] - l_e[j], LlrAnchor::ZeroSymbol);
    }
    result = hard_decision(posteriors);
    result.converged = false;
    result.outer_iters_used = n_o;
    result.inner_iters_used = n_o * n_i;
    return result;
}

// ln(Pr(xor = 0) / Pr(xor = 1)) from a joint GF(4) log-probability vector:
// symbols {0, 1+D} carry xor 0, {1, D} carry xor 1.
inline double xor_llr_from_joint(const LlrVec4& v) {
    const LlrVec4 f = floored(v);
    return jacobian_log_sum(f[0], f[3]) - jacobian_log_sum(f[1], f[2]);
}

// JCNC baseline: one detector pass is collapsed to XOR-bit LLRs, then a
// standard binary sum-product decoder runs on H. Pair estimates are not
// available from this path.
inline DecodeResult jcnc_decode(const ParityCheckMatrix& h, const std::vector<LlrVec4>& joint_posteriors,
                                int iters) {
    const int n = h.n;
    if ((int)joint_posteriors.size() != n) throw std::invalid_argument("jcnc_decode: length mismatch");
    std::vector<double> chan(n);
    for (int j = 0; j < n; ++j) chan[j] = xor_llr_from_joint(joint_posteriors[j]);

    auto decide = [&](const std::vector<double>& llr) {
        Codeword c(n);
        for (int j = 0; j < n; ++j) c[j] = llr[j] < 0.0 ? 1 : 0;
        return c;
    };

    DecodeResult result;
    result.has_pair = false;
    result.outer_iters_used = 1;
    result.xor_codeword = decide(chan);
    if (syndrome_ok(h, result.xor_codeword)) {
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> v2c(h.m), c2v(h.m);
    std::vector<std::vector<int>> slot_of(n);
    for (int i = 0; i < h.m; ++i) {
        v2c[i].assign(h.rows[i].size(), 0.0);
        c2v[i].assign(h.rows[i].size(), 0.0);
    }
    for (int j = 0; j < n; ++j)
        for (int i : h.cols[j]) {
            const auto& row = h.rows[i];
            slot_of[j].push_back(static_cast<int>(std::lower_bound(row.begin(), row.end(), j) - row.begin()));
        }
    for (int i = 0; i < h.m; ++i)
        for (std::size_t t = 0; t < h.rows[i].size(); ++t) v2c[i][t] = chan[h.rows[i][t]];

    std::vector<double> post(n);
    for (int it = 1; it <= iters; ++it) {
        ++result.inner_iters_used;
        for (int i = 0; i < h.m; ++i) {
            const int d = static_cast<int>(v2c[i].size());
            // tanh-rule with sign/magnitude accumulation
            int sign_all = 0;
            double sum_phi = 0.0;
            std::vector<double> phis(d);
            std::vector<int> signs(d);
            auto phi = [](double x) {
                x = std::max(x, 1e-12);
                return -std::log(std::tanh(x / 2.0));
            };
            for (int t = 0; t < d; ++t) {
                signs[t] = v2c[i][t] < 0.0 ? 1 : 0;
                phis[t] = phi(std::abs(v2c[i][t]));
                sign_all ^= signs[t];
                sum_phi += phis[t];
            }
            for (int t = 0; t < d; ++t) {
                const int sgn = sign_all ^ signs[t];
                const double mag = d >= 2 ? phi(sum_phi - phis[t]) : 0.0;
                c2v[i][t] = (sgn ? -1.0 : 1.0) * mag;
            }
        }
        for (int j = 0; j < n; ++j) {
            double p = chan[j];
            for (std::size_t t = 0; t < h.cols[j].size(); ++t) p += c2v[h.cols[j][t]][slot_of[j][t]];
            post[j] = p;
        }
        result.xor_codeword = decide(post);
        if (syndrome_ok(h, result.xor_codeword)) {
            result.converged = true;
            return result;
        }
        for (int j = 0; j < n; ++j)
            for (std::size_t t = 0; t < h.cols[j].size(); ++t) {
                const int i = h.cols[j][t];
                v2c[i][slot_of[j][t]] = post[j] - c2v[i][slot_of[j][t]];
            }
    }
    result.converged = false;
    return result;
}

}  // namespace pnc
