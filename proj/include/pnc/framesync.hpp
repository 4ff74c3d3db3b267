// Frame-asynchronism handling: interference zero-padding (as erasures for
// the detector), the SNR-loss bookkeeping, CRC-16 message framing, the two
// delay-resolution mechanisms, and the broadcast-phase source-side recovery.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "gf4.hpp"
#include "jointdec.hpp"
#include "ldpc.hpp"
#include "macchannel.hpp"

namespace pnc {

// Replace the first and last iota_max samples by erasure markers; the
// detector then treats them as absent observations rather than received
// zeros (a literal zero would be a strong wrong observation under BPSK).
inline Observation zero_pad_interference(Observation obs, int iota_max) {
    const int n = static_cast<int>(obs.size());
    if (iota_max < 0 || 2 * iota_max >= n)
        throw std::invalid_argument("zero_pad_interference: iota_max out of range");
    for (int k = 0; k < iota_max; ++k) {
        obs.erased[k] = 1;
        obs.erased[n - 1 - k] = 1;
    }
    return obs;
}

// 10*log10((N - 2*iota)/N), the energy discarded with the interference part.
inline double snr_loss_db(int n, int iota) {
    if (n <= 0 || iota < 0 || 2 * iota >= n) throw std::invalid_argument("snr_loss_db: domain violation");
    return 10.0 * std::log10(static_cast<double>(n - 2 * iota) / n);
}

// ---------------------------------------------------------------------------
// CRC-16/CCITT-FALSE over bit streams (poly 0x1021, init 0xFFFF, no
// reflection, no final XOR); "123456789" maps to 0x29B1.

inline std::uint16_t crc16_bits(const std::vector<std::uint8_t>& bits) {
    std::uint16_t reg = 0xFFFF;
    for (std::uint8_t b : bits) {
        const std::uint16_t top = static_cast<std::uint16_t>((reg >> 15) & 1u);
        reg = static_cast<std::uint16_t>(reg << 1);
        if (top ^ (b & 1u)) reg ^= 0x1021;
    }
    return reg;
}

struct CrcFrame {
    std::vector<std::uint8_t> bits;  // message followed by 16 CRC bits, MSB first
};

inline CrcFrame crc16_append(const std::vector<std::uint8_t>& msg) {
    if (msg.empty()) throw std::invalid_argument("crc16_append: empty message");
    CrcFrame f;
    f.bits = msg;
    const std::uint16_t crc = crc16_bits(msg);
    for (int i = 15; i >= 0; --i) f.bits.push_back(static_cast<std::uint8_t>((crc >> i) & 1u));
    return f;
}

inline bool crc16_check(const std::vector<std::uint8_t>& frame) {
    if (frame.size() <= 16) return false;
    std::vector<std::uint8_t> msg(frame.begin(), frame.end() - 16);
    const std::uint16_t crc = crc16_bits(msg);
    for (int i = 0; i < 16; ++i)
        if (frame[frame.size() - 16 + i] != (std::uint8_t)((crc >> (15 - i)) & 1u)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Delay resolution

struct DelayResolution {
    bool ok = false;
    int iota = 0;
    std::vector<int> candidates;  // every shift whose CRC passed
    bool ambiguous = false;
};

// Scan cyclic shifts of the decoded B-stream through [-iota_max, iota_max];
// the unique shift whose extracted message passes CRC is the delay. Multiple
// passes are surfaced as an explicit ambiguity.
inline DelayResolution resolve_delay_crc(const Codeword& b_part, const GeneratorForm& gen,
                                         int iota_max) {
    DelayResolution r;
    for (int l = -iota_max; l <= iota_max; ++l) {
        const Codeword cand = cyclic_shift(b_part, -l);
        if (crc16_check(extract_message(gen, cand))) r.candidates.push_back(l);
    }
    if (r.candidates.size() == 1) {
        r.ok = true;
        r.iota = r.candidates.front();
    } else if (r.candidates.size() > 1) {
        r.ambiguous = true;
    }
    return r;
}

// LLR-magnitude delay estimator: decode with each candidate interference
// padding and keep the one with the largest aggregate posterior confidence,
// sum_n (max L~_n - mean L~_n). The padded observation does not depend on
// the sign of the candidate, so only magnitudes 0..iota_max are scanned.
// Kept for reproducing the finding that the CRC scan is far more reliable.
using PosteriorFn = std::function<std::vector<LlrVec4>(const Observation&)>;

inline int resolve_delay_llr(const Observation& obs, const PosteriorFn& decode_posteriors,
                             int iota_max) {
    int best = 0;
    double best_stat = -std::numeric_limits<double>::infinity();
    for (int pad = 0; pad <= iota_max; ++pad) {
        const Observation padded = pad > 0 ? zero_pad_interference(obs, pad) : obs;
        const std::vector<LlrVec4> post = decode_posteriors(padded);
        double stat = 0.0;
        for (const auto& p : post) {
            const double mean = (p[0] + p[1] + p[2] + p[3]) / 4.0;
            stat += p.max() - mean;
        }
        if (stat > best_stat) {
            best_stat = stat;
            best = pad;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Broadcast-phase recovery at the sources

enum class SourceRole { A, B };

struct BroadcastRecovery {
    bool ok = false;
    int iota = 0;
    std::vector<std::uint8_t> message;  // the other source's message (CRC stripped)
    bool ambiguous = false;
};

// Role A owns c_a: XOR with the relay word gives the shifted B stream, then
// the CRC scan identifies the shift and B's message. Role B owns c_b: each
// candidate shift of its own codeword is XORed with the relay word and the
// extracted A-message is CRC-tested.
inline BroadcastRecovery broadcast_recover(const Codeword& relay_xor, const Codeword& own,
                                           SourceRole role, const GeneratorForm& gen, int iota_max) {
    if (relay_xor.size() != own.size())
        throw std::invalid_argument("broadcast_recover: length mismatch");
    const int n = static_cast<int>(own.size());
    BroadcastRecovery r;
    std::vector<std::pair<int, std::vector<std::uint8_t>>> passes;
    for (int l = -iota_max; l <= iota_max; ++l) {
        Codeword cand(n);
        if (role == SourceRole::A) {
            // c_r XOR c_a = c_b^(iota); unshift by l and test.
            for (int k = 0; k < n; ++k) cand[k] = relay_xor[k] ^ own[k];
            cand = cyclic_shift(cand, -l);
        } else {
            const Codeword shifted = cyclic_shift(own, l);
            for (int k = 0; k < n; ++k) cand[k] = relay_xor[k] ^ shifted[k];
        }
        std::vector<std::uint8_t> frame = extract_message(gen, cand);
        if (crc16_check(frame)) passes.emplace_back(l, std::vector<std::uint8_t>(frame.begin(), frame.end() - 16));
    }
    if (passes.size() == 1) {
        r.ok = true;
        r.iota = passes.front().first;
        r.message = std::move(passes.front().second);
    } else if (passes.size() > 1) {
        r.ambiguous = true;
    }
    return r;
}

}  // namespace pnc
