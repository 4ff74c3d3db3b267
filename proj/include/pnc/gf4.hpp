// GF(4) symbol arithmetic and log-domain probability vectors.
//
// GF(4) is realized as GF(2)[D]/(1 + D + D^2); a symbol packs a bit pair
// (a, b) as a + b*D, so addition is XOR of the packed values. Only addition
// is needed: the parity constraints carry coefficients in {0,1}.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pnc {

// Log-probabilities below this floor are treated as "practically impossible";
// keeps -inf out of jacobian sums without moving any decision.
inline constexpr double kLogFloor = -50.0;

struct Gf4Symbol {
    std::uint8_t value = 0;  // in {0,1,2,3}; bit0 = a, bit1 = b

    constexpr Gf4Symbol() = default;
    constexpr explicit Gf4Symbol(unsigned v) : value(static_cast<std::uint8_t>(v & 3u)) {}

    static constexpr Gf4Symbol pack(int bit_a, int bit_b) {
        return Gf4Symbol(static_cast<unsigned>((bit_a & 1) | ((bit_b & 1) << 1)));
    }
    constexpr int bit_a() const { return value & 1; }
    constexpr int bit_b() const { return (value >> 1) & 1; }

    friend constexpr bool operator==(Gf4Symbol x, Gf4Symbol y) { return x.value == y.value; }
    friend constexpr bool operator!=(Gf4Symbol x, Gf4Symbol y) { return x.value != y.value; }
};

// Field addition: component-wise XOR of the bit pairs. Self-inverse.
constexpr Gf4Symbol gf4_add(Gf4Symbol x, Gf4Symbol y) {
    return Gf4Symbol(static_cast<unsigned>(x.value ^ y.value));
}

// c_a + c_b*D  ->  c_a XOR c_b (the relay's network-coded bit).
constexpr int xor_extract(Gf4Symbol x) { return x.bit_a() ^ x.bit_b(); }

enum class LlrAnchor { ZeroSymbol, MaxComponent };

// 4-vector of log-probabilities (or log-likelihoods up to an additive
// constant) indexed by the packed symbol value.
struct LlrVec4 {
    std::array<double, 4> l{0.0, 0.0, 0.0, 0.0};

    double& operator[](std::size_t i) { return l[i]; }
    double operator[](std::size_t i) const { return l[i]; }

    LlrVec4& operator+=(const LlrVec4& o) {
        for (int i = 0; i < 4; ++i) l[i] += o.l[i];
        return *this;
    }
    LlrVec4& operator-=(const LlrVec4& o) {
        for (int i = 0; i < 4; ++i) l[i] -= o.l[i];
        return *this;
    }
    friend LlrVec4 operator+(LlrVec4 a, const LlrVec4& b) { return a += b; }
    friend LlrVec4 operator-(LlrVec4 a, const LlrVec4& b) { return a -= b; }

    int argmax() const {
        int best = 0;
        for (int i = 1; i < 4; ++i)
            if (l[i] > l[best]) best = i;
        return best;
    }
    double max() const { return *std::max_element(l.begin(), l.end()); }
    bool all_finite() const {
        for (double v : l)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// ln(e^a + e^b), exact to machine precision; the max-log variant drops the
// correction term.
inline double jacobian_log_sum(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double max_log_sum(double a, double b) { return std::max(a, b); }

// Re-anchor a log-probability vector; relative differences are preserved
// exactly. ZeroSymbol pins l[0] = 0 (decoder convention), MaxComponent pins
// the max to 0 (detector convention).
inline LlrVec4 normalize(const LlrVec4& v, LlrAnchor anchor) {
    double ref;
    if (anchor == LlrAnchor::ZeroSymbol) {
        ref = v[0];
    } else {
        ref = v.max();
    }
    if (!std::isfinite(ref)) {
        // Uniform vectors (all equal, possibly all zero) pass through; a
        // vector with no finite mass is a degenerate message.
        bool any_finite = false;
        for (double x : v.l) any_finite |= std::isfinite(x);
        if (!any_finite) throw std::invalid_argument("normalize: degenerate message, no finite component");
        if (anchor == LlrAnchor::ZeroSymbol)
            throw std::invalid_argument("normalize: zero-anchor requested but l[0] is not finite");
    }
    LlrVec4 out;
    for (int i = 0; i < 4; ++i) out[i] = v[i] - ref;
    return out;
}

// Clamp components at the saturation floor (applied after anchoring).
inline LlrVec4 floored(const LlrVec4& v) {
    LlrVec4 out;
    for (int i = 0; i < 4; ++i) out[i] = std::max(v[i], kLogFloor);
    return out;
}

}  // namespace pnc
