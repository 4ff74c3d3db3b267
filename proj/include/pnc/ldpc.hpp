// LDPC code machinery shared by both sources: sparse parity-check matrices,
// alist import/export, a PEG-style regular-code builder, type-I 2D
// Euclidean-geometry cyclic codes, GF(2) encoders and syndrome/shift helpers.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnc {

using Codeword = std::vector<std::uint8_t>;  // one bit per entry

struct ParityCheckMatrix {
    int m = 0;  // checks
    int n = 0;  // block length
    std::vector<std::vector<int>> rows;  // per-check sorted column indices
    std::vector<std::vector<int>> cols;  // per-variable sorted row indices
    bool is_cyclic = false;
    std::vector<std::uint8_t> genpoly;   // lowest degree first; empty if not cyclic

    // Cross-consistency of the two adjacency views; throws on violation.
    void validate() const {
        if ((int)rows.size() != m || (int)cols.size() != n)
            throw std::runtime_error("parity matrix: adjacency size mismatch");
        std::size_t row_edges = 0, col_edges = 0;
        for (int i = 0; i < m; ++i) {
            const auto& r = rows[i];
            if (!std::is_sorted(r.begin(), r.end()) || std::adjacent_find(r.begin(), r.end()) != r.end())
                throw std::runtime_error("parity matrix: row " + std::to_string(i) + " not sorted/unique");
            for (int j : r) {
                if (j < 0 || j >= n) throw std::runtime_error("parity matrix: column index out of range");
                if (!std::binary_search(cols[j].begin(), cols[j].end(), i))
                    throw std::runtime_error("parity matrix: row/col views disagree");
            }
            row_edges += r.size();
        }
        for (int j = 0; j < n; ++j) {
            const auto& c = cols[j];
            if (!std::is_sorted(c.begin(), c.end()) || std::adjacent_find(c.begin(), c.end()) != c.end())
                throw std::runtime_error("parity matrix: col " + std::to_string(j) + " not sorted/unique");
            for (int i : c)
                if (!std::binary_search(rows[i].begin(), rows[i].end(), j))
                    throw std::runtime_error("parity matrix: col/row views disagree");
            col_edges += c.size();
        }
        if (row_edges != col_edges) throw std::runtime_error("parity matrix: edge count mismatch");
    }

    static ParityCheckMatrix from_rows(int m_, int n_, std::vector<std::vector<int>> rows_) {
        ParityCheckMatrix h;
        h.m = m_;
        h.n = n_;
        h.rows = std::move(rows_);
        h.cols.assign(n_, {});
        for (int i = 0; i < m_; ++i) {
            auto& r = h.rows[i];
            std::sort(r.begin(), r.end());
            for (int j : r) h.cols[j].push_back(i);
        }
        for (auto& c : h.cols) std::sort(c.begin(), c.end());
        h.validate();
        return h;
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (const auto& r : rows) e += r.size();
        return e;
    }

    // FNV-1a over the sparse structure; used by the run manifest.
    std::uint64_t structure_hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xff;
                h *= 1099511628211ull;
            }
        };
        mix(static_cast<std::uint64_t>(m));
        mix(static_cast<std::uint64_t>(n));
        for (const auto& r : rows) {
            mix(r.size());
            for (int j : r) mix(static_cast<std::uint64_t>(j));
        }
        return h;
    }
};

// ---------------------------------------------------------------------------
// GF(2) dense bit-matrix helpers (packed 64-bit words)

namespace gf2 {

struct BitMatrix {
    int rows = 0, cols = 0, words = 0;
    std::vector<std::uint64_t> data;  // row-major, `words` per row

    BitMatrix() = default;
    BitMatrix(int r, int c) : rows(r), cols(c), words((c + 63) / 64), data((std::size_t)r * words, 0) {}

    std::uint64_t* row(int i) { return data.data() + (std::size_t)i * words; }
    const std::uint64_t* row(int i) const { return data.data() + (std::size_t)i * words; }
    bool get(int i, int j) const { return (row(i)[j >> 6] >> (j & 63)) & 1u; }
    void set(int i, int j, bool v) {
        std::uint64_t mask = 1ull << (j & 63);
        if (v)
            row(i)[j >> 6] |= mask;
        else
            row(i)[j >> 6] &= ~mask;
    }
    void xor_rows(int dst, int src) {
        auto* d = row(dst);
        const auto* s = row(src);
        for (int w = 0; w < words; ++w) d[w] ^= s[w];
    }
};

inline BitMatrix from_sparse(const ParityCheckMatrix& h) {
    BitMatrix b(h.m, h.n);
    for (int i = 0; i < h.m; ++i)
        for (int j : h.rows[i]) b.set(i, j, true);
    return b;
}

// Reduced row echelon form with column pivot record. Returns pivot columns.
inline std::vector<int> rref(BitMatrix& a) {
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < a.cols && r < a.rows; ++c) {
        int piv = -1;
        for (int i = r; i < a.rows; ++i)
            if (a.get(i, c)) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != r)
            for (int w = 0; w < a.words; ++w) std::swap(a.row(piv)[w], a.row(r)[w]);
        for (int i = 0; i < a.rows; ++i)
            if (i != r && a.get(i, c)) a.xor_rows(i, r);
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline int rank(const ParityCheckMatrix& h) {
    BitMatrix b = from_sparse(h);
    return static_cast<int>(rref(b).size());
}

// --- polynomials over GF(2), coefficients lowest degree first ---

using Poly = std::vector<std::uint8_t>;

inline Poly trim(Poly p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}
inline int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

inline Poly poly_mod(Poly a, const Poly& b) {
    a = trim(a);
    Poly d = trim(b);
    if (d.empty()) throw std::invalid_argument("poly_mod: zero divisor");
    while (degree(a) >= degree(d) && !a.empty()) {
        int shift = degree(a) - degree(d);
        for (int i = 0; i <= degree(d); ++i) a[i + shift] ^= d[i];
        a = trim(a);
    }
    return a;
}

inline Poly poly_div(Poly a, const Poly& b) {
    a = trim(a);
    Poly d = trim(b);
    if (d.empty()) throw std::invalid_argument("poly_div: zero divisor");
    if (degree(a) < degree(d)) return {};
    Poly q(degree(a) - degree(d) + 1, 0);
    while (degree(a) >= degree(d) && !a.empty()) {
        int shift = degree(a) - degree(d);
        q[shift] = 1;
        for (int i = 0; i <= degree(d); ++i) a[i + shift] ^= d[i];
        a = trim(a);
    }
    return q;
}

inline Poly poly_gcd(Poly a, Poly b) {
    a = trim(std::move(a));
    b = trim(std::move(b));
    while (!b.empty()) {
        Poly r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

inline Poly reciprocal(const Poly& p) {
    Poly r(p.rbegin(), p.rend());
    return trim(r);
}

}  // namespace gf2

// ---------------------------------------------------------------------------
// Encoders

struct GeneratorForm {
    int n = 0;
    int k = 0;
    bool cyclic = false;

    // Cyclic form: systematic polynomial encoder.
    gf2::Poly genpoly;  // degree n - k, lowest first

    // General form: RREF of H with pivot/free column split; parity bits are
    // linear in the message bits (packed rows of the free-column submatrix).
    std::vector<int> pivot_cols;           // size r = n - k
    std::vector<int> free_cols;            // size k (systematic positions)
    gf2::BitMatrix parity_map;             // r x k
};

inline bool syndrome_ok(const ParityCheckMatrix& h, const Codeword& c) {
    if ((int)c.size() != h.n) throw std::invalid_argument("syndrome: codeword length mismatch");
    for (const auto& r : h.rows) {
        unsigned s = 0;
        for (int j : r) s ^= c[j];
        if (s & 1u) return false;
    }
    return true;
}

// output[k] = input[(k - iota) mod N]; positive iota delays the stream.
inline Codeword cyclic_shift(const Codeword& c, int iota) {
    const int n = static_cast<int>(c.size());
    Codeword out(c.size());
    int s = ((iota % n) + n) % n;
    for (int i = 0; i < n; ++i) out[i] = c[(i - s + n) % n];
    return out;
}

inline GeneratorForm make_generator(const ParityCheckMatrix& h) {
    GeneratorForm g;
    g.n = h.n;
    if (h.is_cyclic && !h.genpoly.empty()) {
        g.cyclic = true;
        g.genpoly = gf2::trim(h.genpoly);
        g.k = h.n - gf2::degree(g.genpoly);
        return g;
    }
    gf2::BitMatrix a = gf2::from_sparse(h);
    g.pivot_cols = gf2::rref(a);
    const int r = static_cast<int>(g.pivot_cols.size());
    g.k = h.n - r;
    std::vector<std::uint8_t> is_pivot(h.n, 0);
    for (int c : g.pivot_cols) is_pivot[c] = 1;
    for (int j = 0; j < h.n; ++j)
        if (!is_pivot[j]) g.free_cols.push_back(j);
    g.parity_map = gf2::BitMatrix(r, g.k);
    for (int i = 0; i < r; ++i)
        for (int jj = 0; jj < g.k; ++jj)
            if (a.get(i, g.free_cols[jj])) g.parity_map.set(i, jj, true);
    return g;
}

inline Codeword encode(const GeneratorForm& g, const std::vector<std::uint8_t>& msg) {
    if ((int)msg.size() != g.k) throw std::invalid_argument("encode: message length != k");
    Codeword c(g.n, 0);
    if (g.cyclic) {
        // c(x) = x^{n-k} m(x) + (x^{n-k} m(x) mod g(x)); message occupies the
        // top-degree coefficients, so the systematic part survives shifts of
        // the encoding convention used on both sources.
        const int nk = g.n - g.k;
        gf2::Poly shifted(g.n, 0);
        for (int i = 0; i < g.k; ++i) shifted[nk + i] = msg[i];
        gf2::Poly rem = gf2::poly_mod(shifted, g.genpoly);
        for (int i = 0; i < (int)rem.size(); ++i) c[i] = rem[i];
        for (int i = 0; i < g.k; ++i) c[nk + i] = msg[i];
        return c;
    }
    for (int jj = 0; jj < g.k; ++jj) c[g.free_cols[jj]] = msg[jj];
    const int r = static_cast<int>(g.pivot_cols.size());
    for (int i = 0; i < r; ++i) {
        unsigned p = 0;
        const std::uint64_t* rowp = g.parity_map.row(i);
        for (int w = 0; w < g.parity_map.words; ++w) {
            std::uint64_t acc = rowp[w];
            for (int b = 0; b < 64; ++b) {
                int jj = w * 64 + b;
                if (jj >= g.k) break;
                if ((acc >> b) & 1u) p ^= msg[jj];
            }
        }
        c[g.pivot_cols[i]] = static_cast<std::uint8_t>(p & 1u);
    }
    return c;
}

inline std::vector<std::uint8_t> extract_message(const GeneratorForm& g, const Codeword& c) {
    if ((int)c.size() != g.n) throw std::invalid_argument("extract_message: length mismatch");
    std::vector<std::uint8_t> msg(g.k);
    if (g.cyclic) {
        const int nk = g.n - g.k;
        for (int i = 0; i < g.k; ++i) msg[i] = c[nk + i];
    } else {
        for (int jj = 0; jj < g.k; ++jj) msg[jj] = c[g.free_cols[jj]];
    }
    return msg;
}

// ---------------------------------------------------------------------------
// alist interchange format (MacKay convention, 1-based indices)

inline ParityCheckMatrix load_alist(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&lineno](const std::string& why) {
        throw std::runtime_error("alist parse error at line " + std::to_string(lineno) + ": " + why);
    };
    auto next_tokens = [&]() {
        while (std::getline(in, line)) {
            ++lineno;
            std::istringstream ls(line);
            std::vector<long> toks;
            long v;
            while (ls >> v) toks.push_back(v);
            if (!toks.empty()) return toks;
        }
        ++lineno;
        fail("unexpected end of input");
        return std::vector<long>{};
    };

    auto hdr = next_tokens();
    if (hdr.size() != 2 || hdr[0] <= 0 || hdr[1] <= 0) fail("expected 'n m' header");
    const int n = static_cast<int>(hdr[0]);
    const int m = static_cast<int>(hdr[1]);
    auto maxdeg = next_tokens();
    if (maxdeg.size() != 2 || maxdeg[0] < 0 || maxdeg[1] < 0) fail("expected max column/row degrees");

    auto read_degrees = [&](int count, const char* what) {
        std::vector<int> deg;
        while ((int)deg.size() < count) {
            for (long v : next_tokens()) {
                if (v < 0) fail(std::string("negative ") + what + " degree");
                deg.push_back(static_cast<int>(v));
            }
        }
        if ((int)deg.size() != count) fail(std::string("wrong number of ") + what + " degrees");
        return deg;
    };
    auto col_deg = read_degrees(n, "column");
    auto row_deg = read_degrees(m, "row");

    auto read_adjacency = [&](int count, const std::vector<int>& deg, int index_limit, const char* what) {
        std::vector<std::vector<int>> adj(count);
        for (int i = 0; i < count; ++i) {
            auto toks = next_tokens();
            if ((int)toks.size() < deg[i]) fail(std::string("too few indices for ") + what);
            for (int t = 0; t < (int)toks.size(); ++t) {
                long v = toks[t];
                if (t < deg[i]) {
                    if (v < 1 || v > index_limit)
                        fail(std::string("index ") + std::to_string(v) + " out of range (1-based format)");
                    adj[i].push_back(static_cast<int>(v - 1));
                } else if (v != 0) {
                    fail("nonzero padding entry");
                }
            }
        }
        return adj;
    };
    auto col_adj = read_adjacency(n, col_deg, m, "column");
    auto row_adj = read_adjacency(m, row_deg, n, "row");

    ParityCheckMatrix h = ParityCheckMatrix::from_rows(m, n, std::move(row_adj));
    // The column lists are redundant; insist they agree with the row lists.
    for (int j = 0; j < n; ++j) {
        auto want = col_adj[j];
        std::sort(want.begin(), want.end());
        if (want != h.cols[j])
            throw std::runtime_error("alist parse error: row/column adjacency disagree at column " +
                                     std::to_string(j + 1));
    }
    return h;
}

inline ParityCheckMatrix load_alist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open alist file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_alist(ss.str());
}

inline std::string emit_alist(const ParityCheckMatrix& h) {
    std::ostringstream out;
    int maxc = 0, maxr = 0;
    for (const auto& c : h.cols) maxc = std::max<int>(maxc, (int)c.size());
    for (const auto& r : h.rows) maxr = std::max<int>(maxr, (int)r.size());
    out << h.n << ' ' << h.m << '\n' << maxc << ' ' << maxr << '\n';
    for (int j = 0; j < h.n; ++j) out << h.cols[j].size() << (j + 1 < h.n ? ' ' : '\n');
    for (int i = 0; i < h.m; ++i) out << h.rows[i].size() << (i + 1 < h.m ? ' ' : '\n');
    for (const auto& c : h.cols) {
        for (std::size_t t = 0; t < c.size(); ++t) out << c[t] + 1 << (t + 1 < c.size() ? ' ' : '\n');
        if (c.empty()) out << '\n';
    }
    for (const auto& r : h.rows) {
        for (std::size_t t = 0; t < r.size(); ++t) out << r[t] + 1 << (t + 1 < r.size() ? ' ' : '\n');
        if (r.empty()) out << '\n';
    }
    return out.str();
}

// Generator polynomial file: one line of binary coefficients, lowest degree first.
inline gf2::Poly load_genpoly_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open generator polynomial file: " + path);
    gf2::Poly p;
    std::string tok;
    while (f >> tok) {
        if (tok == "0")
            p.push_back(0);
        else if (tok == "1")
            p.push_back(1);
        else
            throw std::runtime_error("generator polynomial file: expected 0/1 coefficients");
    }
    p = gf2::trim(p);
    if (p.empty()) throw std::runtime_error("generator polynomial file: empty polynomial");
    return p;
}

inline void save_genpoly_file(const std::string& path, const gf2::Poly& p) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write generator polynomial file: " + path);
    for (std::size_t i = 0; i < p.size(); ++i) f << int(p[i]) << (i + 1 < p.size() ? " " : "\n");
}

// ---------------------------------------------------------------------------
// Regular code construction (progressive edge growth)

// Builds an (n, col_degree, row_degree)-regular matrix; with girth_min = 6 the
// result has no 4-cycles. Deterministic for a fixed seed.
inline ParityCheckMatrix build_regular_code(int n, int col_degree, int row_degree, int girth_min,
                                            std::uint64_t seed) {
    if (n <= 0 || col_degree <= 0 || row_degree <= 0)
        throw std::invalid_argument("build_regular_code: nonpositive parameter");
    if (girth_min != 4 && girth_min != 6)
        throw std::invalid_argument("build_regular_code: girth_min must be 4 or 6");
    const long long edges = 1ll * n * col_degree;
    if (edges % row_degree != 0)
        throw std::invalid_argument("build_regular_code: n*col_degree not divisible by row_degree");
    const int m = static_cast<int>(edges / row_degree);

    for (int attempt = 0; attempt < 200; ++attempt) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (attempt + 1));
        std::vector<std::vector<int>> rows(m), cols(n);
        std::vector<int> row_fill(m, 0);
        bool stuck = false;

        std::vector<int> dist_check(m);  // BFS distance from the current variable
        std::vector<int> dist_var(n);

        for (int v = 0; v < n && !stuck; ++v) {
            for (int e = 0; e < col_degree && !stuck; ++e) {
                // BFS over the bipartite graph from v.
                std::fill(dist_check.begin(), dist_check.end(), -1);
                std::fill(dist_var.begin(), dist_var.end(), -1);
                dist_var[v] = 0;
                std::queue<int> qv, qc;
                qv.push(v);
                int depth = 0;
                while ((!qv.empty() || !qc.empty()) && depth < 16) {
                    if (depth % 2 == 0) {
                        while (!qv.empty()) {
                            int x = qv.front();
                            qv.pop();
                            for (int c : cols[x])
                                if (dist_check[c] < 0) {
                                    dist_check[c] = depth + 1;
                                    qc.push(c);
                                }
                        }
                    } else {
                        while (!qc.empty()) {
                            int c = qc.front();
                            qc.pop();
                            for (int x : rows[c])
                                if (dist_var[x] < 0) {
                                    dist_var[x] = depth + 1;
                                    qv.push(x);
                                }
                        }
                    }
                    ++depth;
                }
                // Candidate checks: capacity left and not already adjacent.
                int best = -1;
                long best_key = std::numeric_limits<long>::min();
                int n_best = 0;
                for (int c = 0; c < m; ++c) {
                    if (row_fill[c] >= row_degree) continue;
                    if (dist_check[c] == 1) continue;  // already adjacent
                    int d = dist_check[c] < 0 ? 1 << 20 : dist_check[c];
                    if (girth_min == 6 && d <= 3) continue;  // would close a 4-cycle
                    // Prefer far/unreached checks, then lightly filled ones.
                    long key = 1000000l * d - 1000l * row_fill[c];
                    if (key > best_key) {
                        best_key = key;
                        best = c;
                        n_best = 1;
                    } else if (key == best_key) {
                        // Reservoir-style random tie-break keeps the build
                        // deterministic for a fixed seed.
                        ++n_best;
                        if (rng() % n_best == 0) best = c;
                    }
                }
                if (best < 0) {
                    stuck = true;
                    break;
                }
                cols[v].push_back(best);
                rows[best].push_back(v);
                ++row_fill[best];
            }
        }
        if (stuck) continue;
        ParityCheckMatrix h = ParityCheckMatrix::from_rows(m, n, std::move(rows));
        return h;
    }
    throw std::runtime_error("build_regular_code: construction failed for requested parameters");
}

// ---------------------------------------------------------------------------
// Type-I two-dimensional Euclidean-geometry cyclic LDPC codes

// Length 2^{2s}-1 incidence code of the lines of EG(2, 2^s) not through the
// origin. Rows are the cyclic shifts of one line's incidence vector; the
// generator polynomial of the null space is extracted from the row polynomial.
inline ParityCheckMatrix build_cyclic_eg_code(int s) {
    if (s < 2 || s > 4) throw std::invalid_argument("build_cyclic_eg_code: s must be in {2,3,4}");
    const int ext_deg = 2 * s;
    // Primitive polynomials over GF(2) for degrees 4, 6, 8 (bit i = coeff of x^i).
    static const unsigned prim[5] = {0, 0, 0b10011u, 0b1000011u, 0b100011101u};
    const unsigned poly = prim[s];
    const int q = 1 << s;
    const int bigq = 1 << ext_deg;
    const int n = bigq - 1;

    // log/antilog tables for GF(2^{2s}) with primitive element x.
    std::vector<int> exp_tab(n), log_tab(bigq, -1);
    unsigned x = 1;
    for (int i = 0; i < n; ++i) {
        exp_tab[i] = static_cast<int>(x);
        log_tab[x] = i;
        x <<= 1;
        if (x & (1u << ext_deg)) x ^= poly;
    }

    // GF(q) inside GF(q^2): {0} and the powers alpha^{j(q+1)}.
    std::vector<int> subfield;
    subfield.push_back(0);
    for (int j = 0; j < q - 1; ++j) subfield.push_back(exp_tab[(std::size_t)j * (q + 1) % n]);

    // Line through the point 1 with direction alpha (alpha is not in GF(q),
    // so the line misses the origin). Incidence over nonzero field elements.
    std::vector<int> base(n, 0);
    for (int beta : subfield) {
        unsigned pt;
        if (beta == 0) {
            pt = 1;
        } else {
            int lb = log_tab[beta];
            pt = 1u ^ static_cast<unsigned>(exp_tab[(lb + 1) % n]);  // 1 + beta*alpha
        }
        if (pt == 0) throw std::runtime_error("eg code: line unexpectedly passes through origin");
        base[log_tab[pt]] = 1;
    }

    std::vector<std::vector<int>> rows(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i)
            if (base[((i - j) % n + n) % n]) rows[j].push_back(i);
    }
    ParityCheckMatrix h = ParityCheckMatrix::from_rows(n, n, std::move(rows));

    // Null space generator: rows span <gcd(row poly, x^n-1)>; the dual of that
    // cyclic code is generated by the reciprocal of its parity polynomial.
    gf2::Poly rowpoly(base.begin(), base.end());
    gf2::Poly xn1(n + 1, 0);
    xn1[0] = 1;
    xn1[n] = 1;
    gf2::Poly ghat = gf2::poly_gcd(rowpoly, xn1);
    gf2::Poly hpoly = gf2::poly_div(xn1, ghat);
    h.genpoly = gf2::reciprocal(hpoly);
    h.is_cyclic = true;
    return h;
}

}  // namespace pnc
