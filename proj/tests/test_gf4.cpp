#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "pnc/gf4.hpp"

using namespace pnc;

TEST_CASE("gf4 addition over GF(2)[D]/(1+D+D^2)") {
    const Gf4Symbol zero(0), one(1), D(2), oneD(3);
    CHECK(gf4_add(one, D) == oneD);        // 1 + D
    CHECK(gf4_add(D, D) == zero);          // characteristic 2
    CHECK(gf4_add(oneD, D) == one);        // (1+D) + D
    // commutative, associative, self-inverse: exhaustive over 4x4(x4)
    for (unsigned x = 0; x < 4; ++x) {
        CHECK(gf4_add(Gf4Symbol(x), Gf4Symbol(x)) == zero);
        for (unsigned y = 0; y < 4; ++y) {
            CHECK(gf4_add(Gf4Symbol(x), Gf4Symbol(y)) == gf4_add(Gf4Symbol(y), Gf4Symbol(x)));
            for (unsigned z = 0; z < 4; ++z)
                CHECK(gf4_add(gf4_add(Gf4Symbol(x), Gf4Symbol(y)), Gf4Symbol(z)) ==
                      gf4_add(Gf4Symbol(x), gf4_add(Gf4Symbol(y), Gf4Symbol(z))));
        }
    }
}

TEST_CASE("pack/unpack round trip") {
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const Gf4Symbol s = Gf4Symbol::pack(a, b);
            CHECK(s.bit_a() == a);
            CHECK(s.bit_b() == b);
        }
}

TEST_CASE("xor_extract is a homomorphism onto the XOR bit") {
    CHECK(xor_extract(Gf4Symbol(0)) == 0);
    CHECK(xor_extract(Gf4Symbol(3)) == 0);  // 1+D -> 1 xor 1
    CHECK(xor_extract(Gf4Symbol(2)) == 1);  // D -> 0 xor 1
    for (unsigned x = 0; x < 4; ++x)
        for (unsigned y = 0; y < 4; ++y)
            CHECK(xor_extract(gf4_add(Gf4Symbol(x), Gf4Symbol(y))) ==
                  (xor_extract(Gf4Symbol(x)) ^ xor_extract(Gf4Symbol(y))));
}

TEST_CASE("normalize anchors") {
    LlrVec4 v;
    v.l = {1, 2, 3, 4};
    const LlrVec4 za = normalize(v, LlrAnchor::ZeroSymbol);
    CHECK(za[0] == 0.0);
    CHECK(za[1] == 1.0);
    CHECK(za[3] == 3.0);

    LlrVec4 u;  // uniform zero passes through
    const LlrVec4 zu = normalize(u, LlrAnchor::ZeroSymbol);
    for (int i = 0; i < 4; ++i) CHECK(zu[i] == 0.0);
    const LlrVec4 mu = normalize(u, LlrAnchor::MaxComponent);
    for (int i = 0; i < 4; ++i) CHECK(mu[i] == 0.0);

    LlrVec4 w;
    w.l = {-1, -2, -3, 0};
    const LlrVec4 mw = normalize(w, LlrAnchor::MaxComponent);
    CHECK(mw[0] == -1.0);
    CHECK(mw[3] == 0.0);

    // argmax and pairwise differences preserved
    LlrVec4 r;
    r.l = {0.3, -1.2, 2.5, 0.9};
    for (auto anchor : {LlrAnchor::ZeroSymbol, LlrAnchor::MaxComponent}) {
        const LlrVec4 nr = normalize(r, anchor);
        CHECK(nr.argmax() == r.argmax());
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(nr[i] - nr[j] == Catch::Approx(r[i] - r[j]).margin(1e-15));
    }

    LlrVec4 bad;
    const double ninf = -std::numeric_limits<double>::infinity();
    bad.l = {ninf, ninf, ninf, ninf};
    CHECK_THROWS_AS(normalize(bad, LlrAnchor::MaxComponent), std::invalid_argument);
}

TEST_CASE("jacobian log sum") {
    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(jacobian_log_sum(0.0, ninf) == 0.0);
    CHECK(jacobian_log_sum(0.0, 0.0) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(jacobian_log_sum(3.0, 1.0) == Catch::Approx(3.126928011).margin(1e-9));
    CHECK(max_log_sum(3.0, 1.0) == 3.0);

    // exact mode dominates max and matches brute force over a grid
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int t = 0; t < 2000; ++t) {
        const double a = u(rng), b = u(rng);
        const double j = jacobian_log_sum(a, b);
        CHECK(j >= std::max(a, b));
        CHECK(j == Catch::Approx(std::log(std::exp(a) + std::exp(b))).margin(1e-12));
    }
}
