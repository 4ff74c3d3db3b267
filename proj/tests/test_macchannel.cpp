#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "pnc/macchannel.hpp"

using namespace pnc;
using Catch::Approx;

TEST_CASE("pulse energy") {
    CHECK(pulse_energy(PulseShape::rectangular()) == Approx(1.0).margin(1e-12));
    CHECK(pulse_energy(PulseShape::srrc(1.0)) == Approx(1.0).margin(1e-6));
    CHECK(pulse_energy(PulseShape::srrc(0.5)) == Approx(1.0).margin(1e-6));

    PulseShape bad = PulseShape::rectangular();
    bad.amplitude = 1.1;
    CHECK_THROWS_AS(compute_correlations(bad, bad, 0.25), std::invalid_argument);
}

TEST_CASE("rectangular correlations") {
    const PulseShape g = PulseShape::rectangular();
    SECTION("aligned, eps = 0") {
        const CorrelationSet c = compute_correlations(g, g, 0.0);
        CHECK(c.ab(0) == Approx(1.0).margin(1e-12));
        CHECK(c.memory_length == 0);
        CHECK(c.rho_ab.size() == 1);
    }
    SECTION("eps = 0.5 closed form vs quadrature oracle") {
        const CorrelationSet c = compute_correlations(g, g, 0.5);
        CHECK(c.ab(0) == Approx(0.5).margin(1e-12));
        CHECK(c.ab(1) == Approx(0.5).margin(1e-12));
        CHECK(c.ba(0) == Approx(0.5).margin(1e-12));
        CHECK(c.ba(-1) == Approx(0.5).margin(1e-12));
        CHECK(c.memory_length == 1);
        // 128x-oversampled trapezoid oracle on a grid-aligned shift
        CHECK(correlate_pulses_quad(g, g, -0.5, 128) == Approx(0.5).margin(1e-9));
        CHECK(correlate_pulses_quad(g, g, 0.5, 128) == Approx(0.5).margin(1e-9));
    }
    SECTION("general eps overlap") {
        const CorrelationSet c = compute_correlations(g, g, 0.3);
        CHECK(c.ab(0) == Approx(0.7).margin(1e-12));
        CHECK(c.ab(1) == Approx(0.3).margin(1e-12));
        CHECK(c.ba(-1) == Approx(0.3).margin(1e-12));
        CHECK(c.ba(1) == 0.0);
    }
}

TEST_CASE("srrc correlations, beta = 1") {
    const PulseShape g = PulseShape::srrc(1.0);
    SECTION("eps = 0.5: the L = 1 channel of the simulation setup") {
        const CorrelationSet c = compute_correlations(g, g, 0.5);
        CHECK(c.memory_length == 1);
        CHECK(c.ab(0) == Approx(0.5).margin(1e-6));
        CHECK(c.ab(1) == Approx(0.5).margin(1e-6));
        CHECK(c.ab(0) == Approx(c.ba(0)).margin(1e-9));  // pulse symmetry
        // 128x quadrature oracle agreement
        CHECK(correlate_pulses_quad(g, g, -0.5, 128) == Approx(c.ab(0)).margin(1e-6));
    }
    SECTION("cross-symmetry rho_ba(l) = rho_ab(-l)") {
        for (double eps : {0.1, 0.25, 0.5, 0.75}) {
            const CorrelationSet c = compute_correlations(g, g, eps);
            for (const auto& [l, v] : c.rho_ab) CHECK(c.ba(-l) == Approx(v).margin(1e-9));
        }
    }
    SECTION("retained tail honesty: everything beyond L is below threshold") {
        const CorrelationSet c = compute_correlations(g, g, 0.1);
        const int L = c.memory_length;
        for (int l = L + 1; l <= L + 6; ++l) {
            CHECK(std::abs(correlate_pulses(g, g, l - 0.1)) < 1e-6);
            CHECK(std::abs(correlate_pulses(g, g, -l - 0.1)) < 1e-6);
        }
    }
}

TEST_CASE("noise covariance structure") {
    const PulseShape g = PulseShape::rectangular();
    SECTION("rect eps = 0.5: the paper's printed blocks") {
        const NoiseCovariance nc = noise_covariance(compute_correlations(g, g, 0.5));
        REQUIRE(nc.L == 1);
        CHECK(nc.lambda(0)(0, 0) == Approx(1.0));
        CHECK(nc.lambda(0)(0, 1) == Approx(0.5));
        CHECK(nc.lambda(0)(1, 0) == Approx(0.5));
        // Lambda(1) = [[0, rho_ba(1)], [rho_ab(1), 0]] = [[0,0],[0.5,0]]
        CHECK(nc.lambda(1)(0, 1) == Approx(0.0).margin(1e-12));
        CHECK(nc.lambda(1)(1, 0) == Approx(0.5).margin(1e-12));
        CHECK(nc.lambda(1)(0, 0) == Approx(0.0).margin(1e-12));
        // Lambda(-l) = Lambda(l)^dagger
        CHECK((nc.lambda(-1) - nc.lambda(1).transpose()).norm() == Approx(0.0).margin(1e-15));
    }
    SECTION("eps = 0 is the degenerate superimposed channel") {
        const NoiseCovariance nc = noise_covariance(compute_correlations(g, g, 0.0));
        CHECK(nc.L == 0);
        CHECK(nc.lambda(0)(0, 1) == Approx(1.0));  // fully correlated filters
    }
    SECTION("block-Toeplitz assembly is positive semidefinite (64 blocks)") {
        for (double eps : {0.25, 0.5, 0.75}) {
            const NoiseCovariance nc = noise_covariance(compute_correlations(g, g, eps));
            const int m = 64;
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2 * m, 2 * m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    if (std::abs(i - j) <= nc.L) T.block<2, 2>(2 * i, 2 * j) = nc.corr(j - i);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            CHECK(es.eigenvalues().minCoeff() > -1e-9);
        }
    }
}

TEST_CASE("spectral factorization") {
    SECTION("scalar sanity case on the diagonal: 2 + z + z^{-1} = (1+z)(1+z^{-1})") {
        NoiseCovariance nc;
        nc.L = 1;
        nc.R.resize(2);
        nc.R[0] << 2, 0, 0, 1;
        nc.R[1] << 1, 0, 0, 0;
        const auto F = spectral_factorize(nc);
        REQUIRE(F.size() == 2);
        CHECK(F[0](0, 0) == Approx(1.0).margin(1e-6));
        CHECK(F[0](1, 1) == Approx(1.0).margin(1e-6));
        CHECK(F[0](1, 0) == Approx(0.0).margin(1e-6));
        CHECK(F[1](0, 0) == Approx(1.0).margin(1e-6));
        CHECK(F[1](1, 1) == Approx(0.0).margin(1e-6));
        CHECK(factorization_residual(nc, F) < 1e-8);
    }
    SECTION("rect eps = 0.5 analytic factor") {
        const PulseShape g = PulseShape::rectangular();
        const NoiseCovariance nc = noise_covariance(compute_correlations(g, g, 0.5));
        const auto F = spectral_factorize(nc);
        const double s = std::sqrt(0.5);
        REQUIRE(F.size() == 2);
        CHECK(F[0](0, 0) == Approx(s).margin(1e-6));
        CHECK(F[0](0, 1) == Approx(0.0).margin(1e-12));  // canonical lower-triangular
        CHECK(F[0](1, 0) == Approx(s).margin(1e-6));
        CHECK(F[0](1, 1) == Approx(s).margin(1e-6));
        CHECK(F[1](0, 1) == Approx(s).margin(1e-6));
        CHECK(std::abs(F[1](0, 0)) < 1e-8);  // no dependence on past A symbols
        CHECK(std::abs(F[1](1, 0)) < 1e-8);
        CHECK(std::abs(F[1](1, 1)) < 1e-6);
        CHECK(factorization_residual(nc, F) < 1e-8);
    }
    SECTION("residual gate over both pulse families") {
        for (double eps : {0.1, 0.5, 0.9}) {
            for (bool rect : {true, false}) {
                const PulseShape g = rect ? PulseShape::rectangular() : PulseShape::srrc(1.0);
                const NoiseCovariance nc = noise_covariance(compute_correlations(g, g, eps));
                const auto F = spectral_factorize(nc);
                CHECK(factorization_residual(nc, F) < 1e-8);
                CHECK(F[0](0, 0) > 0.0);
                CHECK(F[0](1, 1) > 0.0);
                CHECK(F[0](0, 1) == 0.0);
            }
        }
    }
    SECTION("degenerate eps = 0 factors with regularization") {
        const PulseShape g = PulseShape::rectangular();
        const NoiseCovariance nc = noise_covariance(compute_correlations(g, g, 0.0));
        const auto F = spectral_factorize(nc);
        // Superposition concentrates in one whitened component.
        CHECK(F[0](1, 0) == Approx(1.0).margin(1e-4));
        CHECK(F[0](1, 1) == Approx(1.0).margin(1e-4));
        CHECK(std::abs(F[0](0, 0)) < 1e-4);
    }
}

TEST_CASE("psi taps and linearity") {
    const PulseShape g = PulseShape::rectangular();
    const ChannelRealization ch = make_channel(g, 0.5, 0, cplx(1, 0), cplx(0, 1), 0.1);
    SECTION("gains folded into columns") {
        for (std::size_t l = 0; l < ch.taps.size(); ++l) {
            CHECK(ch.gtaps[l][0][0] == cplx(ch.taps[l](0, 0), 0.0));
            CHECK(ch.gtaps[l][0][1] == cplx(0, 1) * ch.taps[l](0, 1));
        }
    }
    SECTION("superposition to machine precision") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-1, 1);
        const int L = ch.memory();
        for (int t = 0; t < 50; ++t) {
            std::vector<std::array<double, 2>> w1(L + 1), w2(L + 1), ws(L + 1);
            for (int l = 0; l <= L; ++l) {
                w1[l] = {u(rng), u(rng)};
                w2[l] = {u(rng), u(rng)};
                ws[l] = {w1[l][0] + w2[l][0], w1[l][1] + w2[l][1]};
            }
            const Cvec2 y1 = psi_apply(ch.gtaps, w1), y2 = psi_apply(ch.gtaps, w2),
                        ysum = psi_apply(ch.gtaps, ws);
            for (int c = 0; c < 2; ++c) CHECK(std::abs(ysum[c] - y1[c] - y2[c]) < 1e-13);
        }
    }
    SECTION("all-(+1,+1) input gives constant tap-sum output") {
        const int n = 12;
        std::vector<std::uint8_t> za(n, 0), zb(n, 0);
        ChannelRealization noiseless = ch;
        noiseless.sigma2 = 0.0;
        std::mt19937_64 rng(1);
        const Observation obs = simulate_whitened(za, zb, noiseless, rng);
        Cvec2 expect{cplx(0, 0), cplx(0, 0)};
        for (std::size_t l = 0; l < ch.gtaps.size(); ++l)
            for (int c = 0; c < 2; ++c) expect[c] += ch.gtaps[l][c][0] + ch.gtaps[l][c][1];
        for (int k = ch.memory(); k < n; ++k)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(obs.r[k][c] - expect[c]) < 1e-12);
    }
}

TEST_CASE("whitened-domain simulation") {
    const PulseShape g = PulseShape::rectangular();
    SECTION("frame offset index audit (iota = 2, noiseless)") {
        const int n = 16;
        ChannelRealization ch = make_channel(g, 0.5, 2, cplx(1, 0), cplx(1, 0), 0.0);
        std::vector<std::uint8_t> a(n, 0), b(n, 0);
        b[5] = 1;  // flips x_b(5), which appears at receiver position 5 + iota
        std::mt19937_64 rng(1);
        const Observation obs = simulate_whitened(a, b, ch, rng);
        ChannelRealization ch0 = ch;
        ch0.iota = 0;
        std::vector<std::uint8_t> b0(n, 0);
        b0[7] = 1;  // same flip placed directly
        std::mt19937_64 rng2(1);
        const Observation ref = simulate_whitened(a, b0, ch0, rng2);
        // interior positions: the silent-guard edges differ by construction
        for (int k = 3; k < n; ++k)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(obs.r[k][c] - ref.r[k][c]) < 1e-12);
    }
    SECTION("degenerate synchronous channel carries the superposition") {
        const int n = 10;
        ChannelRealization ch = make_channel(g, 0.0, 0, cplx(1, 0), cplx(1, 0), 0.0);
        std::mt19937_64 rng(2);
        std::vector<std::uint8_t> a(n), b(n);
        for (int k = 0; k < n; ++k) {
            a[k] = static_cast<std::uint8_t>(rng() & 1);
            b[k] = static_cast<std::uint8_t>(rng() & 1);
        }
        const Observation obs = simulate_whitened(a, b, ch, rng);
        for (int k = 0; k < n; ++k) {
            CHECK(std::abs(obs.r[k][1] - (bpsk(a[k]) + bpsk(b[k]))) < 1e-4);
            CHECK(std::abs(obs.r[k][0]) < 1e-4);
        }
    }
}

TEST_CASE("matched-filter path agrees with the whitened path") {
    for (bool rect : {true, false}) {
        const PulseShape g = rect ? PulseShape::rectangular() : PulseShape::srrc(1.0);
        ChannelRealization ch = make_channel(g, 0.5, 0, cplx(1, 0), std::polar(1.0, 0.7), 0.0);
        const int n = 64;
        std::mt19937_64 rng(9);
        std::vector<std::uint8_t> a(n), b(n);
        for (int k = 0; k < n; ++k) {
            a[k] = static_cast<std::uint8_t>(rng() & 1);
            b[k] = static_cast<std::uint8_t>(rng() & 1);
        }
        std::mt19937_64 r1(5), r2(5);
        const Observation direct = simulate_whitened(a, b, ch, r1);
        const Observation via_mf = whiten(simulate_matched_filter_domain(a, b, ch, r2), ch.taps);
        const int L = ch.memory();
        for (int k = L; k < n - L; ++k)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(direct.r[k][c] - via_mf.r[k][c]) < 1e-9);
    }
}

TEST_CASE("whitened noise is white (moment smoke test)") {
    const PulseShape g = PulseShape::rectangular();
    ChannelRealization ch = make_channel(g, 0.5, 0, cplx(0, 0), cplx(0, 0), 0.37);
    const int n = 20000;
    std::vector<std::uint8_t> a(n, 0), b(n, 0);
    std::mt19937_64 rng(11);
    const Observation obs = whiten(simulate_matched_filter_domain(a, b, ch, rng), ch.taps);
    double v0 = 0, v1 = 0, cross_re = 0, cross_im = 0;
    const int lo = 2, hi = n - 2;
    for (int k = lo; k < hi; ++k) {
        v0 += std::norm(obs.r[k][0]);
        v1 += std::norm(obs.r[k][1]);
        const cplx c = obs.r[k][0] * std::conj(obs.r[k][1]);
        cross_re += c.real();
        cross_im += c.imag();
    }
    const double cnt = hi - lo;
    // (1/2) E|n_c|^2 = sigma2; standard error ~ sigma2 * sqrt(2/cnt)
    const double se = ch.sigma2 * std::sqrt(2.0 / cnt);
    CHECK(std::abs(v0 / (2 * cnt) - ch.sigma2) < 4 * se);
    CHECK(std::abs(v1 / (2 * cnt) - ch.sigma2) < 4 * se);
    CHECK(std::abs(cross_re / (2 * cnt)) < 4 * se);
    CHECK(std::abs(cross_im / (2 * cnt)) < 4 * se);
}

TEST_CASE("rectangular sufficient statistics") {
    const PulseShape g = PulseShape::rectangular();
    SECTION("noiseless all-zero bits give y_e = y_o = 2 in the interior") {
        ChannelRealization ch = make_channel(g, 0.5, 0, cplx(1, 0), cplx(1, 0), 0.0);
        const int n = 8;
        std::vector<std::uint8_t> a(n, 0), b(n, 0);
        std::mt19937_64 rng(3);
        const RectangularSamples s = rectangular_samples(a, b, ch, rng);
        for (int k = 1; k < n; ++k) {
            CHECK(std::abs(s.y_e[k] - cplx(2, 0)) < 1e-12);
            CHECK(std::abs(s.y_o[k] - cplx(2, 0)) < 1e-12);
        }
    }
    SECTION("reconstruction identity matches the matched-filter outputs") {
        for (double eps : {0.5, 0.3}) {
            ChannelRealization ch =
                make_channel(g, eps, 0, std::polar(1.0, 0.2), std::polar(1.0, 1.1), 0.0);
            const int n = 40;
            std::mt19937_64 rng(8);
            std::vector<std::uint8_t> a(n), b(n);
            for (int k = 0; k < n; ++k) {
                a[k] = static_cast<std::uint8_t>(rng() & 1);
                b[k] = static_cast<std::uint8_t>(rng() & 1);
            }
            std::mt19937_64 r1(8), r2(8);
            const RectangularSamples s = rectangular_samples(a, b, ch, r1);
            const std::vector<Cvec2> y = simulate_matched_filter_domain(a, b, ch, r2);
            for (int k = 0; k < n - 1; ++k) {
                const cplx ya = eps * s.y_e[k] + (1 - eps) * s.y_o[k];
                const cplx yb = (1 - eps) * s.y_o[k] + eps * s.y_e[k + 1];
                CHECK(std::abs(ya - y[k][0]) < 1e-12);
                CHECK(std::abs(yb - y[k][1]) < 1e-12);
            }
        }
    }
    SECTION("noise variance ratio var(w_e)/var(w_o) = (1-eps)/eps") {
        const double eps = 0.3;
        ChannelRealization ch = make_channel(g, eps, 0, cplx(0, 0), cplx(0, 0), 0.5);
        const int n = 100000;
        std::vector<std::uint8_t> a(n, 0), b(n, 0);
        std::mt19937_64 rng(17);
        const RectangularSamples s = rectangular_samples(a, b, ch, rng);
        double ve = 0, vo = 0;
        for (int k = 0; k < n; ++k) {
            ve += std::norm(s.y_e[k]);
            vo += std::norm(s.y_o[k]);
        }
        const double ratio = ve / vo;
        const double expect = (1 - eps) / eps;
        CHECK(std::abs(ratio - expect) < 5 * expect * std::sqrt(2.0 / n));
    }
    SECTION("degenerate sampling eps = 0 rejected") {
        ChannelRealization ch = make_channel(g, 0.0, 0, cplx(1, 0), cplx(1, 0), 0.1);
        std::vector<std::uint8_t> a(4, 0), b(4, 0);
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(rectangular_samples(a, b, ch, rng), std::invalid_argument);
    }
}
