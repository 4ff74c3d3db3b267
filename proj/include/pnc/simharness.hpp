// Monte-Carlo driver: per-frame trial pipeline, BER/FER aggregation over an
// Eb/N0 sweep, CSV + manifest emission. Frames are deterministic functions
// of (master seed, snr index, frame index), so runs split/merge exactly and
// frames parallelize over a worker pool with order-independent aggregation.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "detector.hpp"
#include "framesync.hpp"
#include "gf4.hpp"
#include "jointdec.hpp"
#include "ldpc.hpp"
#include "macchannel.hpp"

namespace pnc {

enum class CodeKind { MnRegular, CyclicEg, Alist };
enum class DecoderKind { Gspa, Jcnc };
enum class ChannelPath { Whitened, Matched };
enum class IotaMode { Fixed, Random };

struct SimConfig {
    CodeKind code = CodeKind::MnRegular;
    int n = 1008;
    std::string alist_path;
    std::string genpoly_path;

    PulseShape::Kind pulse = PulseShape::Kind::Srrc;
    double rolloff = 1.0;

    DecoderKind decoder = DecoderKind::Gspa;
    std::vector<double> ebn0_db;
    int frames = 10000;
    int max_frame_errors = 100;

    double epsilon = 0.5;
    IotaMode iota_mode = IotaMode::Fixed;
    int iota_fixed = 0;
    int iota_max = 0;
    double delta_theta = 0.0;

    int outer = 4;
    int inner = 5;
    std::uint64_t seed = 1;
    ChannelPath channel = ChannelPath::Whitened;
    bool crc_enabled = false;
    BoundaryMode boundary = BoundaryMode::SilentGuard;
    std::string out_csv;
};

struct BerPoint {
    double ebn0_db = 0.0;
    long frames_run = 0;
    long xor_bit_errors = 0;
    double xor_ber = 0.0;
    long frame_errors = 0;
    double fer = 0.0;
    double mean_outer_iters = 0.0;
    double mean_inner_iters = 0.0;
    long delay_res_attempts = 0;
    long delay_res_success = 0;
};

struct FrameOutcome {
    int bit_errors = 0;
    bool frame_error = false;
    bool converged = false;
    int outer_iters = 0;
    int inner_iters = 0;
    bool res_attempted = false;
    bool res_success = false;
};

struct CodeBundle {
    ParityCheckMatrix h;
    GeneratorForm gen;
};

inline double ebn0_to_sigma2(double ebn0_db, double rate) {
    if (rate <= 0.0 || rate > 1.0) throw std::invalid_argument("ebn0_to_sigma2: rate out of (0,1]");
    return 1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
}

inline void validate_config(const SimConfig& cfg) {
    if (cfg.frames < 1) throw std::invalid_argument("config: frames must be >= 1");
    if (cfg.outer < 1 || cfg.inner < 1) throw std::invalid_argument("config: schedule must be >= 1");
    if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0) throw std::invalid_argument("config: epsilon in [0,1)");
    if (cfg.ebn0_db.empty()) throw std::invalid_argument("config: no Eb/N0 points");
    if (cfg.iota_max < 0) throw std::invalid_argument("config: iota_max must be >= 0");
    if (cfg.iota_mode == IotaMode::Fixed && std::abs(cfg.iota_fixed) > cfg.iota_max)
        throw std::invalid_argument("config: |iota| exceeds iota_max");
    if (cfg.code == CodeKind::Alist && cfg.alist_path.empty())
        throw std::invalid_argument("config: alist code requires a path");
}

inline CodeBundle build_code(const SimConfig& cfg) {
    CodeBundle b;
    switch (cfg.code) {
        case CodeKind::MnRegular:
            b.h = build_regular_code(cfg.n, 3, 6, 6, cfg.seed);
            break;
        case CodeKind::CyclicEg: {
            int s;
            switch (cfg.n) {
                case 15: s = 2; break;
                case 63: s = 3; break;
                case 255: s = 4; break;
                default:
                    throw std::invalid_argument("config: cyclic-eg supports n in {15, 63, 255}");
            }
            b.h = build_cyclic_eg_code(s);
            break;
        }
        case CodeKind::Alist:
            b.h = load_alist_file(cfg.alist_path);
            if (!cfg.genpoly_path.empty()) {
                b.h.genpoly = load_genpoly_file(cfg.genpoly_path);
                b.h.is_cyclic = true;
            }
            break;
    }
    b.gen = make_generator(b.h);
    const bool needs_cyclic =
        cfg.iota_mode == IotaMode::Random || (cfg.iota_mode == IotaMode::Fixed && cfg.iota_fixed != 0);
    if (needs_cyclic && !b.h.is_cyclic)
        throw std::invalid_argument("config: nonzero frame offsets require a cyclic code");
    if (cfg.crc_enabled && b.gen.k <= 16)
        throw std::invalid_argument("config: CRC framing needs message length > 16");
    if (2 * cfg.iota_max >= b.h.n) throw std::invalid_argument("config: iota_max too large for block length");
    return b;
}

inline std::uint64_t derive_frame_seed(std::uint64_t master, int snr_idx, long frame_idx) {
    using detail::splitmix64;
    return splitmix64(splitmix64(master ^ (0x51ed2700215566f1ull * (snr_idx + 1))) ^
                      (0xc2b2ae3d27d4eb4full * static_cast<std::uint64_t>(frame_idx + 1)));
}

// One Monte-Carlo frame. `point_ch` carries the taps and sigma2 for this
// Eb/N0 point; the frame offset is drawn here and applied to a local copy.
inline FrameOutcome run_trial(const SimConfig& cfg, const CodeBundle& code,
                              const ChannelRealization& point_ch, const BMac& bmac, int snr_idx,
                              long frame_idx) {
    std::mt19937_64 rng(derive_frame_seed(cfg.seed, snr_idx, frame_idx));
    const int k = code.gen.k;
    const int msg_len = cfg.crc_enabled ? k - 16 : k;
    std::uniform_int_distribution<int> bit(0, 1);

    std::vector<std::uint8_t> msg_a(msg_len), msg_b(msg_len);
    for (auto& v : msg_a) v = static_cast<std::uint8_t>(bit(rng));
    for (auto& v : msg_b) v = static_cast<std::uint8_t>(bit(rng));
    const Codeword c_a = encode(code.gen, cfg.crc_enabled ? crc16_append(msg_a).bits : msg_a);
    const Codeword c_b = encode(code.gen, cfg.crc_enabled ? crc16_append(msg_b).bits : msg_b);

    int iota = cfg.iota_fixed;
    if (cfg.iota_mode == IotaMode::Random)
        iota = std::uniform_int_distribution<int>(-cfg.iota_max, cfg.iota_max)(rng);

    ChannelRealization ch = point_ch;
    ch.iota = iota;
    Observation obs;
    if (cfg.channel == ChannelPath::Whitened) {
        obs = simulate_whitened(c_a, c_b, ch, rng);
    } else {
        obs = whiten(simulate_matched_filter_domain(c_a, c_b, ch, rng), ch.taps);
    }
    if (cfg.iota_max > 0) obs = zero_pad_interference(std::move(obs), cfg.iota_max);

    DecodeResult dec;
    if (cfg.decoder == DecoderKind::Gspa) {
        dec = log_g_spa(
            code.h, [&](const std::vector<LlrVec4>& pri) { return bmac.run(obs, pri); }, cfg.outer,
            cfg.inner);
    } else {
        const ApSequence ap = bmac.run_uniform(obs);
        dec = jcnc_decode(code.h, ap.posteriors, cfg.outer * cfg.inner);
    }
    if (dec.converged && !syndrome_ok(code.h, dec.xor_codeword))
        throw std::logic_error("run_trial: converged result violates the parity checks");

    const Codeword c_b_shifted = cyclic_shift(c_b, iota);
    FrameOutcome out;
    out.converged = dec.converged;
    out.outer_iters = dec.outer_iters_used;
    out.inner_iters = dec.inner_iters_used;
    for (int j = 0; j < code.h.n; ++j)
        out.bit_errors += dec.xor_codeword[j] != (std::uint8_t)(c_a[j] ^ c_b_shifted[j]);
    out.frame_error = out.bit_errors > 0;

    // Delay resolution runs only on parity-clean pair decisions (the
    // "error-free" gate) when CRC framing is active.
    if (cfg.crc_enabled && code.h.is_cyclic && dec.has_pair && dec.converged &&
        syndrome_ok(code.h, dec.part_a) && syndrome_ok(code.h, dec.part_b)) {
        out.res_attempted = true;
        const DelayResolution res = resolve_delay_crc(dec.part_b, code.gen, cfg.iota_max);
        out.res_success = res.ok && res.iota == iota;
    }
    return out;
}

inline ChannelRealization make_point_channel(const SimConfig& cfg, double rate, double ebn0_db) {
    const PulseShape pulse = cfg.pulse == PulseShape::Kind::Rectangular
                                 ? PulseShape::rectangular()
                                 : PulseShape::srrc(cfg.rolloff);
    const cplx h_b = std::polar(1.0, cfg.delta_theta);
    return make_channel(pulse, cfg.epsilon, cfg.iota_fixed, cplx(1.0, 0.0), h_b,
                        ebn0_to_sigma2(ebn0_db, rate), cfg.boundary);
}

inline BerPoint run_point(const SimConfig& cfg, const CodeBundle& code, int snr_idx,
                          int n_threads = 0) {
    const double rate = static_cast<double>(code.gen.k) / code.h.n;
    const ChannelRealization ch = make_point_channel(cfg, rate, cfg.ebn0_db[snr_idx]);
    const BMac bmac = BMac::make_auto(ch);

    BerPoint pt;
    pt.ebn0_db = cfg.ebn0_db[snr_idx];
    if (n_threads <= 0) {
        const unsigned hc = std::thread::hardware_concurrency();
        n_threads = hc == 0 ? 1 : static_cast<int>(hc);
    }
    const long chunk = std::max<long>(16, 8L * n_threads);
    long done = 0;
    double outer_sum = 0.0, inner_sum = 0.0;
    while (done < cfg.frames && pt.frame_errors < cfg.max_frame_errors) {
        const long hi = std::min<long>(cfg.frames, done + chunk);
        std::vector<FrameOutcome> outs(hi - done);
        std::atomic<long> next(done);
        auto worker = [&]() {
            for (;;) {
                const long idx = next.fetch_add(1);
                if (idx >= hi) return;
                outs[idx - done] = run_trial(cfg, code, ch, bmac, snr_idx, idx);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
        for (const auto& o : outs) {
            pt.xor_bit_errors += o.bit_errors;
            pt.frame_errors += o.frame_error ? 1 : 0;
            outer_sum += o.outer_iters;
            inner_sum += o.inner_iters;
            pt.delay_res_attempts += o.res_attempted ? 1 : 0;
            pt.delay_res_success += o.res_success ? 1 : 0;
        }
        done = hi;
    }
    pt.frames_run = done;
    pt.xor_ber = static_cast<double>(pt.xor_bit_errors) / (static_cast<double>(done) * code.h.n);
    pt.fer = static_cast<double>(pt.frame_errors) / static_cast<double>(done);
    pt.mean_outer_iters = outer_sum / static_cast<double>(done);
    pt.mean_inner_iters = inner_sum / static_cast<double>(done);
    return pt;
}

inline std::string csv_header() {
    return "ebn0_db,frames,xor_bit_errors,xor_ber,frame_errors,fer,mean_outer_iters,mean_inner_iters,"
           "delay_res_attempts,delay_res_success";
}

inline std::string csv_row(const BerPoint& p) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%.6g,%ld,%ld,%.10g,%ld,%.10g,%.10g,%.10g,%ld,%ld", p.ebn0_db,
                  p.frames_run, p.xor_bit_errors, p.xor_ber, p.frame_errors, p.fer, p.mean_outer_iters,
                  p.mean_inner_iters, p.delay_res_attempts, p.delay_res_success);
    return buf;
}

struct SweepResult {
    std::vector<BerPoint> points;
    std::string csv;
};

inline SweepResult sweep(const SimConfig& cfg, int n_threads = 0) {
    validate_config(cfg);
    const CodeBundle code = build_code(cfg);
    SweepResult res;
    res.csv = csv_header() + "\n";
    for (int s = 0; s < (int)cfg.ebn0_db.size(); ++s) {
        res.points.push_back(run_point(cfg, code, s, n_threads));
        res.csv += csv_row(res.points.back()) + "\n";
    }
    return res;
}

// Atomic CSV write plus an adjacent manifest recording the resolved
// configuration, seed, code dimensions and a hash of H. The timestamp lives
// only here so CSV bytes stay reproducible.
inline void write_outputs(const SimConfig& cfg, const CodeBundle& code, const SweepResult& res,
                          const std::string& csv_path) {
    {
        std::ofstream f(csv_path + ".tmp");
        if (!f) throw std::runtime_error("cannot write CSV: " + csv_path);
        f << res.csv;
    }
    if (std::rename((csv_path + ".tmp").c_str(), csv_path.c_str()) != 0)
        throw std::runtime_error("cannot finalize CSV: " + csv_path);

    auto q = [](const std::string& s) { return "\"" + s + "\""; };
    std::ofstream m(csv_path + ".manifest.json");
    if (!m) throw std::runtime_error("cannot write manifest for: " + csv_path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(code.h.structure_hash()));
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    m << "{\n";
    m << "  \"code\": " << q(cfg.code == CodeKind::MnRegular ? "mn-regular"
                             : cfg.code == CodeKind::CyclicEg ? "cyclic-eg"
                                                              : "alist:" + cfg.alist_path)
      << ",\n";
    m << "  \"n\": " << code.h.n << ",\n  \"m\": " << code.h.m << ",\n  \"k\": " << code.gen.k << ",\n";
    m << "  \"h_hash\": " << q(hash) << ",\n";
    m << "  \"pulse\": " << q(cfg.pulse == PulseShape::Kind::Rectangular ? "rect" : "srrc") << ",\n";
    m << "  \"rolloff\": " << cfg.rolloff << ",\n";
    m << "  \"decoder\": " << q(cfg.decoder == DecoderKind::Gspa ? "gspa" : "jcnc") << ",\n";
    m << "  \"epsilon\": " << cfg.epsilon << ",\n";
    m << "  \"iota_mode\": " << q(cfg.iota_mode == IotaMode::Random ? "random" : "fixed") << ",\n";
    m << "  \"iota_fixed\": " << cfg.iota_fixed << ",\n  \"iota_max\": " << cfg.iota_max << ",\n";
    m << "  \"delta_theta\": " << cfg.delta_theta << ",\n";
    m << "  \"outer\": " << cfg.outer << ",\n  \"inner\": " << cfg.inner << ",\n";
    m << "  \"frames\": " << cfg.frames << ",\n  \"max_frame_errors\": " << cfg.max_frame_errors << ",\n";
    m << "  \"channel\": " << q(cfg.channel == ChannelPath::Whitened ? "whitened" : "matched") << ",\n";
    m << "  \"crc\": " << (cfg.crc_enabled ? "true" : "false") << ",\n";
    m << "  \"seed\": " << cfg.seed << ",\n";
    m << "  \"ebn0_db\": [";
    for (std::size_t i = 0; i < cfg.ebn0_db.size(); ++i)
        m << cfg.ebn0_db[i] << (i + 1 < cfg.ebn0_db.size() ? ", " : "");
    m << "],\n";
    m << "  \"timestamp_us\": "
      << std::chrono::duration_cast<std::chrono::microseconds>(now).count() << "\n";
    m << "}\n";
}

// "start:stop:step" or a comma-separated list.
inline std::vector<double> parse_ebn0(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double start, stop, step;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0.0)
            throw std::invalid_argument("bad Eb/N0 range: " + spec);
        for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
    } else {
        std::size_t pos = 0;
        while (pos < spec.size()) {
            std::size_t comma = spec.find(',', pos);
            if (comma == std::string::npos) comma = spec.size();
            out.push_back(std::stod(spec.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (out.empty()) throw std::invalid_argument("empty Eb/N0 list");
    return out;
}

}  // namespace pnc
