// Monte-Carlo BER simulator for LDPC-coded physical-layer network coding
// over the symbol/frame-asynchronous two-user MAC.

#include <CLI11.hpp>
#include <iostream>

#include "pnc/simharness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pncsim: decode-at-relay PNC simulation over asynchronous two-user MACs"};

    std::string code_spec = "mn-regular";
    int n = 1008;
    std::uint64_t seed = 1;
    std::string pulse = "srrc";
    double rolloff = 1.0;
    bool rolloff_set = false;
    double eps = 0.5;
    int iota_max = 0;
    std::string iota_spec = "fixed:0";
    double delta_theta = 0.0;
    std::string decoder = "gspa";
    int outer = 4, inner = 5;
    std::string ebn0 = "2.0:4.0:0.5";
    int frames = 10000;
    int max_frame_errors = 100;
    std::string channel = "whitened";
    std::string crc = "off";
    std::string out = "ber.csv";
    std::string genpoly;
    int threads = 0;

    app.add_option("--code", code_spec, "mn-regular | cyclic-eg | alist:<path>");
    app.add_option("--n", n, "block length (mn-regular: any multiple of 2; cyclic-eg: 15/63/255)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--pulse", pulse, "rect | srrc")->check(CLI::IsMember({"rect", "srrc"}));
    auto* ro = app.add_option("--rolloff", rolloff, "SRRC roll-off beta");
    app.add_option("--eps", eps, "symbol misalignment in [0,1)");
    app.add_option("--iota-max", iota_max, "frame-offset bound (erased guard per side)");
    app.add_option("--iota", iota_spec, "fixed:<v> | random");
    app.add_option("--delta-theta", delta_theta, "carrier offset theta_b - theta_a (radians)");
    app.add_option("--decoder", decoder, "gspa | jcnc")->check(CLI::IsMember({"gspa", "jcnc"}));
    app.add_option("--outer", outer, "outer (detector) iterations");
    app.add_option("--inner", inner, "inner (LDPC) iterations per outer round");
    app.add_option("--ebn0", ebn0, "start:stop:step or comma list, in dB");
    app.add_option("--frames", frames, "frame budget per point");
    app.add_option("--max-frame-errors", max_frame_errors, "early-stop frame-error budget");
    app.add_option("--channel", channel, "whitened | matched")
        ->check(CLI::IsMember({"whitened", "matched"}));
    app.add_option("--crc", crc, "on | off")->check(CLI::IsMember({"on", "off"}));
    app.add_option("--out", out, "output CSV path (manifest written alongside)");
    app.add_option("--genpoly", genpoly, "generator polynomial file for cyclic alist codes");
    app.add_option("--threads", threads, "worker threads (default: hardware)");

    CLI11_PARSE(app, argc, argv);
    rolloff_set = ro->count() > 0;

    try {
        pnc::SimConfig cfg;
        if (code_spec == "mn-regular") {
            cfg.code = pnc::CodeKind::MnRegular;
        } else if (code_spec == "cyclic-eg") {
            cfg.code = pnc::CodeKind::CyclicEg;
        } else if (code_spec.rfind("alist:", 0) == 0) {
            cfg.code = pnc::CodeKind::Alist;
            cfg.alist_path = code_spec.substr(6);
        } else {
            throw std::invalid_argument("unknown --code: " + code_spec);
        }
        cfg.n = n;
        cfg.seed = seed;
        if (pulse == "rect") {
            if (rolloff_set)
                throw std::invalid_argument("--rolloff applies to the srrc pulse only");
            cfg.pulse = pnc::PulseShape::Kind::Rectangular;
        } else {
            cfg.pulse = pnc::PulseShape::Kind::Srrc;
            cfg.rolloff = rolloff;
        }
        cfg.epsilon = eps;
        cfg.iota_max = iota_max;
        if (iota_spec == "random") {
            cfg.iota_mode = pnc::IotaMode::Random;
        } else if (iota_spec.rfind("fixed:", 0) == 0) {
            cfg.iota_mode = pnc::IotaMode::Fixed;
            cfg.iota_fixed = std::stoi(iota_spec.substr(6));
        } else {
            throw std::invalid_argument("bad --iota (use fixed:<v> or random): " + iota_spec);
        }
        cfg.delta_theta = delta_theta;
        cfg.decoder = decoder == "gspa" ? pnc::DecoderKind::Gspa : pnc::DecoderKind::Jcnc;
        cfg.outer = outer;
        cfg.inner = inner;
        cfg.ebn0_db = pnc::parse_ebn0(ebn0);
        cfg.frames = frames;
        cfg.max_frame_errors = max_frame_errors;
        cfg.channel = channel == "whitened" ? pnc::ChannelPath::Whitened : pnc::ChannelPath::Matched;
        cfg.crc_enabled = crc == "on";
        cfg.genpoly_path = genpoly;
        cfg.out_csv = out;

        pnc::validate_config(cfg);
        const pnc::CodeBundle code = pnc::build_code(cfg);
        std::cerr << "code: n=" << code.h.n << " m=" << code.h.m << " k=" << code.gen.k
                  << (code.h.is_cyclic ? " (cyclic)" : "") << "\n";

        pnc::SweepResult res;
        res.csv = pnc::csv_header() + "\n";
        for (int s = 0; s < (int)cfg.ebn0_db.size(); ++s) {
            const pnc::BerPoint pt = pnc::run_point(cfg, code, s, threads);
            res.points.push_back(pt);
            res.csv += pnc::csv_row(pt) + "\n";
            std::cerr << "ebn0=" << pt.ebn0_db << " dB: frames=" << pt.frames_run
                      << " ber=" << pt.xor_ber << " fer=" << pt.fer << "\n";
        }
        pnc::write_outputs(cfg, code, res, cfg.out_csv);
        std::cout << res.csv;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
