// subcyclo command line: generate, sample, recover, detect, experiment, selftest.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subcyclo/correlation.hpp"
#include "subcyclo/cyclic_spectrum.hpp"
#include "subcyclo/detect.hpp"
#include "subcyclo/harness.hpp"
#include "subcyclo/io.hpp"
#include "subcyclo/layout.hpp"
#include "subcyclo/recovery.hpp"
#include "subcyclo/sampler.hpp"
#include "subcyclo/signal.hpp"

using namespace subcyclo;

namespace {

struct GenerateArgs {
    std::string config, out;
    std::vector<double> carriers;
    double bandwidth = 18e6, gamma = 0.1, nyquist = 1e9, duration = 0;
    std::optional<double> snr;
    std::string modulation = "bpsk";
    std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& a) {
    SignalConfig cfg;
    if (!a.config.empty()) {
        cfg = io::signal_config_from_json(io::read_json(a.config));
    } else {
        cfg.nyquist_rate_hz = a.nyquist;
        cfg.duration_s = a.duration;
        cfg.rng_seed = a.seed;
        cfg.snr_db = a.snr;
        for (double f : a.carriers)
            cfg.transmissions.push_back(
                make_transmission(f, a.bandwidth, a.gamma, modulation_from_string(a.modulation)));
    }
    validate(cfg);
    io::write_signal(compose_signal(cfg), a.out);
    io::write_json(io::to_json(cfg), a.out + ".config.json");
    std::printf("wrote %s.f64 (%zu samples)\n", a.out.c_str(), sample_count(cfg));
    return 0;
}

struct SampleArgs {
    std::string signal, front_end, out, kind = "mwc";
    int slices = 43, channels = 10;
    std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& a) {
    const NyquistSignal x = io::read_signal(a.signal);
    FrontEnd fe;
    if (!a.front_end.empty())
        fe = io::front_end_from_json(io::read_json(a.front_end));
    else if (a.kind == "mwc")
        fe = random_mwc_config(a.slices, a.channels, x.rate_hz / a.slices, a.seed);
    else if (a.kind == "multicoset")
        fe = random_multicoset_config(a.slices, a.channels, a.seed);
    else
        throw ConfigError("--kind must be mwc or multicoset");
    const ChannelSamples z = simulate_sampling(x, fe);
    io::write_channels(z, fe, a.out);
    std::printf("wrote %s.c64 (M=%d, L=%zu, f_s=%.6g Hz)\n", a.out.c_str(), z.m(), z.length(), z.f_s);
    return 0;
}

struct RecoverArgs {
    std::string channels, recovery, out;
    int p = 100, q = 60, k = 0;
};

int cmd_recover(const RecoverArgs& a) {
    FrontEnd fe;
    const ChannelSamples z = io::read_channels(a.channels, &fe);
    RecoveryOptions opts;
    if (!a.recovery.empty()) opts = io::recovery_from_json(io::read_json(a.recovery));
    if (a.k > 0) opts.k = a.k;
    if (opts.k < 1) throw ConfigError("band count K required (--k or recovery config)");
    const CorrelationTensor t = shifted_correlation(spectral_frames(z, a.p, a.q));
    const SensingMatrix s = sensing_matrix(fe, z.nyquist_rate_hz);
    const StructuredOperator op = build_operator(s, selection_layout(s.n_slices));
    const RecoveredSlices rec = recover_slices(t, op, opts);
    const CyclicSpectrumGrid g = assemble(rec, op.layout, grid_meta(t));
    io::write_tensor(t, a.out + ".rz");
    io::write_recovered(rec, op.layout, a.out + ".rx");
    io::write_json(io::support_json(rec), a.out + ".support.json");
    io::write_grid(g, a.out + ".grid");
    export_grid_csv(g, a.out + ".grid.csv");
    std::printf("recovered %zu shifts, %zu grid cells, %d flagged pieces\n", rec.shifts.size(), g.size(),
                rec.flagged_pieces());
    return 0;
}

struct DetectArgs {
    std::string grid, params, out;
};

int cmd_detect(const DetectArgs& a) {
    const CyclicSpectrumGrid g = io::read_grid(a.grid);
    DetectParams p;
    if (!a.params.empty()) p = io::detect_params_from_json(io::read_json(a.params));
    const DetectionReport rep = detect_transmissions(g, p);
    const auto j = io::to_json(rep);
    if (a.out.empty())
        std::cout << j.dump(2) << "\n";
    else
        io::write_json(j, a.out);
    return 0;
}

struct ExperimentArgs {
    std::string config, out = "results";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials, workers;
    std::vector<std::string> snr;
    std::vector<int> channels, p;
    std::string detector, kind;
};

int cmd_experiment(const ExperimentArgs& a) {
    nlohmann::json j = a.config.empty() ? nlohmann::json::object() : io::read_json(a.config);
    ExperimentConfig cfg = io::experiment_from_json(j);
    cfg.master_seed = *a.seed;
    if (a.trials) cfg.sweep.trials = *a.trials;
    if (a.workers) cfg.workers = *a.workers;
    if (!a.snr.empty()) {
        cfg.sweep.snr_db.clear();
        for (const auto& s : a.snr) {
            if (s == "inf" || s == "none")
                cfg.sweep.snr_db.push_back(std::nullopt);
            else
                try {
                    cfg.sweep.snr_db.push_back(std::stod(s));
                } catch (const std::exception&) {
                    throw ConfigError("bad --snr value '" + s + "'");
                }
        }
    }
    if (!a.channels.empty()) cfg.sweep.channels = a.channels;
    if (!a.p.empty()) cfg.sweep.p = a.p;
    if (!a.detector.empty()) cfg.detector = detector_from_string(a.detector);
    if (!a.kind.empty()) cfg.kind = experiment_kind_from_string(a.kind);
    validate(cfg);
    io::write_json(io::to_json(cfg), a.out + ".config.json");
    if (cfg.kind == ExperimentKind::Roc) {
        const auto series = run_roc(cfg);
        emit_roc(series, a.out);
        for (const auto& s : series)
            std::printf("snr=%s M=%d P=%d %-6s pd@pfa0.1=%.3f\n",
                        s.point.snr_db ? std::to_string(*s.point.snr_db).c_str() : "inf", s.point.channels,
                        s.point.p, s.detector.c_str(), pd_at_pfa(s.curve, 0.1));
        return 0;
    }
    const MetricsTable table = run_monte_carlo(cfg);
    emit_results(table, a.out);
    for (const auto& r : table.rows)
        std::printf("snr=%s M=%d P=%d %-6s pd=%.3f fa=%.3f failures=%d\n",
                    r.point.snr_db ? std::to_string(*r.point.snr_db).c_str() : "inf", r.point.channels, r.point.p,
                    r.detector.c_str(), r.pd, r.mean_false_alarms, r.failures);
    return 0;
}

// Quick end-to-end sanity run on small noiseless scenes.
int cmd_selftest() {
    int bad = 0;
    auto check = [&](bool ok, const char* what) {
        std::printf("%s %s\n", ok ? "ok  " : "FAIL", what);
        bad += !ok;
    };
    const RateBound rb = min_rate_bounds(3, 18e6, 1e9, 1e9 / 43, true);
    check(std::abs(rb.f_min - 172.8e6) < 1 && rb.m_min == 10, "sparse rate bound");

    ExperimentConfig cfg;
    cfg.scenario.carriers_hz = {163.18e6, 209.69e6, 396.12e6};
    cfg.sweep.trials = 1;
    cfg.sweep.channels = {12};
    cfg.sweep.p = {20};
    cfg.detector = DetectorChoice::Cyclo;
    cfg.master_seed = 1;
    const TrialResult r = run_trial(cfg, sweep_points(cfg).front(), 0);
    check(r.error.empty() && r.cyclo, "pipeline runs");
    if (r.cyclo) {
        const Match m = match_report(r.carriers_hz, *r.cyclo, 10 * r.delta);
        check(m.detected == 3, "noiseless three-carrier scene detected");
        std::printf("     false alarms: %d\n", m.false_alarms);
    }
    return bad ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyclic spectrum recovery from sub-Nyquist samples"};
    app.require_subcommand(1);

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "synthesize a multiband signal on the Nyquist grid");
    gen->add_option("--config", ga.config, "SignalConfig JSON");
    gen->add_option("--carrier", ga.carriers, "carrier frequencies in Hz");
    gen->add_option("--bandwidth", ga.bandwidth, "band width in Hz");
    gen->add_option("--excess-bandwidth", ga.gamma, "roll-off");
    gen->add_option("--modulation", ga.modulation, "am, bpsk or qam");
    gen->add_option("--nyquist", ga.nyquist, "Nyquist rate in Hz");
    gen->add_option("--duration", ga.duration, "seconds");
    gen->add_option("--snr", ga.snr, "dB; omit for noiseless");
    gen->add_option("--seed", ga.seed, "rng seed");
    gen->add_option("--out", ga.out, "output stem")->required();

    SampleArgs sa;
    auto* smp = app.add_subcommand("sample", "run a front end over a stored signal");
    smp->add_option("--signal", sa.signal, "signal stem")->required();
    smp->add_option("--front-end", sa.front_end, "front end JSON");
    smp->add_option("--kind", sa.kind, "mwc or multicoset (random front end)");
    smp->add_option("--slices", sa.slices, "N");
    smp->add_option("--channels", sa.channels, "M");
    smp->add_option("--seed", sa.seed, "front end seed");
    smp->add_option("--out", sa.out, "output stem")->required();

    RecoverArgs ra;
    auto* rec = app.add_subcommand("recover", "estimate correlations and recover the cyclic spectrum");
    rec->add_option("--channels", ra.channels, "channel samples stem")->required();
    rec->add_option("--recovery", ra.recovery, "recovery options JSON");
    rec->add_option("-P,--windows", ra.p, "windows P");
    rec->add_option("-Q,--bins", ra.q, "bins per slice Q");
    rec->add_option("--k", ra.k, "band count K");
    rec->add_option("--out", ra.out, "output stem")->required();

    DetectArgs da;
    auto* det = app.add_subcommand("detect", "estimate carriers and widths from a stored grid");
    det->add_option("--grid", da.grid, "grid stem")->required();
    det->add_option("--params", da.params, "detection parameters JSON");
    det->add_option("--out", da.out, "report JSON (stdout if omitted)");

    ExperimentArgs ea;
    auto* exp = app.add_subcommand("experiment", "Monte-Carlo sweep");
    exp->add_option("--config", ea.config, "ExperimentConfig JSON");
    exp->add_option("--seed", ea.seed, "master seed")->required();
    exp->add_option("--trials", ea.trials, "trials per point");
    exp->add_option("--workers", ea.workers, "worker threads");
    exp->add_option("--snr", ea.snr, "SNR list in dB, 'inf' for noiseless");
    exp->add_option("--channels", ea.channels, "channel counts");
    exp->add_option("--windows", ea.p, "window counts P");
    exp->add_option("--detector", ea.detector, "cyclo, energy or both");
    exp->add_option("--kind", ea.kind, "detection or roc");
    exp->add_option("--out", ea.out, "output stem");

    auto* st = app.add_subcommand("selftest", "small end-to-end checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*gen) return cmd_generate(ga);
        if (*smp) return cmd_sample(sa);
        if (*rec) return cmd_recover(ra);
        if (*det) return cmd_detect(da);
        if (*exp) return cmd_experiment(ea);
        if (*st) return cmd_selftest();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
