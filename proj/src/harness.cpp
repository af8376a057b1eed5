#include "subcyclo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "subcyclo/correlation.hpp"
#include "subcyclo/layout.hpp"

namespace subcyclo {

std::string to_string(DetectorChoice d) {
    switch (d) {
        case DetectorChoice::Cyclo: return "cyclo";
        case DetectorChoice::Energy: return "energy";
        case DetectorChoice::Both: return "both";
    }
    return "both";
}

DetectorChoice detector_from_string(const std::string& s) {
    if (s == "cyclo") return DetectorChoice::Cyclo;
    if (s == "energy") return DetectorChoice::Energy;
    if (s == "both") return DetectorChoice::Both;
    throw ConfigError("unknown detector '" + s + "' (cyclo, energy, both)");
}

std::string to_string(ExperimentKind k) { return k == ExperimentKind::Roc ? "roc" : "detection"; }

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "detection") return ExperimentKind::Detection;
    if (s == "roc") return ExperimentKind::Roc;
    throw ConfigError("unknown experiment kind '" + s + "' (detection, roc)");
}

void validate(const ExperimentConfig& cfg) {
    const auto& sw = cfg.sweep;
    if (sw.trials < 1) throw ConfigError("trials must be >= 1");
    if (sw.snr_db.empty() || sw.channels.empty() || sw.p.empty()) throw ConfigError("sweep axes must be non-empty");
    if (sw.q < 2) throw ConfigError("Q must be >= 2");
    if (cfg.front_end.n_slices % 2 && sw.q % 2) throw ConfigError("odd slice count needs an even Q");
    for (int p : sw.p)
        if (p < 1) throw ConfigError("P must be >= 1");
    for (int m : sw.channels)
        if (m < 1 || m > cfg.front_end.n_slices) throw ConfigError("channel count outside [1, N]");
    if (cfg.front_end.kind != "mwc" && cfg.front_end.kind != "multicoset")
        throw ConfigError("front end kind must be mwc or multicoset");
    if (cfg.front_end.n_slices < 2) throw ConfigError("need at least 2 slices");
    if (cfg.scenario.n_sig < 0) throw ConfigError("n_sig must be >= 0");
    if (!cfg.scenario.carriers_hz.empty() && static_cast<int>(cfg.scenario.carriers_hz.size()) != cfg.scenario.n_sig)
        throw ConfigError("fixed carrier list must have n_sig entries");
    if (cfg.kind == ExperimentKind::Roc && cfg.scenario.n_sig < 1) throw ConfigError("ROC needs a transmission");
    if (!(cfg.detection.b_max_hz > 0)) throw ConfigError("B_max must be positive");
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> out;
    for (const auto& snr : cfg.sweep.snr_db)
        for (int m : cfg.sweep.channels)
            for (int p : cfg.sweep.p) out.push_back({snr, m, p});
    return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> trial_carriers(const ExperimentConfig& cfg, int trial) {
    const auto& sc = cfg.scenario;
    if (!sc.carriers_hz.empty()) return sc.carriers_hz;
    Rng rng(child_seed(child_seed(cfg.master_seed, static_cast<std::uint64_t>(trial)), 1));
    return draw_carriers(sc.n_sig, sc.bandwidth_hz, sc.nyquist_rate_hz, rng);
}

} // namespace

// Seeds depend on the trial only (and the channel count for the front end), so every sweep
// point sees the same scenes.
TrialScene make_scene(const ExperimentConfig& cfg, const SweepPoint& pt, int trial) {
    const auto& sc = cfg.scenario;
    const std::uint64_t ts = child_seed(cfg.master_seed, static_cast<std::uint64_t>(trial));
    const int n = cfg.front_end.n_slices;
    TrialScene s;
    s.p = pt.p;
    s.q = cfg.sweep.q;
    s.signal.nyquist_rate_hz = sc.nyquist_rate_hz;
    s.signal.snr_db = pt.snr_db;
    s.signal.duration_s = static_cast<double>(pt.p) * s.q * n / sc.nyquist_rate_hz;
    s.signal.rng_seed = child_seed(ts, 2);
    if (sc.snapshot_windows) s.signal.segment_samples = static_cast<std::size_t>(s.q) * n;
    for (double f : trial_carriers(cfg, trial))
        s.signal.transmissions.push_back(
            make_transmission(f, sc.bandwidth_hz, sc.excess_bandwidth, sc.modulation, sc.amplitude));
    const std::uint64_t fe_seed = child_seed(ts, 1000 + static_cast<std::uint64_t>(pt.channels));
    if (cfg.front_end.kind == "mwc") {
        MwcConfig m = random_mwc_config(n, pt.channels, sc.nyquist_rate_hz / n, fe_seed);
        m.max_band_hz = sc.bandwidth_hz;
        s.front_end = m;
    } else {
        s.front_end = random_multicoset_config(n, pt.channels, fe_seed);
    }
    s.recovery = cfg.recovery;
    if (s.recovery.k <= 0) s.recovery.k = std::max(1, 2 * sc.n_sig);
    // Noisy scenes gate the frame on the median eigenvalue as well.
    if (pt.snr_db) s.recovery.ctf.noise_calibrated = true;
    return s;
}

PipelineOutput run_pipeline(const TrialScene& scene, const DetectParams& params, DetectorChoice detector) {
    const NyquistSignal x = compose_signal(scene.signal);
    const ChannelSamples z = simulate_sampling(x, scene.front_end);
    const CorrelationTensor t = shifted_correlation(spectral_frames(z, scene.p, scene.q));
    const SensingMatrix a = sensing_matrix(scene.front_end, scene.signal.nyquist_rate_hz);
    const StructuredOperator op = build_operator(a, selection_layout(a.n_slices));
    PipelineOutput out;
    if (detector != DetectorChoice::Energy) {
        out.slices = recover_slices(t, op, scene.recovery);
        out.grid = assemble(out.slices, op.layout, grid_meta(t));
        out.cyclo = detect_transmissions(out.grid, params);
    }
    if (detector != DetectorChoice::Cyclo) {
        out.power = recover_power_spectrum(t, op, scene.recovery);
        out.energy = energy_estimate_report(out.power, params);
    }
    return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, const SweepPoint& pt, int trial) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialResult r;
    try {
        const TrialScene scene = make_scene(cfg, pt, trial);
        for (const auto& tx : scene.signal.transmissions) r.carriers_hz.push_back(tx.carrier_hz);
        r.delta = scene.signal.nyquist_rate_hz / cfg.front_end.n_slices / scene.q;
        PipelineOutput out = run_pipeline(scene, cfg.detection, cfg.detector);
        r.cyclo = std::move(out.cyclo);
        r.energy = std::move(out.energy);
    } catch (const std::exception& e) {
        r.error = e.what();
        r.cyclo.reset();
        r.energy.reset();
    }
    r.runtime_s = seconds_since(t0);
    return r;
}

Match match_report(const std::vector<double>& truth, const DetectionReport& rep, double tol_hz) {
    Match m;
    std::vector<bool> used(rep.transmissions.size(), false);
    for (double f : truth) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rep.transmissions.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(rep.transmissions[i].carrier_hz - f);
            if (d < tol_hz && d < bd) {
                bd = d;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) continue;
        used[best] = true;
        ++m.detected;
        m.sq_err += bd * bd;
        m.bw_sum += rep.transmissions[best].bandwidth_hz;
    }
    for (bool u : used) m.false_alarms += !u;
    return m;
}

MetricsTable run_monte_carlo(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto points = sweep_points(cfg);
    const int trials = cfg.sweep.trials;
    const int total = static_cast<int>(points.size()) * trials;
    std::vector<TrialResult> results(total);
    parallel_for(total, cfg.workers, [&](int i) { results[i] = run_trial(cfg, points[i / trials], i % trials); });

    MetricsTable table;
    table.master_seed = cfg.master_seed;
    std::vector<std::string> detectors;
    if (cfg.detector != DetectorChoice::Energy) detectors.push_back("cyclo");
    if (cfg.detector != DetectorChoice::Cyclo) detectors.push_back("energy");
    for (std::size_t pi = 0; pi < points.size(); ++pi)
        for (const auto& det : detectors) {
            MetricsRow row;
            row.point = points[pi];
            row.detector = det;
            row.trials = trials;
            long planted = 0, detected = 0, fa = 0;
            double sq = 0, bw = 0, rt = 0;
            for (int t = 0; t < trials; ++t) {
                const TrialResult& r = results[pi * trials + t];
                rt += r.runtime_s;
                const auto& rep = det == "cyclo" ? r.cyclo : r.energy;
                if (!rep) {
                    ++row.failures;
                    continue;
                }
                const Match m = match_report(r.carriers_hz, *rep, cfg.match_resolutions * r.delta);
                planted += static_cast<long>(r.carriers_hz.size());
                detected += m.detected;
                fa += m.false_alarms;
                sq += m.sq_err / (r.delta * r.delta);
                bw += m.bw_sum;
            }
            const int ok = trials - row.failures;
            row.pd = planted ? static_cast<double>(detected) / planted : 0.0;
            row.mean_false_alarms = ok ? static_cast<double>(fa) / ok : 0.0;
            row.nmse = detected ? sq / detected : std::numeric_limits<double>::quiet_NaN();
            row.mean_bandwidth_hz = detected ? bw / detected : std::numeric_limits<double>::quiet_NaN();
            row.runtime_s = rt / trials;
            table.rows.push_back(row);
        }
    return table;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& h1, const std::vector<double>& h0) {
    if (h1.empty() || h0.empty()) throw ConfigError("ROC needs H1 and H0 samples");
    std::vector<double> th(h1);
    th.insert(th.end(), h0.begin(), h0.end());
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end()), th.end());
    // Below every sample first, so the curve starts at (1, 1).
    th.insert(th.begin(), th.front() - 1.0 - std::abs(th.front()));
    std::vector<double> s1(h1), s0(h0);
    std::sort(s1.begin(), s1.end());
    std::sort(s0.begin(), s0.end());
    auto frac_above = [](const std::vector<double>& s, double t) {
        return static_cast<double>(s.end() - std::upper_bound(s.begin(), s.end(), t)) / s.size();
    };
    std::vector<RocPoint> out;
    for (double t : th) out.push_back({t, frac_above(s1, t), frac_above(s0, t)});
    return out;
}

double pd_at_pfa(const std::vector<RocPoint>& roc, double pfa) {
    double best = 0;
    for (const auto& r : roc)
        if (r.pfa <= pfa) best = std::max(best, r.pd);
    return best;
}

std::vector<RocSeries> run_roc(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto points = sweep_points(cfg);
    const int trials = cfg.sweep.trials;
    const int total = static_cast<int>(points.size()) * trials;
    struct Stats {
        double c1 = 0, c0 = 0, e1 = 0, e0 = 0;
        bool ok = false;
    };
    std::vector<Stats> stats(total);
    const double b = cfg.scenario.bandwidth_hz;
    parallel_for(total, cfg.workers, [&](int i) {
        Stats& s = stats[i];
        try {
            TrialScene h1 = make_scene(cfg, points[i / trials], i % trials);
            // The first transmission is the one under test; the rest stay in both hypotheses.
            const double f0 = h1.signal.transmissions.front().carrier_hz;
            TrialScene h0 = h1;
            h0.signal.transmissions.erase(h0.signal.transmissions.begin());
            h0.signal.reference_power = mean_power(compose_signal([&] {
                                                       SignalConfig c = h1.signal;
                                                       c.snr_db.reset();
                                                       return c;
                                                   }()).samples);
            h1.signal.reference_power = h0.signal.reference_power;
            const auto o1 = run_pipeline(h1, cfg.detection, DetectorChoice::Both);
            const auto o0 = run_pipeline(h0, cfg.detection, DetectorChoice::Both);
            s.c1 = single_cycle_statistic(o1.grid, 2 * f0, b / 2);
            s.c0 = single_cycle_statistic(o0.grid, 2 * f0, b / 2);
            s.e1 = band_energy(o1.power, f0 - b / 2, f0 + b / 2);
            s.e0 = band_energy(o0.power, f0 - b / 2, f0 + b / 2);
            s.ok = true;
        } catch (const std::exception&) {
            s.ok = false;
        }
    });
    std::vector<RocSeries> out;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        std::vector<double> c1, c0, e1, e0;
        int failures = 0;
        for (int t = 0; t < trials; ++t) {
            const Stats& s = stats[pi * trials + t];
            if (!s.ok) {
                ++failures;
                continue;
            }
            c1.push_back(s.c1);
            c0.push_back(s.c0);
            e1.push_back(s.e1);
            e0.push_back(s.e0);
        }
        if (c1.empty()) throw RuntimeFailure("every ROC trial failed");
        out.push_back({points[pi], "cyclo", roc_curve(c1, c0), failures});
        out.push_back({points[pi], "energy", roc_curve(e1, e0), failures});
    }
    return out;
}

namespace {

std::string snr_text(const std::optional<double>& s) {
    if (!s) return "inf";
    char b[32];
    std::snprintf(b, sizeof b, "%g", *s);
    return b;
}

nlohmann::json snr_json(const std::optional<double>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); }

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw RuntimeFailure("cannot write " + path);
    return os;
}

} // namespace

void emit_results(const MetricsTable& table, const std::string& stem) {
    if (table.rows.empty()) throw ConfigError("nothing to emit: empty metrics table");
    {
        auto os = open_out(stem + ".csv");
        os << "snr_db,channels,p,detector,trials,failures,pd,mean_false_alarms,nmse,mean_bandwidth_hz,runtime_s\n";
        char line[256];
        for (const auto& r : table.rows) {
            std::snprintf(line, sizeof line, "%s,%d,%d,%s,%d,%d,%.6f,%.6f,%.6g,%.6g,%.6f\n",
                          snr_text(r.point.snr_db).c_str(), r.point.channels, r.point.p, r.detector.c_str(), r.trials,
                          r.failures, r.pd, r.mean_false_alarms, r.nmse, r.mean_bandwidth_hz, r.runtime_s);
            os << line;
        }
    }
    nlohmann::json j;
    j["master_seed"] = table.master_seed;
    for (const auto& r : table.rows) {
        j["rows"].push_back({{"snr_db", snr_json(r.point.snr_db)},
                             {"channels", r.point.channels},
                             {"p", r.point.p},
                             {"detector", r.detector},
                             {"trials", r.trials},
                             {"failures", r.failures},
                             {"pd", r.pd},
                             {"mean_false_alarms", r.mean_false_alarms},
                             {"nmse", std::isfinite(r.nmse) ? nlohmann::json(r.nmse) : nlohmann::json(nullptr)},
                             {"mean_bandwidth_hz", std::isfinite(r.mean_bandwidth_hz)
                                                       ? nlohmann::json(r.mean_bandwidth_hz)
                                                       : nlohmann::json(nullptr)},
                             {"runtime_s", r.runtime_s}});
    }
    open_out(stem + ".json") << j.dump(2) << "\n";
}

void emit_roc(const std::vector<RocSeries>& series, const std::string& stem) {
    if (series.empty()) throw ConfigError("nothing to emit: no ROC series");
    auto os = open_out(stem + ".csv");
    os << "snr_db,channels,p,detector,threshold,pd,pfa\n";
    char line[256];
    for (const auto& s : series)
        for (const auto& r : s.curve) {
            std::snprintf(line, sizeof line, "%s,%d,%d,%s,%.9g,%.6f,%.6f\n", snr_text(s.point.snr_db).c_str(),
                          s.point.channels, s.point.p, s.detector.c_str(), r.threshold, r.pd, r.pfa);
            os << line;
        }
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : series)
        j.push_back({{"snr_db", snr_json(s.point.snr_db)},
                     {"channels", s.point.channels},
                     {"p", s.point.p},
                     {"detector", s.detector},
                     {"failures", s.failures},
                     {"pd_at_pfa_0.1", pd_at_pfa(s.curve, 0.1)}});
    open_out(stem + ".json") << j.dump(2) << "\n";
}

} // namespace subcyclo
