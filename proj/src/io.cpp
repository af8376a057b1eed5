#include "subcyclo/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace subcyclo::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

template <class T>
T get(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key);
}

std::ofstream open_bin(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw RuntimeFailure("cannot write " + path);
    return os;
}

std::ifstream open_bin_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    return is;
}

void put_c64(std::ofstream& os, cplx v) {
    const float f[2] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
    os.write(reinterpret_cast<const char*>(f), sizeof f);
}

cplx get_c64(std::ifstream& is) {
    float f[2];
    if (!is.read(reinterpret_cast<char*>(f), sizeof f)) throw ConfigError("binary file shorter than its header");
    return {f[0], f[1]};
}

} // namespace

json to_json(const TransmissionSpec& t) {
    return {{"carrier_hz", t.carrier_hz},
            {"bandwidth_hz", t.bandwidth_hz},
            {"symbol_period_s", t.symbol_period_s},
            {"excess_bandwidth", t.excess_bandwidth},
            {"modulation", to_string(t.modulation)},
            {"amplitude", t.amplitude}};
}

TransmissionSpec transmission_from_json(const json& j) {
    TransmissionSpec t;
    t.carrier_hz = get<double>(j, "carrier_hz");
    t.bandwidth_hz = get<double>(j, "bandwidth_hz");
    t.excess_bandwidth = get<double>(j, "excess_bandwidth");
    t.modulation = modulation_from_string(get<std::string>(j, "modulation"));
    maybe(j, "amplitude", t.amplitude);
    t.symbol_period_s = (1 + t.excess_bandwidth) / t.bandwidth_hz;
    maybe(j, "symbol_period_s", t.symbol_period_s);
    return t;
}

json to_json(const SignalConfig& c) {
    json j;
    j["transmissions"] = json::array();
    for (const auto& t : c.transmissions) j["transmissions"].push_back(to_json(t));
    j["nyquist_rate_hz"] = c.nyquist_rate_hz;
    j["snr_db"] = c.snr_db ? json(*c.snr_db) : json(nullptr);
    j["duration_s"] = c.duration_s;
    j["rng_seed"] = c.rng_seed;
    if (c.reference_power) j["reference_power"] = *c.reference_power;
    if (!c.noise_bands.empty()) j["noise_bands"] = c.noise_bands;
    if (c.segment_samples) j["segment_samples"] = c.segment_samples;
    return j;
}

SignalConfig signal_config_from_json(const json& j) {
    SignalConfig c;
    if (j.contains("transmissions"))
        for (const auto& t : j.at("transmissions")) c.transmissions.push_back(transmission_from_json(t));
    c.nyquist_rate_hz = get<double>(j, "nyquist_rate_hz");
    c.duration_s = get<double>(j, "duration_s");
    maybe(j, "rng_seed", c.rng_seed);
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) c.snr_db = get<double>(j, "snr_db");
    if (j.contains("reference_power") && !j.at("reference_power").is_null())
        c.reference_power = get<double>(j, "reference_power");
    maybe(j, "noise_bands", c.noise_bands);
    maybe(j, "segment_samples", c.segment_samples);
    return c;
}

json to_json(const FrontEnd& fe) {
    if (const auto* mc = std::get_if<MulticosetConfig>(&fe))
        return {{"kind", "multicoset"}, {"n_slices", mc->n_slices}, {"cosets", mc->cosets}};
    const auto& m = std::get<MwcConfig>(fe);
    return {{"kind", "mwc"},
            {"n_slices", m.n_slices},
            {"n_channels", m.n_channels},
            {"mixing_sequences", m.mixing_sequences},
            {"channel_rate_hz", m.channel_rate_hz},
            {"max_band_hz", m.max_band_hz},
            {"seed", m.seed}};
}

FrontEnd front_end_from_json(const json& j) {
    const auto kind = get<std::string>(j, "kind");
    if (kind == "multicoset") {
        MulticosetConfig c{get<int>(j, "n_slices"), get<std::vector<int>>(j, "cosets")};
        validate(c);
        return c;
    }
    if (kind != "mwc") throw ConfigError("front end kind must be mwc or multicoset");
    MwcConfig m;
    m.n_slices = get<int>(j, "n_slices");
    m.n_channels = get<int>(j, "n_channels");
    m.mixing_sequences = get<std::vector<std::vector<int>>>(j, "mixing_sequences");
    m.channel_rate_hz = get<double>(j, "channel_rate_hz");
    maybe(j, "max_band_hz", m.max_band_hz);
    maybe(j, "seed", m.seed);
    validate(m);
    return m;
}

json to_json(const RecoveryOptions& r) {
    json j = {{"k", r.k},
              {"sbr2_depth", r.sbr2_depth},
              {"structured", r.structured},
              {"per_frequency", r.per_frequency},
              {"eps_rel", r.eps_rel},
              {"residual_tol", r.residual_tol},
              {"k_max", r.k_max},
              {"ctf_tau", r.ctf.tau},
              {"ctf_noise_calibrated", r.ctf.noise_calibrated},
              {"ctf_median_factor", r.ctf.median_factor},
              {"zero_shift", r.zero_shift == ZeroShiftMode::Skip               ? "skip"
                             : r.zero_shift == ZeroShiftMode::AntiDiagonalOnly ? "anti_diagonal"
                                                                               : "joint"}};
    if (!r.shifts.empty()) j["shifts"] = r.shifts;
    return j;
}

RecoveryOptions recovery_from_json(const json& j, RecoveryOptions r) {
    maybe(j, "k", r.k);
    maybe(j, "sbr2_depth", r.sbr2_depth);
    maybe(j, "structured", r.structured);
    maybe(j, "per_frequency", r.per_frequency);
    maybe(j, "eps_rel", r.eps_rel);
    maybe(j, "residual_tol", r.residual_tol);
    maybe(j, "k_max", r.k_max);
    maybe(j, "ctf_tau", r.ctf.tau);
    maybe(j, "ctf_noise_calibrated", r.ctf.noise_calibrated);
    maybe(j, "ctf_median_factor", r.ctf.median_factor);
    maybe(j, "shifts", r.shifts);
    if (j.contains("zero_shift")) {
        const auto z = get<std::string>(j, "zero_shift");
        if (z == "skip")
            r.zero_shift = ZeroShiftMode::Skip;
        else if (z == "joint")
            r.zero_shift = ZeroShiftMode::Joint;
        else if (z == "anti_diagonal")
            r.zero_shift = ZeroShiftMode::AntiDiagonalOnly;
        else
            throw ConfigError("zero_shift must be joint, anti_diagonal or skip");
    }
    return r;
}

json to_json(const DetectParams& d) {
    return {{"b_max_hz", d.b_max_hz},          {"sigma_factor", d.sigma_factor},
            {"tau_rel", d.tau_rel},            {"edge_fraction", d.edge_fraction},
            {"edge_smoothing", d.edge_smoothing}, {"k_max", d.k_max},
            {"tight_spread", d.tight_spread},  {"merge_fraction", d.merge_fraction},
            {"log_elbow", d.log_elbow}, {"mirror", d.mirror}, {"energy_tau_rel", d.energy_tau_rel},
            {"seed", d.seed}};
}

DetectParams detect_params_from_json(const json& j, DetectParams d) {
    maybe(j, "b_max_hz", d.b_max_hz);
    maybe(j, "sigma_factor", d.sigma_factor);
    maybe(j, "tau_rel", d.tau_rel);
    maybe(j, "edge_fraction", d.edge_fraction);
    maybe(j, "edge_smoothing", d.edge_smoothing);
    maybe(j, "k_max", d.k_max);
    maybe(j, "tight_spread", d.tight_spread);
    maybe(j, "merge_fraction", d.merge_fraction);
    maybe(j, "log_elbow", d.log_elbow);
    maybe(j, "mirror", d.mirror);
    maybe(j, "energy_tau_rel", d.energy_tau_rel);
    maybe(j, "seed", d.seed);
    return d;
}

json to_json(const ExperimentConfig& c) {
    json snr = json::array();
    for (const auto& s : c.sweep.snr_db) snr.push_back(s ? json(*s) : json(nullptr));
    return {{"kind", to_string(c.kind)},
            {"master_seed", c.master_seed},
            {"detector", to_string(c.detector)},
            {"workers", c.workers},
            {"match_resolutions", c.match_resolutions},
            {"scenario",
             {{"nyquist_rate_hz", c.scenario.nyquist_rate_hz},
              {"n_sig", c.scenario.n_sig},
              {"bandwidth_hz", c.scenario.bandwidth_hz},
              {"excess_bandwidth", c.scenario.excess_bandwidth},
              {"modulation", to_string(c.scenario.modulation)},
              {"amplitude", c.scenario.amplitude},
              {"carriers_hz", c.scenario.carriers_hz},
              {"snapshot_windows", c.scenario.snapshot_windows}}},
            {"front_end", {{"kind", c.front_end.kind}, {"n_slices", c.front_end.n_slices}}},
            {"recovery", to_json(c.recovery)},
            {"detection", to_json(c.detection)},
            {"sweep",
             {{"snr_db", snr},
              {"channels", c.sweep.channels},
              {"p", c.sweep.p},
              {"q", c.sweep.q},
              {"trials", c.sweep.trials}}}};
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("kind")) c.kind = experiment_kind_from_string(get<std::string>(j, "kind"));
    maybe(j, "master_seed", c.master_seed);
    if (j.contains("detector")) c.detector = detector_from_string(get<std::string>(j, "detector"));
    maybe(j, "workers", c.workers);
    maybe(j, "match_resolutions", c.match_resolutions);
    if (j.contains("scenario")) {
        const auto& s = j.at("scenario");
        maybe(s, "nyquist_rate_hz", c.scenario.nyquist_rate_hz);
        maybe(s, "n_sig", c.scenario.n_sig);
        maybe(s, "bandwidth_hz", c.scenario.bandwidth_hz);
        maybe(s, "excess_bandwidth", c.scenario.excess_bandwidth);
        if (s.contains("modulation")) c.scenario.modulation = modulation_from_string(get<std::string>(s, "modulation"));
        maybe(s, "amplitude", c.scenario.amplitude);
        maybe(s, "carriers_hz", c.scenario.carriers_hz);
        maybe(s, "snapshot_windows", c.scenario.snapshot_windows);
    }
    if (j.contains("front_end")) {
        maybe(j.at("front_end"), "kind", c.front_end.kind);
        maybe(j.at("front_end"), "n_slices", c.front_end.n_slices);
    }
    if (j.contains("recovery")) c.recovery = recovery_from_json(j.at("recovery"), c.recovery);
    if (j.contains("detection")) c.detection = detect_params_from_json(j.at("detection"), c.detection);
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (s.contains("snr_db")) {
            c.sweep.snr_db.clear();
            const json& v = s.at("snr_db");
            if (!v.is_array()) throw ConfigError("sweep.snr_db must be an array");
            for (const auto& e : v) {
                if (e.is_null())
                    c.sweep.snr_db.push_back(std::nullopt);
                else if (e.is_number())
                    c.sweep.snr_db.push_back(e.get<double>());
                else
                    throw ConfigError("sweep.snr_db entries must be numbers or null");
            }
        }
        maybe(s, "channels", c.sweep.channels);
        maybe(s, "p", c.sweep.p);
        maybe(s, "q", c.sweep.q);
        maybe(s, "trials", c.sweep.trials);
    }
    validate(c);
    return c;
}

json to_json(const DetectionReport& r) {
    json t = json::array();
    for (const auto& x : r.transmissions)
        t.push_back({{"carrier_hz", x.carrier_hz},
                     {"bandwidth_hz", x.bandwidth_hz},
                     {"peak_alpha_hz", x.peak_alpha_hz},
                     {"cluster_id", x.cluster_id}});
    return {{"n_sig_hat", r.n_sig_hat},  {"transmissions", t},       {"clusters", r.clusters},
            {"dc_clusters", r.dc_clusters}, {"asymmetric", r.asymmetric}, {"merged", r.merged}};
}

json to_json(const SupportSet& s) {
    return {{"layout_version", SelectionLayout::kVersion},
            {"slots", s.slots},
            {"k", s.k},
            {"admissible", s.admissible},
            {"group_symmetric", s.group_symmetric}};
}

json support_json(const RecoveredSlices& rec) {
    json shifts = json::array();
    for (const auto& sr : rec.shifts)
        for (const auto& p : sr.pieces) {
            json e = to_json(p.support);
            e["qa"] = sr.qa;
            e["begin"] = p.begin;
            e["end"] = p.end;
            e["ill_conditioned"] = p.ill_conditioned;
            e["oversized"] = p.oversized;
            shifts.push_back(e);
        }
    return {{"layout_version", SelectionLayout::kVersion}, {"n", rec.n}, {"q", rec.q}, {"pieces", shifts}};
}

json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_json(const json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw RuntimeFailure("cannot write " + path);
    os << j.dump(2) << "\n";
}

void write_signal(const NyquistSignal& x, const std::string& stem) {
    auto os = open_bin(stem + ".f64");
    os.write(reinterpret_cast<const char*>(x.samples.data()),
             static_cast<std::streamsize>(x.samples.size() * sizeof(double)));
    write_json({{"rate_hz", x.rate_hz}, {"length", x.samples.size()}}, stem + ".json");
}

NyquistSignal read_signal(const std::string& stem) {
    const json h = read_json(stem + ".json");
    NyquistSignal x;
    x.rate_hz = get<double>(h, "rate_hz");
    x.samples.resize(get<std::size_t>(h, "length"));
    auto is = open_bin_in(stem + ".f64");
    if (!is.read(reinterpret_cast<char*>(x.samples.data()),
                 static_cast<std::streamsize>(x.samples.size() * sizeof(double))))
        throw ConfigError(stem + ".f64 is shorter than its sidecar length");
    return x;
}

void write_channels(const ChannelSamples& z, const FrontEnd& fe, const std::string& stem) {
    auto os = open_bin(stem + ".c64");
    for (const auto& ch : z.channels)
        for (cplx v : ch) put_c64(os, v);
    write_json({{"M", z.m()},
                {"L", z.length()},
                {"f_s", z.f_s},
                {"n_slices", z.n_slices},
                {"nyquist_rate_hz", z.nyquist_rate_hz},
                {"delays", z.delays},
                {"front_end", to_json(fe)}},
               stem + ".json");
}

ChannelSamples read_channels(const std::string& stem, FrontEnd* fe) {
    const json h = read_json(stem + ".json");
    ChannelSamples z;
    const int m = get<int>(h, "M");
    const auto l = get<std::size_t>(h, "L");
    z.f_s = get<double>(h, "f_s");
    z.n_slices = get<int>(h, "n_slices");
    z.nyquist_rate_hz = get<double>(h, "nyquist_rate_hz");
    z.delays = get<std::vector<int>>(h, "delays");
    if (fe && h.contains("front_end")) *fe = front_end_from_json(h.at("front_end"));
    auto is = open_bin_in(stem + ".c64");
    z.channels.assign(m, std::vector<cplx>(l));
    for (auto& ch : z.channels)
        for (auto& v : ch) v = get_c64(is);
    return z;
}

void write_tensor(const CorrelationTensor& t, const std::string& stem) {
    auto os = open_bin(stem + ".c64");
    for (int qa = 0; qa < t.q; ++qa)
        for (int qf = 0; qf + qa < t.q; ++qf) {
            const auto r = t.at(qa, qf);
            for (int i = 0; i < t.m; ++i)
                for (int j = 0; j < t.m; ++j) put_c64(os, r(i, j));
        }
    write_json({{"M", t.m}, {"Q", t.q}, {"P", t.p}, {"f_s", t.f_s}, {"N", t.n_slices}, {"triangular", true}},
               stem + ".json");
}

CorrelationTensor read_tensor(const std::string& stem) {
    const json h = read_json(stem + ".json");
    CorrelationTensor t;
    t.m = get<int>(h, "M");
    t.q = get<int>(h, "Q");
    t.p = get<int>(h, "P");
    t.f_s = get<double>(h, "f_s");
    t.n_slices = get<int>(h, "N");
    if (t.m < 1 || t.q < 1) throw ConfigError("tensor header has empty dimensions");
    t.data.resize(t.block_count() * t.m * t.m);
    auto is = open_bin_in(stem + ".c64");
    for (int qa = 0; qa < t.q; ++qa)
        for (int qf = 0; qf + qa < t.q; ++qf) {
            auto r = t.at(qa, qf);
            for (int i = 0; i < t.m; ++i)
                for (int j = 0; j < t.m; ++j) r(i, j) = get_c64(is);
        }
    return t;
}

void write_recovered(const RecoveredSlices& rec, const SelectionLayout& layout, const std::string& stem) {
    CorrelationTensor t;
    t.m = rec.n;
    t.q = rec.q;
    t.p = rec.p;
    t.f_s = rec.f_s;
    t.n_slices = rec.n;
    t.data.assign(t.block_count() * t.m * t.m, cplx(0));
    for (const auto& sr : rec.shifts)
        for (const auto& piece : sr.pieces)
            for (std::size_t s = 0; s < piece.support.slots.size(); ++s) {
                const Slot& slot = layout.slots[piece.support.slots[s]];
                for (int qf = piece.begin; qf < piece.end; ++qf)
                    t.at(sr.qa, qf)(slot.row, slot.col) = piece.coeffs(static_cast<Eigen::Index>(s), qf - piece.begin);
            }
    write_tensor(t, stem);
}

void write_grid(const CyclicSpectrumGrid& g, const std::string& stem) {
    auto os = open_bin(stem + ".bin");
    const auto entries = g.entries();
    for (const auto& e : entries) {
        const std::int64_t a = e.alpha_bin, f = e.f_half;
        os.write(reinterpret_cast<const char*>(&a), sizeof a);
        os.write(reinterpret_cast<const char*>(&f), sizeof f);
        put_c64(os, e.value);
    }
    const auto& m = g.meta();
    write_json({{"f_nyq", m.f_nyq},
                {"f_s", m.f_s},
                {"N", m.n},
                {"P", m.p},
                {"Q", m.q},
                {"delta_hz", m.delta()},
                {"cells", entries.size()},
                {"record", "int64 alpha_bin, int64 f_half, float32 re, float32 im"},
                {"alpha_hz", "alpha_bin * delta_hz"},
                {"f_hz", "f_half * delta_hz / 2"}},
               stem + ".json");
}

CyclicSpectrumGrid read_grid(const std::string& stem) {
    const json h = read_json(stem + ".json");
    GridMeta m;
    m.f_nyq = get<double>(h, "f_nyq");
    m.f_s = get<double>(h, "f_s");
    m.n = get<int>(h, "N");
    m.p = get<int>(h, "P");
    m.q = get<int>(h, "Q");
    CyclicSpectrumGrid g(m);
    const auto cells = get<std::size_t>(h, "cells");
    auto is = open_bin_in(stem + ".bin");
    for (std::size_t c = 0; c < cells; ++c) {
        std::int64_t a = 0, f = 0;
        if (!is.read(reinterpret_cast<char*>(&a), sizeof a) || !is.read(reinterpret_cast<char*>(&f), sizeof f))
            throw ConfigError(stem + ".bin is shorter than its header");
        g.add(a, f, get_c64(is));
    }
    return g;
}

} // namespace subcyclo::io
