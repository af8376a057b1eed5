#include "subcyclo/signal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "subcyclo/fft.hpp"

namespace subcyclo {

namespace {

constexpr int kPulseSpan = 8;         // pulse truncated at +-8 symbols
constexpr int kLutPerSymbol = 4096;   // pulse table resolution

std::string hz(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v << " Hz";
    return os.str();
}

// Pulse table on [-span, span] with unit energy after truncation.
std::vector<double> build_pulse_table(double rolloff) {
    const int n = 2 * kPulseSpan * kLutPerSymbol + 1;
    std::vector<double> lut(n);
    double energy = 0;
    for (int i = 0; i < n; ++i) {
        lut[i] = rrc(static_cast<double>(i) / kLutPerSymbol - kPulseSpan, rolloff);
        energy += lut[i] * lut[i];
    }
    energy /= kLutPerSymbol;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& v : lut) v *= scale;
    return lut;
}

// Tables are cached per roll-off; segmented records would otherwise rebuild them per segment.
std::shared_ptr<const std::vector<double>> pulse_table(double rolloff) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[rolloff];
    if (!slot) slot = std::make_shared<const std::vector<double>>(build_pulse_table(rolloff));
    return slot;
}

double lut_eval(const std::vector<double>& lut, double tau) {
    const double pos = (tau + kPulseSpan) * kLutPerSymbol;
    if (pos < 0 || pos >= static_cast<double>(lut.size() - 1)) return 0;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return lut[i] + frac * (lut[i + 1] - lut[i]);
}

// Sum_k a_k g(t/T - k) sampled at n / rate.
std::vector<double> pam_baseband(const std::vector<double>& symbols, int first_symbol, double symbol_period,
                                 double rate, std::size_t len, const std::vector<double>& lut) {
    std::vector<double> out(len, 0.0);
    const double sps = symbol_period * rate;  // samples per symbol
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const double a = symbols[s];
        if (a == 0) continue;
        const double k = static_cast<double>(first_symbol) + static_cast<double>(s);
        const double center = k * sps;
        const long lo = std::max(0L, static_cast<long>(std::ceil(center - kPulseSpan * sps)));
        const long hi = std::min(static_cast<long>(len) - 1, static_cast<long>(std::floor(center + kPulseSpan * sps)));
        for (long n = lo; n <= hi; ++n) out[n] += a * lut_eval(lut, static_cast<double>(n) / sps - k);
    }
    return out;
}

// Stationary Gaussian message, ideally lowpassed to `cutoff` Hz and scaled to unit power.
std::vector<double> lowpass_message(std::size_t len, double rate, double cutoff, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> buf(len);
    for (auto& v : buf) v = g(rng);
    auto spec = fft::forward(buf);
    for (std::size_t k = 0; k < len; ++k) {
        const double f = (k <= len / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(len)) *
                         rate / static_cast<double>(len);
        if (std::abs(f) > cutoff) spec[k] = 0;
    }
    auto time = fft::inverse(spec);
    std::vector<double> out(len);
    for (std::size_t n = 0; n < len; ++n) out[n] = time[n].real() / static_cast<double>(len);
    const double p = mean_power(out);
    if (p > 0) {
        const double s = 1.0 / std::sqrt(p);
        for (double& v : out) v *= s;
    }
    return out;
}

} // namespace

std::string to_string(Modulation m) {
    switch (m) {
    case Modulation::AM: return "AM";
    case Modulation::BPSK: return "BPSK";
    case Modulation::QAM: return "QAM";
    }
    return "?";
}

Modulation modulation_from_string(const std::string& name) {
    std::string s(name);
    for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (s == "AM") return Modulation::AM;
    if (s == "BPSK") return Modulation::BPSK;
    if (s == "QAM") return Modulation::QAM;
    throw ConfigError("unknown modulation '" + name + "' (expected AM, BPSK or QAM)");
}

TransmissionSpec make_transmission(double carrier_hz, double bandwidth_hz, double excess_bandwidth,
                                   Modulation modulation, double amplitude) {
    TransmissionSpec t;
    t.carrier_hz = carrier_hz;
    t.bandwidth_hz = bandwidth_hz;
    t.excess_bandwidth = excess_bandwidth;
    t.symbol_period_s = (1.0 + excess_bandwidth) / bandwidth_hz;
    t.modulation = modulation;
    t.amplitude = amplitude;
    return t;
}

void validate(const TransmissionSpec& spec, double f_nyq, double b_max) {
    if (!(spec.bandwidth_hz > 0)) throw ConfigError("bandwidth_hz must be positive");
    if (!(spec.excess_bandwidth >= 0 && spec.excess_bandwidth <= 1))
        throw ConfigError("excess_bandwidth must lie in [0, 1]");
    if (!std::isfinite(spec.amplitude)) throw ConfigError("amplitude must be finite");
    if (b_max > 0 && spec.bandwidth_hz > b_max)
        throw ConfigError("bandwidth " + hz(spec.bandwidth_hz) + " exceeds B_max = " + hz(b_max));
    const double lo = spec.carrier_hz - spec.bandwidth_hz / 2;
    const double hi = spec.carrier_hz + spec.bandwidth_hz / 2;
    if (!(lo > 0)) throw ConfigError("band lower edge " + hz(lo) + " must be above 0 Hz");
    if (!(hi < f_nyq / 2))
        throw ConfigError("band exceeds Nyquist limit: upper edge " + hz(hi) + " must be below f_Nyq/2 = " +
                          hz(f_nyq / 2));
    const double expect = (1.0 + spec.excess_bandwidth) / spec.bandwidth_hz;
    if (!(std::abs(spec.symbol_period_s - expect) <= 1e-9 * expect))
        throw ConfigError("symbol_period_s must equal (1 + excess_bandwidth) / bandwidth_hz = " +
                          std::to_string(expect) + " s");
}

void validate(const SignalConfig& cfg) {
    if (!(cfg.nyquist_rate_hz > 0)) throw ConfigError("nyquist_rate_hz must be positive");
    if (!(cfg.duration_s > 0)) throw ConfigError("duration_s must be positive");
    const double n = cfg.duration_s * cfg.nyquist_rate_hz;
    if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n))
        throw ConfigError("duration_s * nyquist_rate_hz must be an integer sample count");
    for (const auto& t : cfg.transmissions) validate(t, cfg.nyquist_rate_hz);
    if (cfg.reference_power && !(*cfg.reference_power >= 0)) throw ConfigError("reference_power must be >= 0");
    for (const auto& [lo, hi] : cfg.noise_bands)
        if (!(lo >= 0 && hi > lo && hi <= cfg.nyquist_rate_hz / 2))
            throw ConfigError("noise band must satisfy 0 <= lo < hi <= f_Nyq/2");
    if (cfg.segment_samples && sample_count(cfg) % cfg.segment_samples)
        throw ConfigError("record length must be a multiple of segment_samples");
}

std::size_t sample_count(const SignalConfig& cfg) {
    return static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.nyquist_rate_hz));
}

double rrc(double tau, double b) {
    if (std::abs(tau) < 1e-12) return 1.0 - b + 4.0 * b / kPi;
    if (b > 0 && std::abs(std::abs(tau) - 1.0 / (4.0 * b)) < 1e-9) {
        return b / std::sqrt(2.0) *
               ((1 + 2 / kPi) * std::sin(kPi / (4 * b)) + (1 - 2 / kPi) * std::cos(kPi / (4 * b)));
    }
    const double num = std::sin(kPi * tau * (1 - b)) + 4 * b * tau * std::cos(kPi * tau * (1 + b));
    const double den = kPi * tau * (1 - (4 * b * tau) * (4 * b * tau));
    return num / den;
}

double mean_power(const std::vector<double>& x) {
    if (x.empty()) return 0;
    double s = 0;
    for (double v : x) s += v * v;
    return s / static_cast<double>(x.size());
}

NyquistSignal synthesize_transmission(const TransmissionSpec& spec, double duration_s, double rate_hz,
                                      std::uint64_t seed) {
    validate(spec, rate_hz);
    if (!(duration_s > 0)) throw ConfigError("duration must be positive");
    const auto len = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
    NyquistSignal out{std::vector<double>(len, 0.0), rate_hz};
    if (spec.amplitude == 0 || len == 0) return out;

    Rng rng(seed);
    std::vector<double> in_phase, quadrature;
    if (spec.modulation == Modulation::AM) {
        in_phase = lowpass_message(len, rate_hz, spec.bandwidth_hz / 2, rng);
    } else {
        const int first = -kPulseSpan;
        const int last = static_cast<int>(std::ceil(duration_s / spec.symbol_period_s)) + kPulseSpan;
        const auto count = static_cast<std::size_t>(last - first + 1);
        std::vector<double> si(count), sq(count, 0.0);
        if (spec.modulation == Modulation::BPSK) {
            std::bernoulli_distribution coin(0.5);
            for (auto& v : si) v = coin(rng) ? 1.0 : -1.0;
        } else {
            // 16-QAM, independent rails, unit total power
            std::uniform_int_distribution<int> level(0, 3);
            const double s = 1.0 / std::sqrt(10.0);
            for (std::size_t k = 0; k < count; ++k) {
                si[k] = (2.0 * level(rng) - 3.0) * s;
                sq[k] = (2.0 * level(rng) - 3.0) * s;
            }
        }
        const auto lut = pulse_table(spec.excess_bandwidth);
        in_phase = pam_baseband(si, first, spec.symbol_period_s, rate_hz, len, *lut);
        if (spec.modulation == Modulation::QAM)
            quadrature = pam_baseband(sq, first, spec.symbol_period_s, rate_hz, len, *lut);
    }

    const double w = 2.0 * kPi * spec.carrier_hz / rate_hz;
    const double g = spec.amplitude * std::sqrt(2.0);
    for (std::size_t n = 0; n < len; ++n) {
        const double ph = w * static_cast<double>(n);
        double v = in_phase[n] * std::cos(ph);
        if (!quadrature.empty()) v -= quadrature[n] * std::sin(ph);
        out.samples[n] = g * v;
    }
    return out;
}

NyquistSignal white_noise(std::size_t n, double rate_hz, double variance, std::uint64_t seed) {
    NyquistSignal out{std::vector<double>(n, 0.0), rate_hz};
    if (variance <= 0) return out;
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(variance));
    for (auto& v : out.samples) v = g(rng);
    return out;
}

NyquistSignal compose_signal(const SignalConfig& cfg) {
    validate(cfg);
    const std::size_t len = sample_count(cfg);
    NyquistSignal out{std::vector<double>(len, 0.0), cfg.nyquist_rate_hz};
    const std::size_t seg = cfg.segment_samples ? cfg.segment_samples : len;
    for (std::size_t i = 0; i < cfg.transmissions.size(); ++i) {
        const std::uint64_t ts = child_seed(cfg.rng_seed, i + 1);
        for (std::size_t start = 0, s_idx = 0; start < len; start += seg, ++s_idx) {
            const std::uint64_t seed = cfg.segment_samples ? child_seed(ts, s_idx + 1) : ts;
            const auto s = synthesize_transmission(cfg.transmissions[i], static_cast<double>(seg) / cfg.nyquist_rate_hz,
                                                   cfg.nyquist_rate_hz, seed);
            for (std::size_t n = 0; n < seg; ++n) out.samples[start + n] += s.samples[n];
        }
    }
    if (!cfg.snr_db) return out;

    const double p_ref = cfg.reference_power ? *cfg.reference_power : mean_power(out.samples);
    const double variance = p_ref / std::pow(10.0, *cfg.snr_db / 10.0);
    if (variance <= 0) return out;
    const std::uint64_t noise_seed = child_seed(cfg.rng_seed, 0);

    if (cfg.noise_bands.empty()) {
        const auto noise = white_noise(len, cfg.nyquist_rate_hz, variance, noise_seed);
        for (std::size_t n = 0; n < len; ++n) out.samples[n] += noise.samples[n];
        return out;
    }

    // Shaped noise: mask a white realization in frequency, keeping the expected power at `variance`.
    std::vector<bool> keep(len, false);
    std::size_t kept = 0;
    for (std::size_t k = 0; k < len; ++k) {
        const double f = std::abs((k <= len / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(len)) *
                                  cfg.nyquist_rate_hz / static_cast<double>(len));
        for (const auto& [lo, hi] : cfg.noise_bands)
            if (f >= lo && f <= hi) keep[k] = true;
        kept += keep[k];
    }
    if (kept == 0) return out;
    const double white_var = variance * static_cast<double>(len) / static_cast<double>(kept);
    const auto white = white_noise(len, cfg.nyquist_rate_hz, white_var, noise_seed);
    std::vector<cplx> buf(white.samples.begin(), white.samples.end());
    auto spec = fft::forward(buf);
    for (std::size_t k = 0; k < len; ++k)
        if (!keep[k]) spec[k] = 0;
    const auto shaped = fft::inverse(spec);
    for (std::size_t n = 0; n < len; ++n) out.samples[n] += shaped[n].real() / static_cast<double>(len);
    return out;
}

bool DiamondSet::contains(double f, double alpha, double margin_hz) const {
    const double lo = std::max(0.0, f_low - margin_hz);
    const double hi = f_high + margin_hz;
    const double a = std::abs(f - alpha / 2);
    const double b = std::abs(f + alpha / 2);
    return a >= lo && a <= hi && b >= lo && b <= hi;
}

DiamondSet theoretical_support(const TransmissionSpec& spec, double f_nyq) {
    validate(spec, f_nyq);
    DiamondSet d;
    d.f_low = spec.carrier_hz - spec.bandwidth_hz / 2;
    d.f_high = spec.carrier_hz + spec.bandwidth_hz / 2;
    const double hf = spec.bandwidth_hz / 2, ha = spec.bandwidth_hz;
    d.diamonds = {{spec.carrier_hz, 0, hf, ha},
                  {-spec.carrier_hz, 0, hf, ha},
                  {0, 2 * spec.carrier_hz, hf, ha},
                  {0, -2 * spec.carrier_hz, hf, ha}};
    return d;
}

std::vector<CyclicFeature> theoretical_features(const TransmissionSpec& spec) {
    std::vector<CyclicFeature> out;
    // Balanced QAM has E[a^2] = 0, so its carrier feature vanishes.
    if (spec.modulation != Modulation::QAM) {
        out.push_back({0, 2 * spec.carrier_hz, "carrier"});
        out.push_back({0, -2 * spec.carrier_hz, "carrier"});
    }
    if (spec.modulation != Modulation::AM) {
        const double r = 1.0 / spec.symbol_period_s;
        for (double f : {spec.carrier_hz, -spec.carrier_hz})
            for (double a : {r, -r}) out.push_back({f, a, "symbol"});
    }
    return out;
}

std::vector<double> draw_carriers(int count, double bandwidth_hz, double f_nyq, Rng& rng) {
    const double lo = bandwidth_hz / 2, hi = f_nyq / 2 - bandwidth_hz / 2;
    if (count < 0 || (count > 0 && !(hi > lo))) throw ConfigError("no admissible carrier range");
    if (static_cast<double>(count) * bandwidth_hz >= hi - lo + bandwidth_hz)
        throw ConfigError("too many transmissions for the available band");
    std::uniform_real_distribution<double> u(lo, hi);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<double> c(count);
        for (auto& v : c) v = u(rng);
        bool ok = true;
        for (double v : c)
            if (!(v > lo)) ok = false;
        for (int i = 0; i < count && ok; ++i)
            for (int j = i + 1; j < count && ok; ++j)
                if (std::abs(c[i] - c[j]) <= bandwidth_hz) ok = false;
        if (ok) return c;
    }
    throw ConfigError("could not draw non-overlapping carriers");
}

} // namespace subcyclo
