#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subcyclo/rng.hpp"
#include "subcyclo/types.hpp"

namespace subcyclo {

enum class Modulation { AM, BPSK, QAM };

std::string to_string(Modulation m);
Modulation modulation_from_string(const std::string& s);

struct TransmissionSpec {
    double carrier_hz = 0;
    double bandwidth_hz = 0;
    double symbol_period_s = 0;
    double excess_bandwidth = 0;
    Modulation modulation = Modulation::BPSK;
    double amplitude = 1;
};

// Fills in the symbol period from T = (1 + gamma) / B.
TransmissionSpec make_transmission(double carrier_hz, double bandwidth_hz, double excess_bandwidth,
                                   Modulation modulation, double amplitude = 1.0);

// Throws ConfigError naming the violated bound. b_max <= 0 skips the bandwidth cap.
void validate(const TransmissionSpec& spec, double f_nyq, double b_max = 0);

struct SignalConfig {
    std::vector<TransmissionSpec> transmissions;
    double nyquist_rate_hz = 0;
    std::optional<double> snr_db;  // absent: noiseless
    double duration_s = 0;
    std::uint64_t rng_seed = 0;
    // Noise power is referenced to this instead of the realized signal power when set.
    // Lets a scene with a transmission removed keep the same noise floor.
    std::optional<double> reference_power;
    // Optional noise pass bands [lo, hi] in Hz (positive frequencies, mirrored). Empty: white.
    std::vector<std::pair<double, double>> noise_bands;
    // 0: one continuous record. Otherwise the transmissions are synthesized independently on
    // consecutive segments of this many samples, each with its time origin at the segment start.
    std::size_t segment_samples = 0;
};

void validate(const SignalConfig& cfg);
std::size_t sample_count(const SignalConfig& cfg);

struct NyquistSignal {
    std::vector<double> samples;
    double rate_hz = 0;
};

NyquistSignal synthesize_transmission(const TransmissionSpec& spec, double duration_s, double rate_hz,
                                      std::uint64_t seed);
NyquistSignal compose_signal(const SignalConfig& cfg);

// Zero-mean white Gaussian noise with the given variance.
NyquistSignal white_noise(std::size_t n, double rate_hz, double variance, std::uint64_t seed);

double mean_power(const std::vector<double>& x);

// Unit-energy root-raised-cosine pulse in symbol-normalized time.
double rrc(double tau, double rolloff);

// Support of one transmission in the (f, alpha) plane: four diamonds.
struct Diamond {
    double f_center, alpha_center;
    double half_f, half_alpha;  // |f - fc| / half_f + |alpha - ac| / half_alpha <= 1
};

struct DiamondSet {
    double f_low = 0, f_high = 0;  // positive band edges f^(1), f^(2)
    std::vector<Diamond> diamonds;
    // Closed membership test, optionally dilated by `margin_hz` on each band edge.
    bool contains(double f, double alpha, double margin_hz = 0) const;
};

DiamondSet theoretical_support(const TransmissionSpec& spec, double f_nyq);

struct CyclicFeature {
    double f_hz;
    double alpha_hz;
    std::string kind;  // "carrier" or "symbol"
};

std::vector<CyclicFeature> theoretical_features(const TransmissionSpec& spec);

// Carriers uniform in the admissible range, redrawn until bands do not overlap.
std::vector<double> draw_carriers(int count, double bandwidth_hz, double f_nyq, Rng& rng);

} // namespace subcyclo
