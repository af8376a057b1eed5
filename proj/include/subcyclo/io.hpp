#pragma once

#include <string>

#include <json.hpp>

#include "subcyclo/correlation.hpp"
#include "subcyclo/cyclic_spectrum.hpp"
#include "subcyclo/detect.hpp"
#include "subcyclo/harness.hpp"
#include "subcyclo/recovery.hpp"
#include "subcyclo/sampler.hpp"
#include "subcyclo/signal.hpp"

namespace subcyclo::io {

using nlohmann::json;

// JSON conversions. Readers throw ConfigError on missing or mistyped fields.
json to_json(const TransmissionSpec& t);
TransmissionSpec transmission_from_json(const json& j);
json to_json(const SignalConfig& c);
SignalConfig signal_config_from_json(const json& j);

json to_json(const FrontEnd& fe);
FrontEnd front_end_from_json(const json& j);

json to_json(const RecoveryOptions& r);
RecoveryOptions recovery_from_json(const json& j, RecoveryOptions base = {});
json to_json(const DetectParams& d);
DetectParams detect_params_from_json(const json& j, DetectParams base = {});

json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const json& j);

json to_json(const DetectionReport& r);
json to_json(const SupportSet& s);
json support_json(const RecoveredSlices& rec);

json read_json(const std::string& path);
void write_json(const json& j, const std::string& path);

// Little-endian float64 samples in <stem>.f64, sidecar <stem>.json {rate_hz, length}.
void write_signal(const NyquistSignal& x, const std::string& stem);
NyquistSignal read_signal(const std::string& stem);

// Interleaved complex64 [channel][sample] in <stem>.c64, sidecar with M, L, f_s and the front end.
void write_channels(const ChannelSamples& z, const FrontEnd& fe, const std::string& stem);
ChannelSamples read_channels(const std::string& stem, FrontEnd* fe = nullptr);

// complex64 blob [q_a][q_f][i][j] (row-major M x M blocks) in <stem>.c64, header {M, Q, P, f_s, N}.
void write_tensor(const CorrelationTensor& t, const std::string& stem);
CorrelationTensor read_tensor(const std::string& stem);

// Recovered slot tensors in the same blob layout, N x N blocks zero off support.
void write_recovered(const RecoveredSlices& rec, const SelectionLayout& layout, const std::string& stem);

// Grid cells as records {alpha_bin int64, f_half int64, re f32, im f32} plus a JSON header.
void write_grid(const CyclicSpectrumGrid& g, const std::string& stem);
CyclicSpectrumGrid read_grid(const std::string& stem);

} // namespace subcyclo::io
