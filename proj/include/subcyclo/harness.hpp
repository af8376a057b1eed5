#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subcyclo/cyclic_spectrum.hpp"
#include "subcyclo/detect.hpp"
#include "subcyclo/recovery.hpp"
#include "subcyclo/sampler.hpp"
#include "subcyclo/signal.hpp"

namespace subcyclo {

// Template for the per-trial scene. Carriers are drawn per trial unless fixed.
struct Scenario {
    double nyquist_rate_hz = 1e9;
    int n_sig = 3;
    double bandwidth_hz = 18e6;
    double excess_bandwidth = 0.1;
    Modulation modulation = Modulation::BPSK;
    double amplitude = 1.0;
    std::vector<double> carriers_hz;
    // Synthesize each analysis window as its own snapshot (time origin at the window start)
    // instead of one continuous record.
    bool snapshot_windows = true;
};

struct FrontEndSpec {
    std::string kind = "mwc";  // "mwc" or "multicoset"
    int n_slices = 43;
};

struct SweepAxes {
    std::vector<std::optional<double>> snr_db{std::nullopt};  // nullopt: noiseless
    std::vector<int> channels{10};
    std::vector<int> p{100};
    int q = 60;
    int trials = 200;
};

enum class DetectorChoice { Cyclo, Energy, Both };
enum class ExperimentKind { Detection, Roc };

std::string to_string(DetectorChoice d);
DetectorChoice detector_from_string(const std::string& s);
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
    Scenario scenario;
    FrontEndSpec front_end;
    RecoveryOptions recovery;  // k = 0 means 2 * n_sig
    DetectParams detection;
    SweepAxes sweep;
    DetectorChoice detector = DetectorChoice::Both;
    ExperimentKind kind = ExperimentKind::Detection;
    std::uint64_t master_seed = 0;
    int workers = 0;              // 0: hardware concurrency
    double match_resolutions = 10;  // detection iff |f_hat - f| < this many delta
};

void validate(const ExperimentConfig& cfg);

// One point of the sweep grid.
struct SweepPoint {
    std::optional<double> snr_db;
    int channels = 0;
    int p = 0;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

// Everything a single trial produced. Failed trials carry the message and no reports.
struct TrialResult {
    std::vector<double> carriers_hz;
    std::optional<DetectionReport> cyclo, energy;
    double delta = 0;
    double runtime_s = 0;
    std::string error;
};

// Scene, front end and recovery settings of one trial; shared by the pipeline and the CLI.
struct TrialScene {
    SignalConfig signal;
    FrontEnd front_end;
    RecoveryOptions recovery;
    int p = 0, q = 0;
};

TrialScene make_scene(const ExperimentConfig& cfg, const SweepPoint& pt, int trial);

struct PipelineOutput {
    CyclicSpectrumGrid grid;
    RecoveredSlices slices;
    PowerSpectrum power;
    std::optional<DetectionReport> cyclo, energy;
};

PipelineOutput run_pipeline(const TrialScene& scene, const DetectParams& params, DetectorChoice detector);

TrialResult run_trial(const ExperimentConfig& cfg, const SweepPoint& pt, int trial);

struct MetricsRow {
    SweepPoint point;
    std::string detector;
    int trials = 0;
    int failures = 0;
    double pd = 0;
    double mean_false_alarms = 0;
    double nmse = 0;  // mean normalized squared carrier error over detected carriers, in delta^2
    double mean_bandwidth_hz = 0;
    double runtime_s = 0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
    std::uint64_t master_seed = 0;
};

// Matching and aggregation; exposed for tests.
struct Match {
    int detected = 0;
    int false_alarms = 0;
    double sq_err = 0;  // sum over detected carriers of ((f_hat - f) / delta)^2
    double bw_sum = 0;
};
Match match_report(const std::vector<double>& truth, const DetectionReport& rep, double tol_hz);

MetricsTable run_monte_carlo(const ExperimentConfig& cfg);

// Threshold sweep from H1 / H0 statistic samples.
struct RocPoint {
    double threshold, pd, pfa;
};
std::vector<RocPoint> roc_curve(const std::vector<double>& h1, const std::vector<double>& h0);
// pd at the smallest threshold whose pfa does not exceed `pfa`.
double pd_at_pfa(const std::vector<RocPoint>& roc, double pfa);

struct RocSeries {
    SweepPoint point;
    std::string detector;
    std::vector<RocPoint> curve;
    int failures = 0;
};

// Single transmission present (H1) or removed at the same noise level (H0); statistics from the
// single-cycle detector at alpha = 2 f and from band energy of the recovered power spectrum.
std::vector<RocSeries> run_roc(const ExperimentConfig& cfg);

// Writes <stem>.csv and <stem>.json. Throws ConfigError on an empty table.
void emit_results(const MetricsTable& table, const std::string& stem);
void emit_roc(const std::vector<RocSeries>& series, const std::string& stem);

// Runs `fn(i)` for i in [0, n) on `workers` threads.
template <class F>
void parallel_for(int n, int workers, F&& fn);

} // namespace subcyclo

#include "subcyclo/detail/parallel.hpp"
