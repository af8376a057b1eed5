#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "subcyclo/cyclic_spectrum.hpp"
#include "subcyclo/recovery.hpp"

namespace subcyclo {

struct DetectParams {
    double b_max_hz = 18e6;
    double sigma_factor = 1.5;      // DC mask width sigma_alpha = sigma_factor * B_max
    double tau_rel = 0.25;          // peak threshold relative to the profile maximum
    double edge_fraction = 0.1;     // band edge where the ridge drops below this fraction
    int edge_smoothing = 3;         // moving-average length (cells) along the ridge
    int k_max = 10;                 // largest cluster count tried by the elbow
    double tight_spread = 0.5;      // RMS spread (normalized units) below which k = 1
    double merge_fraction = 0.5;    // merge carriers closer than merge_fraction * B_max
    bool log_elbow = true;          // second difference of log distortion
    bool mirror = false;            // cluster the mirrored (-alpha) peaks too
    double energy_tau_rel = 0.5;    // energy baseline threshold relative to the spectrum maximum
    std::uint64_t seed = 0;         // k-means empty-cluster reseeding
};

double dc_mask(double alpha_hz, double sigma_alpha);
CyclicSpectrumGrid preprocess(const CyclicSpectrumGrid& grid, double sigma_alpha);

struct Peak {
    double alpha_hz, f_hz, magnitude;
};
using PeakSet = std::vector<Peak>;

// Local maxima of a profile sampled at alpha = index * resolution, kept if >= tau_rel * max.
PeakSet threshold_peaks(const std::vector<double>& profile, double resolution_hz, double tau_rel);

struct Point2 {
    double x, y;
};

struct Clustering {
    std::vector<int> labels;  // per input point
    std::vector<Point2> centers;
    double wcss = 0;
};

Clustering cluster_kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed);
std::vector<double> distortion_curve(const std::vector<Point2>& points, int k_max);
int choose_k_elbow(const std::vector<Point2>& points, int k_max, bool log_scale = true, double tight_spread = 0.5);

struct DetectedTransmission {
    double carrier_hz = 0, bandwidth_hz = 0, peak_alpha_hz = 0;
    int cluster_id = -1;
};

struct DetectionReport {
    int n_sig_hat = 0;
    std::vector<DetectedTransmission> transmissions;
    int clusters = 0;
    int dc_clusters = 0;
    bool asymmetric = false;
    bool merged = false;
};

// Peaks are clustered on (alpha / B_max, magnitude / max magnitude).
std::vector<Point2> cluster_features(const PeakSet& peaks, double b_max_hz);
PeakSet mirror_peaks(const PeakSet& peaks);

DetectionReport estimate_report(const PeakSet& peaks, const Clustering& clusters, const CyclicSpectrumGrid& grid,
                                const DetectParams& params);

// Band width at a ridge alpha: edges where the smoothed magnitude drops below edge_fraction of its peak.
double estimate_bandwidth(const CyclicSpectrumGrid& grid, double alpha_hz, const DetectParams& params);

// Preprocess, profile at f = 0, threshold, cluster, report.
DetectionReport detect_transmissions(const CyclicSpectrumGrid& grid, const DetectParams& params);

double single_cycle_statistic(const CyclicSpectrumGrid& grid, double alpha0_hz, double band_hz);
bool single_cycle_detect(const CyclicSpectrumGrid& grid, double alpha0_hz, double band_hz, double threshold);

// Energy of a recovered power spectrum over [lo, hi] Hz (positive and mirrored negative side).
double band_energy(const PowerSpectrum& ps, double lo_hz, double hi_hz);
std::vector<bool> energy_detect_baseline(const PowerSpectrum& ps, const std::vector<std::pair<double, double>>& bands,
                                         double threshold);

// Carriers and widths from contiguous runs of the positive-frequency spectrum above
// energy_tau_rel * max.
DetectionReport energy_estimate_report(const PowerSpectrum& ps, const DetectParams& params);

} // namespace subcyclo
