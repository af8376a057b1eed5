#include "subcyclo/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace subcyclo {

double dc_mask(double alpha_hz, double sigma_alpha) {
    if (!(sigma_alpha > 0)) return 1.0;
    return 1.0 - std::exp(-alpha_hz * alpha_hz / (2 * sigma_alpha * sigma_alpha));
}

CyclicSpectrumGrid preprocess(const CyclicSpectrumGrid& grid, double sigma_alpha) {
    CyclicSpectrumGrid out = grid;
    out.scale_by_alpha([&](double a) { return dc_mask(a, sigma_alpha); });
    return out;
}

PeakSet threshold_peaks(const std::vector<double>& profile, double resolution_hz, double tau_rel) {
    PeakSet out;
    if (profile.empty()) return out;
    const double mx = *std::max_element(profile.begin(), profile.end());
    if (!(mx > 0)) return out;
    const double thr = tau_rel * mx;
    const std::size_t n = profile.size();
    for (std::size_t a = 0; a < n; ++a) {
        const double v = profile[a];
        if (v <= 0 || v < thr) continue;
        const bool left = a == 0 || v >= profile[a - 1];
        const bool right = a + 1 == n || v > profile[a + 1];
        if (left && right) out.push_back({static_cast<double>(a) * resolution_hz, 0.0, v});
    }
    return out;
}

namespace {

double dist2(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

} // namespace

// Seeding is deterministic (largest magnitude first, then farthest point), so `seed` only
// breaks the rare tie when an emptied cluster has to be re-seeded.
Clustering cluster_kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) throw ConfigError("k-means needs 1 <= k <= point count");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return points[a].x != points[b].x ? points[a].x < points[b].x : points[a].y < points[b].y;
    });
    std::vector<Point2> p(n);
    for (int i = 0; i < n; ++i) p[i] = points[order[i]];

    std::vector<Point2> c;
    int first = 0;
    for (int i = 1; i < n; ++i)
        if (p[i].y > p[first].y) first = i;
    c.push_back(p[first]);
    std::vector<double> dmin(n);
    for (int i = 0; i < n; ++i) dmin[i] = dist2(p[i], c[0]);
    while (static_cast<int>(c.size()) < k) {
        int far = 0;
        for (int i = 1; i < n; ++i)
            if (dmin[i] > dmin[far]) far = i;
        c.push_back(p[far]);
        for (int i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], dist2(p[i], c.back()));
    }

    std::vector<int> lab(n, -1);
    int reseeds = 0;
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = dist2(p[i], c[0]);
            for (int j = 1; j < k; ++j) {
                const double d = dist2(p[i], c[j]);
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (lab[i] != best) {
                lab[i] = best;
                changed = true;
            }
        }
        std::vector<Point2> sum(k, {0, 0});
        std::vector<int> cnt(k, 0);
        for (int i = 0; i < n; ++i) {
            sum[lab[i]].x += p[i].x;
            sum[lab[i]].y += p[i].y;
            ++cnt[lab[i]];
        }
        bool empty = false;
        for (int j = 0; j < k; ++j) {
            if (cnt[j] == 0) {
                empty = true;
                continue;
            }
            c[j] = {sum[j].x / cnt[j], sum[j].y / cnt[j]};
        }
        if (empty && reseeds < 10) {
            ++reseeds;
            // Move each empty center to the point worst served by its current center.
            for (int j = 0; j < k; ++j) {
                if (cnt[j]) continue;
                int far = 0;
                double fd = -1;
                for (int i = 0; i < n; ++i) {
                    const double d = dist2(p[i], c[lab[i]]);
                    if (d > fd || (d == fd && ((seed >> (i % 64)) & 1))) {
                        fd = d;
                        far = i;
                    }
                }
                c[j] = p[far];
                lab[far] = j;
            }
            changed = true;
        }
        if (!changed) break;
    }

    Clustering out;
    out.centers = c;
    out.labels.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        out.labels[order[i]] = lab[i];
        out.wcss += dist2(p[i], c[lab[i]]);
    }
    return out;
}

namespace {

int distinct_count(const std::vector<Point2>& points) {
    std::vector<std::pair<double, double>> v;
    for (const auto& p : points) v.emplace_back(p.x, p.y);
    std::sort(v.begin(), v.end());
    return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
}

} // namespace

std::vector<double> distortion_curve(const std::vector<Point2>& points, int k_max) {
    std::vector<double> w;
    const int kmax = std::min(k_max, distinct_count(points));
    for (int k = 1; k <= kmax; ++k) w.push_back(cluster_kmeans(points, k, 0).wcss);
    return w;
}

int choose_k_elbow(const std::vector<Point2>& points, int k_max, bool log_scale, double tight_spread) {
    if (points.empty()) throw ConfigError("elbow needs at least one point");
    const int nd = distinct_count(points);
    const int kmax = std::min(k_max, nd);
    if (kmax <= 1) return 1;
    const std::vector<double> w = distortion_curve(points, std::min(kmax + 1, nd));
    const double n = static_cast<double>(points.size());
    if (std::sqrt(w[0] / n) < tight_spread) return 1;
    auto at = [&](int k) { return k <= static_cast<int>(w.size()) ? w[k - 1] : w.back(); };
    // Distortion below a 0.05 B_max spread per point is treated as resolved.
    const double floor = n * 0.05 * 0.05;
    auto f = [&](int k) { return log_scale ? std::log(std::max(at(k), floor)) : at(k); };
    int best = 2;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= kmax; ++k) {
        const double d2 = f(k - 1) - 2 * f(k) + f(k + 1);
        if (d2 > best_val) {
            best_val = d2;
            best = k;
        }
    }
    return best;
}

std::vector<Point2> cluster_features(const PeakSet& peaks, double b_max_hz) {
    double mx = 0;
    for (const auto& p : peaks) mx = std::max(mx, p.magnitude);
    std::vector<Point2> out;
    for (const auto& p : peaks) out.push_back({p.alpha_hz / b_max_hz, mx > 0 ? p.magnitude / mx : 0.0});
    return out;
}

PeakSet mirror_peaks(const PeakSet& peaks) {
    PeakSet out;
    for (const auto& p : peaks) {
        out.push_back(p);
        if (p.alpha_hz != 0) out.push_back({-p.alpha_hz, -p.f_hz, p.magnitude});
    }
    return out;
}

double estimate_bandwidth(const CyclicSpectrumGrid& grid, double alpha_hz, const DetectParams& params) {
    const double delta = grid.meta().delta();
    const long a = std::lround(std::abs(alpha_hz) / delta);
    const long nq = static_cast<long>(grid.meta().n) * grid.meta().q;
    const long half = static_cast<long>(std::ceil(params.b_max_hz / delta));
    // Cells on this alpha row share the parity of alpha_bin + N*Q.
    const long parity = ((a + nq) % 2 + 2) % 2;
    std::vector<long> fh;
    for (long f = -2 * half; f <= 2 * half; ++f)
        if (((f % 2) + 2) % 2 == parity) fh.push_back(f);
    std::vector<double> mag(fh.size());
    for (std::size_t i = 0; i < fh.size(); ++i) mag[i] = std::abs(grid.value(a, fh[i]));
    const int w = std::max(1, params.edge_smoothing);
    std::vector<double> sm(mag.size(), 0.0);
    for (std::size_t i = 0; i < mag.size(); ++i) {
        double s = 0;
        int c = 0;
        for (int d = -(w / 2); d <= w / 2; ++d) {
            const long j = static_cast<long>(i) + d;
            if (j < 0 || j >= static_cast<long>(mag.size())) continue;
            s += mag[j];
            ++c;
        }
        sm[i] = s / c;
    }
    long peak = -1;
    for (std::size_t i = 0; i < fh.size(); ++i) {
        if (std::abs(fh[i]) * delta / 2 > params.b_max_hz / 2) continue;
        if (peak < 0 || sm[i] > sm[peak]) peak = static_cast<long>(i);
    }
    if (peak < 0 || !(sm[peak] > 0)) return 0;
    const double thr = params.edge_fraction * sm[peak];
    long lo = peak, hi = peak;
    while (lo > 0 && sm[lo - 1] >= thr) --lo;
    while (hi + 1 < static_cast<long>(sm.size()) && sm[hi + 1] >= thr) ++hi;
    return static_cast<double>(hi - lo + 1) * delta;
}

DetectionReport estimate_report(const PeakSet& peaks, const Clustering& clusters, const CyclicSpectrumGrid& grid,
                                const DetectParams& params) {
    DetectionReport rep;
    const int k = static_cast<int>(clusters.centers.size());
    rep.clusters = k;
    if (peaks.empty() || k == 0) return rep;
    if (clusters.labels.size() != peaks.size()) throw ConfigError("cluster labels do not match the peak set");

    struct Cand {
        double alpha, mag;
        int cluster;
    };
    std::vector<Cand> positive;
    int non_dc = 0;
    for (int j = 0; j < k; ++j) {
        if (std::abs(clusters.centers[j].x) < params.sigma_factor) {
            ++rep.dc_clusters;
            continue;
        }
        int best = -1;
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            if (clusters.labels[i] != j) continue;
            if (best < 0 || peaks[i].magnitude > peaks[best].magnitude ||
                (peaks[i].magnitude == peaks[best].magnitude && std::abs(peaks[i].alpha_hz) < std::abs(peaks[best].alpha_hz)))
                best = static_cast<int>(i);
        }
        if (best < 0) continue;
        ++non_dc;
        if (peaks[best].alpha_hz > 0) positive.push_back({peaks[best].alpha_hz, peaks[best].magnitude, j});
    }
    const bool mirrored = std::any_of(peaks.begin(), peaks.end(), [](const Peak& q) { return q.alpha_hz < 0; });
    rep.asymmetric = mirrored && non_dc != 2 * static_cast<int>(positive.size());

    std::sort(positive.begin(), positive.end(), [](const Cand& a, const Cand& b) { return a.alpha < b.alpha; });
    std::vector<Cand> kept;
    for (const auto& c : positive) {
        if (!kept.empty() && (c.alpha - kept.back().alpha) / 2 < params.merge_fraction * params.b_max_hz) {
            rep.merged = true;
            if (c.mag > kept.back().mag) kept.back() = c;
            continue;
        }
        kept.push_back(c);
    }
    for (const auto& c : kept) {
        DetectedTransmission t;
        t.peak_alpha_hz = c.alpha;
        t.carrier_hz = c.alpha / 2;
        t.cluster_id = c.cluster;
        t.bandwidth_hz = estimate_bandwidth(grid, c.alpha, params);
        rep.transmissions.push_back(t);
    }
    rep.n_sig_hat = static_cast<int>(rep.transmissions.size());
    return rep;
}

DetectionReport detect_transmissions(const CyclicSpectrumGrid& grid, const DetectParams& params) {
    const CyclicSpectrumGrid g = preprocess(grid, params.sigma_factor * params.b_max_hz);
    PeakSet peaks = threshold_peaks(profile_at_zero_f(g), g.meta().delta(), params.tau_rel);
    if (params.mirror) peaks = mirror_peaks(peaks);
    if (peaks.empty()) return {};
    const auto pts = cluster_features(peaks, params.b_max_hz);
    const int k = choose_k_elbow(pts, params.k_max, params.log_elbow, params.tight_spread);
    const Clustering cl = cluster_kmeans(pts, k, params.seed);
    return estimate_report(peaks, cl, g, params);
}

double single_cycle_statistic(const CyclicSpectrumGrid& grid, double alpha0_hz, double band_hz) {
    const double delta = grid.meta().delta();
    const long a = std::lround(alpha0_hz / delta);
    const long lim = static_cast<long>(std::floor(2 * band_hz / delta));
    double s = 0;
    for (long f = -lim; f <= lim; ++f) s += std::norm(grid.value(a, f));
    return s;
}

bool single_cycle_detect(const CyclicSpectrumGrid& grid, double alpha0_hz, double band_hz, double threshold) {
    return single_cycle_statistic(grid, alpha0_hz, band_hz) > threshold;
}

double band_energy(const PowerSpectrum& ps, double lo_hz, double hi_hz) {
    double e = 0;
    for (std::size_t b = 0; b < ps.psd.size(); ++b) {
        const double f = std::abs(ps.f_start + static_cast<double>(b) * ps.delta);
        if (f >= lo_hz && f <= hi_hz) e += ps.psd[b] * ps.delta;
    }
    return e;
}

std::vector<bool> energy_detect_baseline(const PowerSpectrum& ps, const std::vector<std::pair<double, double>>& bands,
                                         double threshold) {
    std::vector<bool> out;
    for (const auto& [lo, hi] : bands) out.push_back(band_energy(ps, lo, hi) > threshold);
    return out;
}

DetectionReport energy_estimate_report(const PowerSpectrum& ps, const DetectParams& params) {
    DetectionReport rep;
    double mx = 0;
    for (std::size_t b = 0; b < ps.psd.size(); ++b)
        if (ps.f_start + static_cast<double>(b) * ps.delta > 0) mx = std::max(mx, ps.psd[b]);
    if (!(mx > 0)) return rep;
    const double thr = params.energy_tau_rel * mx;
    struct Run {
        double lo, hi, energy;
    };
    std::vector<Run> runs;
    bool open = false;
    for (std::size_t b = 0; b < ps.psd.size(); ++b) {
        const double f = ps.f_start + static_cast<double>(b) * ps.delta;
        const bool on = f > 0 && ps.psd[b] >= thr;
        if (on && !open) runs.push_back({f, f, 0});
        if (on) {
            runs.back().hi = f;
            runs.back().energy += ps.psd[b];
        }
        open = on;
    }
    std::vector<Run> kept;
    for (const auto& r : runs) {
        const double c = (r.lo + r.hi) / 2;
        if (!kept.empty() && c - (kept.back().lo + kept.back().hi) / 2 < params.merge_fraction * params.b_max_hz) {
            rep.merged = true;
            kept.back().hi = r.hi;
            kept.back().energy += r.energy;
            continue;
        }
        kept.push_back(r);
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
        DetectedTransmission t;
        t.carrier_hz = (kept[i].lo + kept[i].hi) / 2;
        t.bandwidth_hz = kept[i].hi - kept[i].lo + ps.delta;
        t.peak_alpha_hz = 0;
        t.cluster_id = static_cast<int>(i);
        rep.transmissions.push_back(t);
    }
    rep.n_sig_hat = static_cast<int>(rep.transmissions.size());
    rep.clusters = rep.n_sig_hat;
    return rep;
}

} // namespace subcyclo
