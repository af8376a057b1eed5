// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Usage: acceptance [criterion ...]   (default: all). Exit status 1 if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "subcyclo/cyclic_spectrum.hpp"
#include "subcyclo/harness.hpp"
#include "subcyclo/recovery.hpp"
#include "subcyclo/rng.hpp"
#include "subcyclo/sampler.hpp"

using namespace subcyclo;

namespace {

constexpr double kRate = 1e9;

template <class... A>
void note(const char* fmt, A... a) {
    std::printf("    ");
    if constexpr (sizeof...(A) == 0)
        std::fputs(fmt, stdout);
    else
        std::printf(fmt, a...);
    std::printf("\n");
    std::fflush(stdout);
}

CMatrix gaussian(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> g;
    CMatrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a;
}

SensingMatrix wrap(const CMatrix& a) { return {a, kRate / static_cast<double>(a.cols()), static_cast<int>(a.cols())}; }

std::vector<oracle::Pos> to_pos(const std::vector<int>& slots, const SelectionLayout& lay) {
    std::vector<oracle::Pos> out;
    for (int s : slots) {
        const int r = lay.slots[s].row, c = lay.slots[s].col;
        out.push_back({r, c, oracle::on_diag(r, c), oracle::on_anti(r, c, lay.n)});
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

bool rate_bounds() {
    const auto sp = min_rate_bounds(3, 18e6, kRate, kRate / 43, true);
    const auto full = min_rate_bounds(3, 18e6, kRate, kRate / 43, false);
    note("sparse: f_min = %.6f MHz, M_min = %d; non-sparse: f_min = %.6f MHz", sp.f_min / 1e6, sp.m_min,
         full.f_min / 1e6);
    return std::abs(sp.f_min - 172.8e6) < 1e-6 && sp.m_min == 10 && std::abs(full.f_min - 0.8 * kRate) < 1e-6;
}

// Two planted transmissions as slot tensors on a spark-verified multicoset front end; every shift
// 1..Q-1 must come back with the exact support and a grid matching the planted one.
bool noiseless_recovery() {
    const int n = 16, m = 8, q = 32, k = 4, seeds = 20;
    const auto lay = selection_layout(n);
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        std::uint64_t s2 = seed;
        SensingMatrix a;
        do a = multicoset_matrix(random_multicoset_config(n, m, s2++), 1 / kRate);
        while (!spark_lower_check(a, m));
        Rng rng(child_seed(seed, 77));
        std::uniform_int_distribution<int> pick(0, n / 2 - 1);
        const int k1 = pick(rng);
        int k2;
        do k2 = pick(rng);
        while (k2 == k1);
        // each real transmission occupies slice k and its mirror n-1-k
        std::vector<int> sup;
        for (int kk : {k1, k2}) {
            const int mm = n - 1 - kk;
            for (auto [r, c] : {std::pair{kk, kk}, {mm, mm}, {kk, mm}, {mm, kk}}) sup.push_back(lay.slot_at(r, c));
        }
        std::sort(sup.begin(), sup.end());
        const auto op = build_operator(a, lay);

        CorrelationTensor t;
        t.m = m;
        t.q = q;
        t.p = 1;
        t.f_s = a.f_s;
        t.n_slices = n;
        t.data.assign(t.block_count() * m * m, cplx(0));
        RecoveredSlices truth;
        truth.n = n;
        truth.q = q;
        truth.p = 1;
        truth.m = m;
        truth.f_s = a.f_s;
        std::normal_distribution<double> g;
        RecoveryOptions ro;
        ro.k = k;
        for (int qa = 1; qa < q; ++qa) {
            ro.shifts.push_back(qa);
            RecoveredPiece piece;
            piece.begin = 0;
            piece.end = q - qa;
            piece.support = make_support(sup, lay, k);
            piece.coeffs = CMatrix(sup.size(), q - qa);
            for (int qf = 0; qf + qa < q; ++qf) {
                CMatrix rx = CMatrix::Zero(n, n);
                for (std::size_t i = 0; i < sup.size(); ++i) {
                    const cplx c(g(rng), g(rng));
                    piece.coeffs(static_cast<Eigen::Index>(i), qf) = c;
                    rx(lay.slots[sup[i]].row, lay.slots[sup[i]].col) = c;
                }
                t.at(qa, qf) = a.a * rx * a.a.adjoint();
            }
            truth.shifts.push_back({qa, {piece}});
        }
        const auto rec = recover_slices(t, op, ro);

        int wrong = 0;
        std::vector<int> bad_shifts;
        for (const auto& sr : rec.shifts)
            for (const auto& p : sr.pieces)
                if (p.support.slots != sup) {
                    ++wrong;
                    bad_shifts.push_back(sr.qa);
                }
        const auto meta = grid_meta(t);
        const auto got = assemble(rec, lay, meta);
        const auto want = assemble(truth, lay, meta);
        double err = 0, ref = 0;
        for (const auto& e : want.entries()) {
            err += std::norm(got.value(e.alpha_bin, e.f_half) - e.value);
            ref += std::norm(e.value);
        }
        for (const auto& e : got.entries())
            if (!want.has(e.alpha_bin, e.f_half)) err += std::norm(e.value);
        const double nmse = err / ref;
        const bool pass = wrong == 0 && nmse < 1e-6;
        ok += pass;
        if (!pass) {
            std::string s;
            for (int b : bad_shifts) s += " " + std::to_string(b);
            note("seed %2lu: slices %d,%d, NMSE %.2e, wrong support at q_a =%s", static_cast<unsigned long>(seed), k1,
                 k2, nmse, s.c_str());
        }
    }
    note("N = %d, M = %d, K = %d, Q = %d: %d/%d seeds exact", n, m, k, q, ok, seeds);
    return ok == seeds;
}

ExperimentConfig desk_experiment(std::uint64_t seed) {
    ExperimentConfig cfg;  // desk defaults: N = 43, Q = 60, P = 100, three BPSK of 18 MHz, random carriers
    cfg.master_seed = seed;
    return cfg;
}

bool channel_sweep() {
    auto cfg = desk_experiment(2024);
    cfg.sweep.channels = {6, 7, 8, 9, 10, 11, 12, 13, 14};
    cfg.sweep.trials = 100;
    cfg.detector = DetectorChoice::Cyclo;
    const auto t0 = std::chrono::steady_clock::now();
    const auto table = run_monte_carlo(cfg);
    std::map<int, double> pd;
    for (const auto& r : table.rows) {
        pd[r.point.channels] = r.pd;
        note("M = %2d: pd %.3f, false alarms %.2f, failures %d", r.point.channels, r.pd, r.mean_false_alarms,
             r.failures);
    }
    note("%.0f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    bool ok = pd.at(10) - pd.at(8) >= 0.2;
    for (int m = 10; m <= 14; ++m) ok = ok && pd.at(m) >= 0.95;
    return ok;
}

struct TrialSet {
    std::vector<TrialResult> results;
};

TrialSet run_trials(const ExperimentConfig& cfg, const SweepPoint& pt) {
    TrialSet s;
    s.results.resize(cfg.sweep.trials);
    parallel_for(cfg.sweep.trials, cfg.workers, [&](int i) { s.results[i] = run_trial(cfg, pt, i); });
    return s;
}

struct Tally {
    double pd = 0, fa = 0;
    int failures = 0;
};

Tally tally(const TrialSet& s, bool cyclo, double match_resolutions) {
    Tally t;
    int truths = 0, n = 0;
    for (const auto& r : s.results) {
        const auto& rep = cyclo ? r.cyclo : r.energy;
        if (!r.error.empty() || !rep) {
            ++t.failures;
            continue;
        }
        const auto m = match_report(r.carriers_hz, *rep, match_resolutions * r.delta);
        t.pd += m.detected;
        t.fa += m.false_alarms;
        truths += static_cast<int>(r.carriers_hz.size());
        ++n;
    }
    t.pd = truths ? t.pd / truths : 0;
    t.fa = n ? t.fa / n : 0;
    return t;
}

// Shared between criteria 4 and 5.
std::map<double, TrialSet> snr_trials;

const TrialSet& trials_at(double snr) {
    auto it = snr_trials.find(snr);
    if (it != snr_trials.end()) return it->second;
    auto cfg = desk_experiment(4242);
    cfg.sweep.trials = 200;
    cfg.sweep.snr_db = {snr};
    cfg.detector = DetectorChoice::Both;
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = snr_trials[snr] = run_trials(cfg, sweep_points(cfg).front());
    note("(%d trials at %+.0f dB: %.0f s)", cfg.sweep.trials, snr,
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return s;
}

bool detection_ordering() {
    bool ok = true;
    for (double snr : {-5.0, 0.0}) {
        const auto& s = trials_at(snr);
        const auto c = tally(s, true, 10), e = tally(s, false, 10);
        note("%+.0f dB: cyclo pd %.3f fa %.2f | energy pd %.3f fa %.2f | failures %d/%d", snr, c.pd, c.fa, e.pd, e.fa,
             c.failures, e.failures);
        ok = ok && c.pd > e.pd && c.fa <= e.fa;
        if (snr == -5.0) ok = ok && c.pd - e.pd >= 0.1;
    }
    return ok;
}

bool carrier_accuracy() {
    const auto& s = trials_at(-5.0);
    const double b = 18e6;
    int detected = 0, bw_ok = 0;
    double worst_f = 0, bw_lo = 1e300, bw_hi = 0, bw_sum = 0;
    for (const auto& r : s.results) {
        if (!r.cyclo) continue;
        std::vector<bool> used(r.cyclo->transmissions.size(), false);
        for (double f : r.carriers_hz) {
            int best = -1;
            double bd = 10 * r.delta;
            for (std::size_t i = 0; i < used.size(); ++i)
                if (!used[i] && std::abs(r.cyclo->transmissions[i].carrier_hz - f) < bd) {
                    bd = std::abs(r.cyclo->transmissions[i].carrier_hz - f);
                    best = static_cast<int>(i);
                }
            if (best < 0) continue;
            used[best] = true;
            ++detected;
            worst_f = std::max(worst_f, bd / r.delta);
            const double bw = r.cyclo->transmissions[best].bandwidth_hz;
            bw_ok += std::abs(bw - b) <= 0.2 * b;
            bw_lo = std::min(bw_lo, bw);
            bw_hi = std::max(bw_hi, bw);
            bw_sum += bw;
        }
    }
    if (detected == 0) {
        note("no detections");
        return false;
    }
    note("detected %d carriers, worst error %.2f resolutions", detected, worst_f);
    note("bandwidth: %d/%d within +-20%% of 18 MHz, range %.2f..%.2f MHz, mean %.2f MHz", bw_ok, detected, bw_lo / 1e6,
         bw_hi / 1e6, bw_sum / detected / 1e6);
    return bw_ok == detected && worst_f < 10;
}

bool oracle_equivalences() {
    bool ok = true;

    // structured OMP against exhaustive search over admissible supports, N = 4, M = 3, K = 1
    {
        const auto lay = selection_layout(4);
        const int ns = static_cast<int>(lay.slots.size());
        std::vector<std::vector<int>> supports, pairs;
        for (int s = 0; s < ns; ++s) {
            supports.push_back({s});
            for (int t = s + 1; t < ns; ++t)
                if (oracle::admissible(to_pos({s, t}, lay))) supports.push_back({s, t});
        }
        for (const auto& s : supports)
            if (s.size() == 2 && lay.slots[s[0]].row == lay.slots[s[1]].row) pairs.push_back(s);
        Rng rng(2024);
        int agree = 0, planted = 0;
        const int cases = 500;
        for (int c = 0; c < cases; ++c) {
            const auto op = build_operator(wrap(gaussian(3, 4, rng)), lay);
            const auto& truth = pairs[rng() % pairs.size()];
            std::normal_distribution<double> g;
            CMatrix v = CMatrix::Zero(9, 1);
            for (int s : truth) v += cplx(g(rng), g(rng)) * op.phi.col(s);
            std::vector<int> best;
            double best_res = std::numeric_limits<double>::infinity();
            for (const auto& s : supports) {
                const double r = oracle::ls_residual(op.columns(s), v);
                if (r < best_res - 1e-12 * v.squaredNorm()) {
                    best_res = r;
                    best = s;
                }
            }
            OmpOptions o;
            o.k_max = 1;
            auto got = structured_omp(v, op, o).support;
            std::sort(got.begin(), got.end());
            agree += got == best;
            planted += best == truth;
        }
        note("OMP vs exhaustive (N=4, M=3): %d/%d agree; exhaustive finds the planted support %d/%d", agree, cases,
             planted, cases);
        ok = ok && agree == cases;
    }

    // operator columns against the dense Kronecker product with a selection matrix
    {
        Rng rng(6);
        double worst = 0;
        int count = 0;
        for (int n = 2; n <= 6; ++n)
            for (int m = 1; m <= n; ++m) {
                const CMatrix a = gaussian(m, n, rng);
                const auto lay = selection_layout(n);
                std::vector<std::pair<int, int>> pos;
                for (const auto& r : lay.raw) pos.emplace_back(r.row, r.col);
                const CMatrix dense = oracle::dense_phi(a, pos);
                worst = std::max(worst, (build_operator(wrap(a), lay).nominal_phi() - dense).norm() / dense.norm());
                ++count;
            }
        note("operator vs dense product: %d shapes, worst relative error %.1e", count, worst);
        ok = ok && worst < 1e-12;
    }

    // partner sets against brute-force admissible pairs
    {
        int mismatches = 0, checked = 0;
        for (int n = 2; n <= 8; ++n) {
            const auto l = selection_layout(n);
            for (int s = 0; s < static_cast<int>(l.slots.size()); ++s) {
                std::set<int> expect;
                for (int t = 0; t < static_cast<int>(l.slots.size()); ++t)
                    if (t != s && l.slots[t].row == l.slots[s].row && oracle::admissible(to_pos({s, t}, l)))
                        expect.insert(t);
                const auto got = complement_of(s, l);
                mismatches += std::set<int>(got.begin(), got.end()) != expect;
                ++checked;
            }
        }
        note("partner sets vs enumeration (N<=8): %d/%d slots match", checked - mismatches, checked);
        ok = ok && mismatches == 0;
    }

    // spark check against subset-rank enumeration
    {
        Rng rng(8);
        int agree = 0, total = 0, full = 0;
        auto check = [&](const SensingMatrix& s, int m) {
            const bool got = spark_lower_check(s, m);
            agree += got == oracle::spark_by_subsets(s.a, m);
            full += got;
            ++total;
        };
        for (int n = 4; n <= 10; ++n)
            for (int m = 2; m < n; ++m) {
                check(wrap(gaussian(m, n, rng)), m);
                CMatrix dup = gaussian(m, n, rng);
                dup.col(n - 1) = dup.col(0) * cplx(0.5, -2);
                check(wrap(dup), m);
                check(multicoset_matrix(random_multicoset_config(n, m, rng()), 1 / kRate), m);
                check(mwc_matrix(random_mwc_config(n, m, kRate / n, rng())), m);
            }
        note("spark check vs subset ranks: %d/%d agree (%d full spark)", agree, total, full);
        ok = ok && agree == total;
    }
    return ok;
}

bool statistical_invariants() {
    const int n = 43, m = 10, q = 60;
    const FrontEnd fe = random_mwc_config(n, m, kRate / n, 5);
    std::vector<double> ps, mags;
    double herm = 0, min_eig = 1;
    for (int p : {10, 100, 1000}) {
        const auto x = white_noise(static_cast<std::size_t>(n) * q * p, kRate, 1.0, 100 + p);
        const auto t = shifted_correlation(spectral_frames(simulate_sampling(x, fe), p, q));
        double mag = 0;
        long cnt = 0;
        for (int qa = 1; qa < q; ++qa)
            for (int qf = 0; qf + qa < q; ++qf) {
                mag += t.at(qa, qf).cwiseAbs().sum();
                cnt += m * m;
            }
        ps.push_back(p);
        mags.push_back(mag / cnt);
        for (int qf = 0; qf < q; ++qf) {
            const CMatrix r = t.at(0, qf);
            herm = std::max(herm, (r - r.adjoint()).cwiseAbs().maxCoeff());
            Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff());
        }
    }
    const double slope = oracle::log_slope(ps, mags);
    note("off-zero-shift mean |R| at P = 10, 100, 1000: %.3e %.3e %.3e, slope %.3f", mags[0], mags[1], mags[2], slope);
    note("zero shift: max |R - R^H| = %.1e, min eigenvalue / max = %.1e", herm, min_eig);
    return slope >= -0.65 && slope <= -0.35 && herm == 0 && min_eig > -1e-12;
}

// Random admissible support of 2K slots, grown greedily from a shuffled slot order.
std::vector<int> random_support(const SelectionLayout& lay, int k, Rng& rng) {
    std::vector<int> order(lay.slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> s;
    for (int c : order) {
        if (static_cast<int>(s.size()) == 2 * k) break;
        auto t = s;
        t.push_back(c);
        std::sort(t.begin(), t.end());
        if (sigma_admissible(t, lay, k)) s = t;
    }
    return s;
}

struct RankScan {
    int patterns = 0, deficient = 0;
    double worst_ratio = 1;
};

RankScan scan_patterns(int n, int m, int k, int matrices, int per_matrix, std::uint64_t seed) {
    Rng rng(seed);
    const auto lay = selection_layout(n);
    RankScan r;
    for (int i = 0; i < matrices; ++i) {
        CMatrix a;
        do a = gaussian(m, n, rng);
        while (!spark_lower_check(wrap(a), m));
        const auto op = build_operator(wrap(a), lay);
        for (int j = 0; j < per_matrix; ++j) {
            const auto s1 = random_support(lay, k, rng), s2 = random_support(lay, k, rng);
            std::set<int> w(s1.begin(), s1.end());
            w.insert(s2.begin(), s2.end());
            const CMatrix cols = op.columns({w.begin(), w.end()});
            Eigen::JacobiSVD<CMatrix> svd(cols);
            const auto sv = svd.singularValues();
            const double ratio = sv(sv.size() - 1) / sv(0);
            r.worst_ratio = std::min(r.worst_ratio, ratio);
            r.deficient += matrix_rank(cols) < static_cast<int>(w.size());
            ++r.patterns;
        }
    }
    return r;
}

bool theorem_check() {
    const int n = 10;
    bool ok = true;
    for (auto [k, m] : {std::pair{2, 4}, {3, 5}, {4, 7}, {5, 9}}) {
        const auto r = scan_patterns(n, m, k, 10, 100, 1000 + k);
        note("K = %d, M = %d (> 8K/5): %d/%d patterns full column rank, worst sigma ratio %.1e", k, m,
             r.patterns - r.deficient, r.patterns, r.worst_ratio);
        ok = ok && r.deficient == 0 && r.patterns >= 1000;
    }
    for (auto [k, m] : {std::pair{2, 3}, {3, 4}, {4, 6}, {5, 8}}) {
        const auto r = scan_patterns(n, m, k, 10, 100, 2000 + k);
        note("search K = %d, M = %d (<= 8K/5): %d/%d rank-deficient patterns, worst sigma ratio %.1e", k, m,
             r.deficient, r.patterns, r.worst_ratio);
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<bool()>>> criteria = {
        {"rate bounds", rate_bounds},
        {"noiseless exact recovery", noiseless_recovery},
        {"channel-count threshold", channel_sweep},
        {"cyclostationary vs energy detection", detection_ordering},
        {"carrier and bandwidth accuracy at -5 dB", carrier_accuracy},
        {"oracle equivalences", oracle_equivalences},
        {"statistical invariants", statistical_invariants},
        {"full column rank of W-pattern submatrices", theorem_check},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!pick.empty() && !pick.count(id)) continue;
        std::printf("criterion %d: %s\n", id, criteria[i].first);
        std::fflush(stdout);
        bool ok = false;
        try {
            ok = criteria[i].second();
        } catch (const std::exception& e) {
            note("exception: %s", e.what());
        }
        std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, criteria[i].first);
        std::fflush(stdout);
        failed += !ok;
    }
    return failed ? 1 : 0;
}
