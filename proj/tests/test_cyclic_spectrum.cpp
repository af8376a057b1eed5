#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "subcyclo/cyclic_spectrum.hpp"
#include "subcyclo/rng.hpp"

using namespace subcyclo;

namespace {

constexpr double kRate = 1e9;

GridMeta meta_for(int n, int q, int p) {
    GridMeta m;
    m.f_nyq = kRate;
    m.f_s = kRate / n;
    m.n = n;
    m.q = q;
    m.p = p;
    return m;
}

NyquistSignal snapshots(std::vector<TransmissionSpec> tx, int window, int p, std::uint64_t seed,
                        std::optional<double> snr = std::nullopt) {
    SignalConfig c;
    c.nyquist_rate_hz = kRate;
    c.duration_s = static_cast<double>(window) * p / kRate;
    c.segment_samples = window;
    c.rng_seed = seed;
    c.snr_db = snr;
    c.transmissions = std::move(tx);
    return compose_signal(c);
}

// Slice-domain correlation straight from the Nyquist record (every slice is a channel).
CorrelationTensor slice_tensor(const NyquistSignal& x, int n, int p, int q) {
    return shifted_correlation(nyquist_slice_frames(x, n, p, q));
}

// Oracle value at a grid cell: X(f - alpha/2) conj(X(f + alpha/2)), T-scaled like the slice spectra.
cplx oracle_cell(const oracle::CyclicOracle& o, long alpha_bin, long f_half) {
    const long k1 = (f_half - alpha_bin) / 2, k2 = (f_half + alpha_bin) / 2;
    return o.at(static_cast<int>(k1), static_cast<int>(k2)) / (kRate * kRate);
}

CMatrix unitary_dft(int n) {
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = std::polar(1 / std::sqrt(double(n)), -2 * M_PI * i * k / n);
    return a;
}

} // namespace

TEST_CASE("index map examples") {
    const auto m = meta_for(8, 32, 10);
    const double d = m.delta();
    // diagonal entries at zero shift are the power-spectrum row
    for (int i = 1; i <= 8; ++i) CHECK(index_map(i, i, 0, 5, m).alpha_hz == 0.0);
    CHECK(index_map(1, 8, 0, 0, m).alpha_hz == doctest::Approx(7 * m.f_s));
    CHECK(index_map(2, 4, 3, 0, m).alpha_hz == doctest::Approx(2 * m.f_s + 3 * d));
    // f follows the 1-based formula shifted by the calibrated half-slice constant
    for (int i : {1, 3, 8})
        for (int j : {1, 5, 8})
            for (int qa : {0, 7})
                for (int qf : {0, 11}) {
                    if (qf + qa >= m.q) continue;
                    const double textbook =
                        -m.f_nyq / 2 + qf * d - m.f_s / 2 + (i + j) * m.f_s / 2 + qa * d / 2;
                    CHECK(index_map(i, j, qa, qf, m).f_hz == doctest::Approx(textbook + m.half_slice_offset_hz()));
                }
    CHECK_THROWS_AS(index_map(0, 1, 0, 0, m), ConfigError);
    CHECK_THROWS_AS(index_map(1, 9, 0, 0, m), ConfigError);
    CHECK_THROWS_AS(index_map(1, 1, 4, 28, m), ConfigError);
    CHECK_THROWS_AS(index_map(1, 1, 32, 0, m), ConfigError);
}

TEST_CASE("every mapped cell respects the outer bound") {
    for (int n : {8, 9}) {
        const auto m = meta_for(n, 16, 1);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                for (int qa = 0; qa < m.q; ++qa)
                    for (int qf = 0; qf + qa < m.q; ++qf) {
                        auto b = index_bins(i, j, qa, qf, m);
                        // |f| + |alpha| / 2 <= f_Nyq / 2, in half-resolution units
                        CHECK(std::abs(b.f_half) + std::abs(b.alpha_bin) <= static_cast<long>(n) * m.q);
                    }
    }
}

TEST_CASE("assembled Nyquist slices reproduce the direct estimator") {
    // calibration of the whole mapping, odd and even slice counts
    for (int n : {8, 9}) {
        const int q = 24, p = 6;
        const auto x = snapshots({make_transmission(163.18e6, 18e6, 0.1, Modulation::BPSK),
                                  make_transmission(391.0e6, 18e6, 0.1, Modulation::QAM)},
                                 n * q, p, 3, 0.0);
        const auto grid = assemble_tensor(slice_tensor(x, n, p, q), meta_for(n, q, p));
        const oracle::CyclicOracle o(x.samples, n * q, p, kRate);
        double err = 0, ref = 0;
        for (const auto& e : grid.entries()) {
            const cplx want = oracle_cell(o, e.alpha_bin, e.f_half);
            err += std::norm(e.value - want);
            ref += std::norm(want);
        }
        CHECK(grid.size() > 0);
        CHECK(err / ref < 1e-18);
    }
}

TEST_CASE("tone pair peaks at twice the tone frequency") {
    for (int n : {8, 9}) {
        const int q = 32, p = 4;
        const int w = n * q;
        const double bin = kRate / w;
        const int k0 = 37;
        NyquistSignal x;
        x.rate_hz = kRate;
        for (int t = 0; t < w * p; ++t) x.samples.push_back(std::cos(2 * M_PI * k0 * (t % w) / w + 0.4));
        const auto grid = assemble_tensor(slice_tensor(x, n, p, q), meta_for(n, q, p));
        long ba = 0, bf = 0;
        double bv = -1;
        for (const auto& e : grid.entries())
            if (std::abs(e.value) > bv) {
                bv = std::abs(e.value);
                ba = e.alpha_bin;
                bf = e.f_half;
            }
        CHECK(std::abs(grid.alpha_hz(ba) - 2 * k0 * bin) <= bin);
        CHECK(std::abs(grid.f_hz(bf)) <= bin);
        // the direct estimator puts its peak at the same place
        const oracle::CyclicOracle o(x.samples, w, p, kRate);
        CHECK(std::abs(o.at_zero_f(k0)) == doctest::Approx(bv * kRate * kRate).epsilon(1e-9));
    }
}

TEST_CASE("zero recovery gives a zero grid") {
    const int n = 8, q = 8;
    const auto lay = selection_layout(n);
    CorrelationTensor t;
    t.m = n;
    t.q = q;
    t.p = 1;
    t.f_s = kRate / n;
    t.n_slices = n;
    t.data.assign(t.block_count() * n * n, cplx(0));
    RecoveryOptions ro;
    ro.k = 2;
    const auto op = build_operator(SensingMatrix{unitary_dft(n), kRate / n, n}, lay);
    const auto grid = assemble(recover_slices(t, op, ro), lay, grid_meta(t));
    CHECK(grid.energy() == 0.0);
    CHECK(profile_value(grid, 3 * t.resolution()) == 0.0);
}

TEST_CASE("scattering conserves energy") {
    const int n = 8, q = 16, p = 20;
    const auto x = snapshots({make_transmission(187.5e6, 18e6, 0.1, Modulation::BPSK)}, n * q, p, 4, 5.0);
    const auto t = slice_tensor(x, n, p, q);
    const auto lay = selection_layout(n);
    const auto op = build_operator(SensingMatrix{unitary_dft(n), kRate / n, n}, lay);
    // with A unitary the measured tensor is A R_x A^H
    CorrelationTensor tz = t;
    for (int qa = 0; qa < q; ++qa)
        for (int qf = 0; qf + qa < q; ++qf) tz.at(qa, qf) = unitary_dft(n) * t.at(qa, qf) * unitary_dft(n).adjoint();
    RecoveryOptions ro;
    ro.k = 2;
    const auto rec = recover_slices(tz, op, ro);
    double recovered = 0;
    for (const auto& sr : rec.shifts)
        for (const auto& piece : sr.pieces)
            for (std::size_t s = 0; s < piece.support.slots.size(); ++s) {
                const Slot& slot = lay.slots[piece.support.slots[s]];
                if (sr.qa == 0 && slot.row == slot.col) continue;  // power-spectrum row is not stored
                recovered += piece.coeffs.row(static_cast<Eigen::Index>(s)).squaredNorm();
            }
    const auto grid = assemble(rec, lay, grid_meta(tz));
    REQUIRE(recovered > 0);
    CHECK(std::abs(grid.scattered_energy() - recovered) < 1e-9 * recovered);
    CHECK(grid.energy() <= grid.scattered_energy() * (1 + 1e-12));
}

TEST_CASE("negative cyclic frequency reads the mirrored cell") {
    const int n = 8, q = 16, p = 10;
    const auto x = snapshots({make_transmission(163.18e6, 18e6, 0.1, Modulation::BPSK)}, n * q, p, 6, 0.0);
    const auto grid = assemble_tensor(slice_tensor(x, n, p, q), meta_for(n, q, p));
    int checked = 0;
    for (const auto& e : grid.entries()) {
        if (e.alpha_bin == 0) continue;
        CHECK(std::abs(grid.value(-e.alpha_bin, e.f_half)) == doctest::Approx(std::abs(e.value)));
        CHECK(grid.value(-e.alpha_bin, e.f_half) == std::conj(e.value));
        ++checked;
    }
    CHECK(checked > 0);
    // writes at negative alpha land in the stored half-plane
    CyclicSpectrumGrid g(meta_for(n, q, p));
    g.add(-5, 3, cplx(1, 2));
    CHECK(g.has(5, 3));
    CHECK(g.value(5, 3) == cplx(1, -2));
    CHECK_THROWS_AS(g.add(n * q, 0, 1.0), ConfigError);
}

TEST_CASE("single transmission stays inside its dilated diamonds") {
    const int n = 8, p = 20;
    const auto tx = make_transmission(187.5e6, 18e6, 0.1, Modulation::BPSK);
    const auto d = theoretical_support(tx, kRate);
    const auto lay = selection_layout(n);

    // on-grid tones spanning the band: no leakage, so the support is exact
    {
        const int q = 64, w = n * q;
        const double bin = kRate / w;
        Rng rng(5);
        std::uniform_real_distribution<double> ph(0, 2 * M_PI);
        NyquistSignal x;
        x.rate_hz = kRate;
        for (int win = 0; win < p; ++win) {
            std::vector<double> seg(w, 0.0);
            for (int k = static_cast<int>(std::ceil(d.f_low / bin)); k * bin <= d.f_high; ++k) {
                const double phi = ph(rng);
                for (int t = 0; t < w; ++t) seg[t] += std::cos(2 * M_PI * k * t / w + phi);
            }
            x.samples.insert(x.samples.end(), seg.begin(), seg.end());
        }
        const auto grid = assemble_tensor(slice_tensor(x, n, p, q), meta_for(n, q, p), &lay);
        double in = 0, out = 0;
        for (const auto& e : grid.entries())
            (d.contains(grid.f_hz(e.f_half), grid.alpha_hz(e.alpha_bin), 2 * bin) ? in : out) += std::norm(e.value);
        CHECK(in > 0);
        CHECK(out < 1e-20 * in);
    }

    // synthesized BPSK: only rectangular-window leakage escapes, and it shrinks with the window
    auto outside = [&](int q) {
        const auto x = snapshots({tx}, n * q, p, 8);
        const auto grid = assemble_tensor(slice_tensor(x, n, p, q), meta_for(n, q, p), &lay);
        const double bin = grid.meta().delta();
        double in = 0, out = 0;
        for (const auto& e : grid.entries())
            (d.contains(grid.f_hz(e.f_half), grid.alpha_hz(e.alpha_bin), 2 * bin) ? in : out) += std::norm(e.value);
        return out / (in + out);
    };
    const double short_w = outside(64), long_w = outside(256);
    MESSAGE("energy outside the dilated diamonds: " << short_w << " (Q = 64), " << long_w << " (Q = 256)");
    CHECK(long_w < short_w);
}

TEST_CASE("noise-only profile stays well below the power level") {
    const int n = 8, q = 32, p = 100;
    const auto x = white_noise(static_cast<std::size_t>(n) * q * p, kRate, 1.0, 12);
    const auto t = slice_tensor(x, n, p, q);
    const auto lay = selection_layout(n);
    const auto grid = assemble_tensor(t, meta_for(n, q, p), &lay);
    // power level: the zero-shift diagonal the grid leaves out
    double psd = 0;
    for (int qf = 0; qf < q; ++qf) psd += CMatrix(t.at(0, qf)).diagonal().real().sum() / (n * q);
    const auto prof = profile_at_zero_f(grid);
    // energy comparison: mean |S(alpha, 0)|^2 against the squared power level
    double mean_sq = 0, mean_mag = 0;
    int cnt = 0;
    for (std::size_t a = 1; a < prof.size(); ++a)
        if (prof[a] > 0) {
            mean_sq += prof[a] * prof[a];
            mean_mag += prof[a];
            ++cnt;
        }
    REQUIRE(cnt > 0);
    mean_sq /= cnt;
    mean_mag /= cnt;
    // f = 0 pairs a real signal's bin with its own mirror, so |S|^2 averages 2 / P of the power squared
    MESSAGE("noise profile / power level: energy " << mean_sq / (psd * psd) << ", magnitude " << mean_mag / psd);
    CHECK(mean_sq < 0.1 * psd * psd);
}

TEST_CASE("BPSK profile peaks near twice the carrier") {
    const int n = 8, q = 64, p = 30;
    const double fc = 163.18e6;
    const auto x = snapshots({make_transmission(fc, 18e6, 0.1, Modulation::BPSK)}, n * q, p, 14);
    const auto lay = selection_layout(n);
    const auto grid = assemble_tensor(slice_tensor(x, n, p, q), meta_for(n, q, p), &lay);
    const auto prof = profile_at_zero_f(grid);
    const auto top = std::max_element(prof.begin() + 1, prof.end()) - prof.begin();
    CHECK(std::abs(grid.alpha_hz(top) - 2 * fc) <= 2 * grid.meta().delta());
    CHECK(profile_value(grid, 2 * fc) > 0.5 * prof[top]);
}

TEST_CASE("recovered grid matches the direct estimator") {
    // carrier in the middle of a slice so each band occupies one slice
    const int n = 8, m = 6, q = 32, p = 40;
    MulticosetConfig cfg;
    for (std::uint64_t s = 1;; ++s) {
        cfg = random_multicoset_config(n, m, s);
        if (spark_lower_check(multicoset_matrix(cfg, 1 / kRate), m)) break;
    }
    const auto x = snapshots({make_transmission(187.5e6 + 0.8e6, 18e6, 0.1, Modulation::BPSK)}, n * q, p, 21);
    const auto tz = shifted_correlation(spectral_frames(simulate_sampling(x, cfg), p, q));
    const auto lay = selection_layout(n);
    const auto op = build_operator(multicoset_matrix(cfg, 1 / kRate), lay);
    RecoveryOptions ro;
    ro.k = 2;
    const auto grid = assemble(recover_slices(tz, op, ro), lay, grid_meta(tz));
    const oracle::CyclicOracle o(x.samples, n * q, p, kRate);
    double err = 0, ref = 0;
    for (const auto& e : grid.entries()) {
        if (e.alpha_bin % q == 0) continue;
        const cplx want = oracle_cell(o, e.alpha_bin, e.f_half);
        err += std::norm(e.value - want);
        ref += std::norm(want);
    }
    REQUIRE(ref > 0);
    MESSAGE("grid NMSE against the direct estimator: " << err / ref);
    CHECK(err / ref < 0.05);
}

TEST_CASE("per-frequency and joint recovery give the same grid") {
    const int n = 8, q = 12;
    const auto lay = selection_layout(n);
    const CMatrix a = unitary_dft(n);
    const std::vector<int> support = {lay.slot_at(1, 2), lay.slot_at(1, 6), lay.slot_at(6, 5), lay.slot_at(6, 1)};
    CorrelationTensor t;
    t.m = n;
    t.q = q;
    t.p = 1;
    t.f_s = kRate / n;
    t.n_slices = n;
    t.data.assign(t.block_count() * n * n, cplx(0));
    Rng rng(31);
    std::normal_distribution<double> g;
    for (int qa = 0; qa < q; ++qa)
        for (int qf = 0; qf + qa < q; ++qf) {
            CMatrix rx = CMatrix::Zero(n, n);
            for (int s : support) rx(lay.slots[s].row, lay.slots[s].col) = cplx(g(rng), g(rng));
            t.at(qa, qf) = a * rx * a.adjoint();
        }
    const auto op = build_operator(SensingMatrix{a, kRate / n, n}, lay);
    RecoveryOptions ro;
    ro.k = 2;
    ro.zero_shift = ZeroShiftMode::Skip;
    const auto joint = assemble(recover_slices(t, op, ro), lay, grid_meta(t));
    ro.per_frequency = true;
    const auto per = assemble(recover_slices(t, op, ro), lay, grid_meta(t));
    const auto ej = joint.entries(), ep = per.entries();
    REQUIRE(ej.size() == ep.size());
    for (std::size_t i = 0; i < ej.size(); ++i) {
        CHECK(ej[i].alpha_bin == ep[i].alpha_bin);
        CHECK(ej[i].f_half == ep[i].f_half);
        CHECK(std::abs(ej[i].value - ep[i].value) < 1e-9);
    }
}

TEST_CASE("CSV export") {
    CyclicSpectrumGrid g(meta_for(8, 16, 1));
    g.add(3, 2, cplx(3, 4));
    const std::string path = "cyclic_export_test.csv";
    export_grid_csv(g, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "alpha_hz,f_hz,magnitude");
    CHECK(row.rfind("23437500.000000,7812500.000000,5.0", 0) == 0);
    std::remove(path.c_str());
}
