#include "subcyclo/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subcyclo/fft.hpp"
#include "subcyclo/rng.hpp"

namespace subcyclo {

void validate(const MulticosetConfig& cfg) {
    if (cfg.n_slices < 1) throw ConfigError("n_slices must be >= 1");
    if (cfg.cosets.empty()) throw ConfigError("at least one coset is required");
    if (static_cast<int>(cfg.cosets.size()) > cfg.n_slices) throw ConfigError("more cosets than slices");
    for (std::size_t i = 0; i < cfg.cosets.size(); ++i) {
        if (cfg.cosets[i] < 0 || cfg.cosets[i] >= cfg.n_slices)
            throw ConfigError("coset " + std::to_string(cfg.cosets[i]) + " outside [0, N-1]");
        if (i > 0 && cfg.cosets[i] == cfg.cosets[i - 1]) throw ConfigError("duplicate coset " + std::to_string(cfg.cosets[i]));
        if (i > 0 && cfg.cosets[i] < cfg.cosets[i - 1]) throw ConfigError("cosets must be strictly increasing");
    }
}

void validate(const MwcConfig& cfg) {
    if (cfg.n_slices < 1) throw ConfigError("n_slices must be >= 1");
    if (cfg.n_channels < 1) throw ConfigError("n_channels must be >= 1");
    if (static_cast<int>(cfg.mixing_sequences.size()) != cfg.n_channels)
        throw ConfigError("mixing_sequences must have n_channels rows");
    for (const auto& row : cfg.mixing_sequences) {
        if (static_cast<int>(row.size()) != cfg.n_slices) throw ConfigError("mixing sequence period must be n_slices");
        for (int s : row)
            if (s != 1 && s != -1) throw ConfigError("mixing sequences must be +-1");
    }
    if (!(cfg.channel_rate_hz > 0)) throw ConfigError("channel_rate_hz must be positive");
    if (cfg.max_band_hz > 0 && cfg.channel_rate_hz < cfg.max_band_hz)
        throw ConfigError("channel rate f_s must be at least B_max");
}

int n_slices(const FrontEnd& fe) {
    return std::visit([](const auto& c) { return c.n_slices; }, fe);
}

int n_channels(const FrontEnd& fe) {
    if (const auto* mc = std::get_if<MulticosetConfig>(&fe)) return static_cast<int>(mc->cosets.size());
    return std::get<MwcConfig>(fe).n_channels;
}

MwcConfig random_mwc_config(int n, int m, double channel_rate_hz, std::uint64_t seed) {
    MwcConfig cfg;
    cfg.n_slices = n;
    cfg.n_channels = m;
    cfg.channel_rate_hz = channel_rate_hz;
    cfg.seed = seed;
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    cfg.mixing_sequences.assign(m, std::vector<int>(n));
    for (auto& row : cfg.mixing_sequences)
        for (int& s : row) s = coin(rng) ? 1 : -1;
    return cfg;
}

MulticosetConfig random_multicoset_config(int n, int m, std::uint64_t seed) {
    if (m < 1 || m > n) throw ConfigError("need 1 <= M <= N cosets");
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    Rng rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    MulticosetConfig cfg{n, std::vector<int>(all.begin(), all.begin() + m)};
    std::sort(cfg.cosets.begin(), cfg.cosets.end());
    return cfg;
}

SensingMatrix multicoset_matrix(const MulticosetConfig& cfg, double t_nyq) {
    validate(cfg);
    if (!(t_nyq > 0)) throw ConfigError("t_nyq must be positive");
    const int n = cfg.n_slices, m = static_cast<int>(cfg.cosets.size());
    SensingMatrix s{CMatrix(m, n), 1.0 / (n * t_nyq), n};
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k)
            s.a(i, k) = s.f_s * std::polar(1.0, 2 * kPi * cfg.cosets[i] * slice_offset(k, n) / n);
    return s;
}

CMatrix mixing_coefficients(const MwcConfig& cfg) {
    validate(cfg);
    const int n = cfg.n_slices;
    CMatrix c(cfg.n_channels, n);
    for (int i = 0; i < cfg.n_channels; ++i)
        for (int l = 0; l < n; ++l) {
            cplx acc = 0;
            for (int t = 0; t < n; ++t)
                acc += static_cast<double>(cfg.mixing_sequences[i][t]) * std::polar(1.0, -2 * kPi * l * t / n);
            c(i, l) = acc / static_cast<double>(n);
        }
    return c;
}

SensingMatrix mwc_matrix(const MwcConfig& cfg) {
    const CMatrix c = mixing_coefficients(cfg);
    const int n = cfg.n_slices;
    SensingMatrix s{CMatrix(cfg.n_channels, n), cfg.channel_rate_hz, n};
    for (int i = 0; i < cfg.n_channels; ++i)
        for (int k = 0; k < n; ++k) {
            const int l = ((slice_offset(k, n) % n) + n) % n;
            s.a(i, k) = std::conj(c(i, l));
        }
    return s;
}

SensingMatrix sensing_matrix(const FrontEnd& fe, double nyquist_rate_hz) {
    if (const auto* mc = std::get_if<MulticosetConfig>(&fe)) return multicoset_matrix(*mc, 1.0 / nyquist_rate_hz);
    return mwc_matrix(std::get<MwcConfig>(fe));
}

namespace {

ChannelSamples sample_multicoset(const NyquistSignal& x, const MulticosetConfig& cfg) {
    validate(cfg);
    const int n = cfg.n_slices;
    const std::size_t len = x.samples.size() / static_cast<std::size_t>(n);
    if (len == 0) throw ConfigError("signal too short for one output sample");
    ChannelSamples out;
    out.f_s = x.rate_hz / n;
    out.n_slices = n;
    out.nyquist_rate_hz = x.rate_hz;
    out.delays = cfg.cosets;
    for (int c : cfg.cosets) {
        std::vector<cplx> ch(len);
        for (std::size_t m = 0; m < len; ++m) ch[m] = x.samples[m * n + c];
        out.channels.push_back(std::move(ch));
    }
    return out;
}

// Mixing by an N-periodic sequence shifts the spectrum by multiples of L bins weighted by c_il,
// so the masked, decimated channel spectrum is assembled directly from the input DFT.
ChannelSamples sample_mwc(const NyquistSignal& x, const MwcConfig& cfg) {
    validate(cfg);
    const int n = cfg.n_slices;
    const double expect = n * cfg.channel_rate_hz;
    if (std::abs(x.rate_hz - expect) > 1e-9 * expect)
        throw ConfigError("signal rate must equal n_slices * channel_rate_hz");
    const std::size_t len = x.samples.size() / static_cast<std::size_t>(n);
    if (len == 0) throw ConfigError("signal too short for one output sample");
    const std::size_t total = len * n;
    const auto spectrum = fft::forward_real(std::vector<double>(x.samples.begin(), x.samples.begin() + total));
    const CMatrix c = mixing_coefficients(cfg);

    const long L = static_cast<long>(len);
    const long first = (n % 2) ? -(L / 2) : 0;
    const double gain = 1.0 / (cfg.channel_rate_hz * n);

    ChannelSamples out;
    out.f_s = cfg.channel_rate_hz;
    out.n_slices = n;
    out.nyquist_rate_hz = x.rate_hz;
    out.delays.assign(cfg.n_channels, 0);
    std::vector<cplx> y(len);
    for (int i = 0; i < cfg.n_channels; ++i) {
        for (long q = first; q < first + L; ++q) {
            cplx acc = 0;
            for (int l = 0; l < n; ++l) {
                const long b = ((q - l * L) % static_cast<long>(total) + static_cast<long>(total)) % static_cast<long>(total);
                acc += c(i, l) * spectrum[b];
            }
            y[((q % L) + L) % L] = gain * acc;
        }
        auto t = fft::inverse(y);
        for (auto& v : t) v /= static_cast<double>(len);
        out.channels.push_back(std::move(t));
    }
    return out;
}

} // namespace

ChannelSamples simulate_sampling(const NyquistSignal& signal, const FrontEnd& fe) {
    if (const auto* mc = std::get_if<MulticosetConfig>(&fe)) return sample_multicoset(signal, *mc);
    return sample_mwc(signal, std::get<MwcConfig>(fe));
}

int matrix_rank(const CMatrix& a, double rel_tol) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

bool spark_lower_check(const SensingMatrix& a, int m) {
    const int n = static_cast<int>(a.a.cols());
    if (n > 24) throw ConfigError("spark check is exhaustive and limited to N <= 24");
    if (m < 1 || m > n) throw ConfigError("subset size must lie in [1, N]");
    if (m > a.a.rows()) return false;
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    CMatrix sub(a.a.rows(), m);
    while (true) {
        for (int t = 0; t < m; ++t) sub.col(t) = a.a.col(idx[t]);
        if (matrix_rank(sub) < m) return false;
        int t = m - 1;
        while (t >= 0 && idx[t] == n - m + t) --t;
        if (t < 0) break;
        ++idx[t];
        for (int u = t + 1; u < m; ++u) idx[u] = idx[u - 1] + 1;
    }
    return true;
}

RateBound min_rate_bounds(int n_sig, double b_max, double f_nyq, double f_s, bool sparse) {
    if (n_sig < 1 || !(b_max > 0) || !(f_nyq > 0) || !(f_s > 0)) throw ConfigError("rate bounds need positive inputs");
    RateBound r;
    if (sparse) {
        const int k = 2 * n_sig;
        r.f_min = 16.0 * n_sig * b_max / 5.0;
        r.m_min = (8 * k) / 5 + 1;
    } else {
        const int n = static_cast<int>(std::ceil(f_nyq / f_s - 1e-9));
        r.f_min = 4.0 * f_nyq / 5.0;
        r.m_min = (4 * n) / 5 + 1;
    }
    return r;
}

} // namespace subcyclo
