#include "subcyclo/correlation.hpp"

#include <cmath>

#include "subcyclo/fft.hpp"

namespace subcyclo {

int signed_bin(int qf, int q, int n_slices) { return (n_slices % 2) ? qf - q / 2 : qf; }

namespace {

void check_grid(int p, int q, int n_slices) {
    if (p < 1) throw ConfigError("window count P must be >= 1");
    if (q < 1) throw ConfigError("bins per window Q must be >= 1");
    if (n_slices % 2 == 1 && q % 2 == 1)
        throw ConfigError("Q must be even when the slice count is odd (slices are centered on DC)");
}

} // namespace

SpectralFrames spectral_frames(const ChannelSamples& samples, int p, int q) {
    check_grid(p, q, samples.n_slices);
    if (static_cast<std::size_t>(p) * q > samples.length())
        throw ConfigError("insufficient samples: P*Q = " + std::to_string(static_cast<long>(p) * q) +
                          " exceeds channel length " + std::to_string(samples.length()));
    const int m = samples.m();
    const int n = samples.n_slices;

    // FFT every (channel, window) block at once, then scatter into bin-major order.
    std::vector<cplx> work(static_cast<std::size_t>(m) * p * q);
    for (int i = 0; i < m; ++i)
        for (int w = 0; w < p; ++w)
            std::copy_n(samples.channels[i].begin() + static_cast<std::size_t>(w) * q, q,
                        work.begin() + (static_cast<std::size_t>(i) * p + w) * q);
    fft::forward_batch(work.data(), q, m * p);

    SpectralFrames f;
    f.m = m;
    f.p = p;
    f.q = q;
    f.f_s = samples.f_s;
    f.n_slices = n;
    f.data.resize(work.size());
    for (int qf = 0; qf < q; ++qf) {
        const int qs = signed_bin(qf, q, n);
        const int b = ((qs % q) + q) % q;
        for (int i = 0; i < m; ++i) {
            const int d = samples.delays.empty() ? 0 : samples.delays[i];
            const cplx rot = d ? std::polar(1.0, -2 * kPi * static_cast<double>(qs) * d / (static_cast<double>(q) * n))
                               : cplx(1.0);
            for (int w = 0; w < p; ++w)
                f.data[(static_cast<std::size_t>(qf) * p + w) * m + i] =
                    rot * work[(static_cast<std::size_t>(i) * p + w) * q + b];
        }
    }
    return f;
}

SpectralFrames nyquist_slice_frames(const NyquistSignal& signal, int n_slices, int p, int q) {
    check_grid(p, q, n_slices);
    const std::size_t win = static_cast<std::size_t>(q) * n_slices;
    if (win * p > signal.samples.size()) throw ConfigError("insufficient Nyquist samples for P windows");
    const double t_nyq = 1.0 / signal.rate_hz;

    std::vector<cplx> work(win * p);
    for (std::size_t k = 0; k < work.size(); ++k) work[k] = signal.samples[k];
    fft::forward_batch(work.data(), static_cast<int>(win), p);

    SpectralFrames f;
    f.m = n_slices;
    f.p = p;
    f.q = q;
    f.f_s = signal.rate_hz / n_slices;
    f.n_slices = n_slices;
    f.data.resize(static_cast<std::size_t>(n_slices) * p * q);
    const long total = static_cast<long>(win);
    for (int qf = 0; qf < q; ++qf) {
        const int qs = signed_bin(qf, q, n_slices);
        for (int k = 0; k < n_slices; ++k) {
            const long b = ((qs + static_cast<long>(slice_offset(k, n_slices)) * q) % total + total) % total;
            for (int w = 0; w < p; ++w)
                f.data[(static_cast<std::size_t>(qf) * p + w) * n_slices + k] = t_nyq * work[w * win + b];
        }
    }
    return f;
}

CorrelationTensor shifted_correlation(const SpectralFrames& frames) {
    CorrelationTensor t;
    t.m = frames.m;
    t.q = frames.q;
    t.p = frames.p;
    t.f_s = frames.f_s;
    t.n_slices = frames.n_slices;
    t.data.assign(t.block_count() * t.m * t.m, cplx(0));
    const double inv_p = 1.0 / frames.p;
    for (int qa = 0; qa < t.q; ++qa)
        for (int qf = 0; qf + qa < t.q; ++qf)
            t.at(qa, qf).noalias() = inv_p * frames.bin(qf) * frames.bin(qf + qa).adjoint();
    // Enforce exact Hermitian symmetry at zero shift.
    for (int qf = 0; qf < t.q; ++qf) {
        auto r = t.at(0, qf);
        const CMatrix h = 0.5 * (CMatrix(r) + CMatrix(r).adjoint());
        r = h;
    }
    return t;
}

CMatrix measurement_matrix(const CorrelationTensor& t, int qa, int begin, int end) {
    if (qa < 0 || qa >= t.q || begin < 0 || end > t.q - qa || begin > end)
        throw ConfigError("measurement range outside the tensor grid");
    const int mm = t.m * t.m;
    CMatrix out(mm, end - begin);
    for (int qf = begin; qf < end; ++qf) out.col(qf - begin) = Eigen::Map<const CVector>(t.at(qa, qf).data(), mm);
    return out;
}

} // namespace subcyclo
