#pragma once

#include <vector>

#include "subcyclo/sampler.hpp"
#include "subcyclo/signal.hpp"
#include "subcyclo/types.hpp"

namespace subcyclo {

// Per-window Q-point spectra of every channel, indexed by the local slice bin q_f.
// For even N, q_f is the plain DFT bin. For odd N the slice is centered on DC and
// q_f = Q/2 is DFT bin 0.
struct SpectralFrames {
    int m = 0, p = 0, q = 0;
    double f_s = 0;
    int n_slices = 0;
    std::vector<cplx> data;  // [q_f][p][i], so each bin is a contiguous M x P block

    double resolution() const { return f_s / q; }
    Eigen::Map<const CMatrix> bin(int qf) const {
        return {data.data() + static_cast<std::size_t>(qf) * m * p, m, p};
    }
    cplx at(int window, int channel, int qf) const {
        return data[(static_cast<std::size_t>(qf) * p + window) * m + channel];
    }
};

// Signed DFT bin represented by local bin q_f.
int signed_bin(int qf, int q, int n_slices);

SpectralFrames spectral_frames(const ChannelSamples& samples, int p, int q);

// Slices x_k(q_f) taken from Q*N-point spectra of the Nyquist-rate windows.
// The "channels" of the result are the N slices.
SpectralFrames nyquist_slice_frames(const NyquistSignal& signal, int n_slices, int p, int q);

// R(q_a, q_f) for q_a in [0, Q), q_f in [0, Q - q_a), each M x M.
struct CorrelationTensor {
    int m = 0, q = 0, p = 0;
    double f_s = 0;
    int n_slices = 0;
    std::vector<cplx> data;

    static std::size_t offset(int qa, int q) {
        return static_cast<std::size_t>(qa) * q - static_cast<std::size_t>(qa) * (qa - 1) / 2;
    }
    std::size_t block_count() const { return offset(q, q); }
    double resolution() const { return f_s / q; }
    Eigen::Map<const CMatrix> at(int qa, int qf) const {
        return {data.data() + (offset(qa, q) + qf) * m * m, m, m};
    }
    Eigen::Map<CMatrix> at(int qa, int qf) {
        return {data.data() + (offset(qa, q) + qf) * m * m, m, m};
    }
};

CorrelationTensor shifted_correlation(const SpectralFrames& frames);

// Columns vec(R(q_a, q_f)) for q_f in [begin, end), column-stacked vectorization.
CMatrix measurement_matrix(const CorrelationTensor& t, int qa, int begin, int end);

} // namespace subcyclo
