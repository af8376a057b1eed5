#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "subcyclo/signal.hpp"
#include "subcyclo/types.hpp"

namespace subcyclo {

struct MulticosetConfig {
    int n_slices = 0;
    std::vector<int> cosets;  // strictly increasing, in [0, n_slices)
};

struct MwcConfig {
    int n_slices = 0;
    int n_channels = 0;
    std::vector<std::vector<int>> mixing_sequences;  // n_channels rows of n_slices signs
    double channel_rate_hz = 0;
    double max_band_hz = 0;  // B_max for the f_s >= B_max check, 0 = not checked
    std::uint64_t seed = 0;  // recorded for reproducibility only
};

using FrontEnd = std::variant<MulticosetConfig, MwcConfig>;

void validate(const MulticosetConfig& cfg);
void validate(const MwcConfig& cfg);

int n_slices(const FrontEnd& fe);
int n_channels(const FrontEnd& fe);

MwcConfig random_mwc_config(int n_slices, int n_channels, double channel_rate_hz, std::uint64_t seed);
MulticosetConfig random_multicoset_config(int n_slices, int n_channels, std::uint64_t seed);

struct SensingMatrix {
    CMatrix a;  // M x N
    double f_s = 0;
    int n_slices = 0;
};

SensingMatrix multicoset_matrix(const MulticosetConfig& cfg, double t_nyq);
SensingMatrix mwc_matrix(const MwcConfig& cfg);
SensingMatrix sensing_matrix(const FrontEnd& fe, double nyquist_rate_hz);

// Fourier-series coefficients c_il of one period of each mixing sequence, l = 0..N-1.
CMatrix mixing_coefficients(const MwcConfig& cfg);

struct ChannelSamples {
    std::vector<std::vector<cplx>> channels;  // M rows of L samples
    double f_s = 0;
    int n_slices = 0;
    double nyquist_rate_hz = 0;
    // Per-channel delay in Nyquist samples (coset offset); zero for the MWC.
    std::vector<int> delays;

    int m() const { return static_cast<int>(channels.size()); }
    std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

ChannelSamples simulate_sampling(const NyquistSignal& signal, const FrontEnd& fe);

// True iff every m-column subset of A has full rank m. Exhaustive; refuses N > 24.
bool spark_lower_check(const SensingMatrix& a, int m);

// Numerical rank with singular values below 1e-9 * sigma_max treated as zero.
int matrix_rank(const CMatrix& a, double rel_tol = 1e-9);

struct RateBound {
    double f_min = 0;
    int m_min = 0;
};

RateBound min_rate_bounds(int n_sig, double b_max, double f_nyq, double f_s, bool sparse);

} // namespace subcyclo
