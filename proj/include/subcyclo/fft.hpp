#pragma once

#include <vector>

#include "subcyclo/types.hpp"

namespace subcyclo::fft {

// Unnormalized forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / n_total).
std::vector<cplx> forward(const std::vector<cplx>& x);
// Full-length spectrum of a real sequence.
std::vector<cplx> forward_real(const std::vector<double>& x);
// Unnormalized inverse, so inverse(forward(x)) = n * x.
std::vector<cplx> inverse(const std::vector<cplx>& x);

// In-place forward DFTs of `howmany` contiguous blocks of length n.
void forward_batch(cplx* data, int n, int howmany);

} // namespace subcyclo::fft
