#pragma once

#include <vector>

#include "subcyclo/correlation.hpp"
#include "subcyclo/layout.hpp"
#include "subcyclo/sampler.hpp"
#include "subcyclo/types.hpp"

namespace subcyclo {

// Phi maps the kept entries of vec(R_x) to vec(R_z) = vec(A R_x A^H).
// Column of slot (k, l) is conj(a_l) kron a_k; duplicated nominal slots share one column.
struct StructuredOperator {
    int m = 0, n = 0;
    SelectionLayout layout;
    CMatrix phi;           // M^2 x (distinct slots)
    RVector column_norms;  // of phi
    CMatrix gram;          // phi^H phi
    std::vector<int> phi1_slots;  // diagonal (k, k) positions
    std::vector<int> phi2_slots;  // anti-diagonal band positions

    CMatrix phi1() const;
    CMatrix phi2() const;
    CMatrix columns(const std::vector<int>& slots) const;
    // Nominal 6N-4 column view, duplicates repeated.
    CMatrix nominal_phi() const;
};

StructuredOperator build_operator(const SensingMatrix& a, const SelectionLayout& layout);

struct OmpOptions {
    int k_max = 0;               // outer iterations; <= 0 means residual-based halting only
    double eps_rel = 1e-3;       // partner acceptance gate, relative to ||v||^2
    double residual_tol = 1e-6;  // stop once ||r|| < tol * ||v||
    bool structured = true;      // false: plain (simultaneous) OMP
    std::vector<int> allowed;    // candidate slots; empty means all
    int max_support = 0;         // cap on |S|; <= 0 means no cap beyond k_max
};

struct OmpResult {
    std::vector<int> support;  // in selection order
    CMatrix coeffs;            // |S| x r, rows follow `support`
    double residual_norm = 0;
    int iterations = 0;
    bool ill_conditioned = false;
};

// Single vector (r = 1) or MMV (r > 1). Selection uses the row norm of normalized correlations.
OmpResult structured_omp(const CMatrix& v, const StructuredOperator& op, const OmpOptions& opts);

// Least squares of v on the given slots; min-norm with a flag when rank deficient.
struct LsFit {
    CMatrix coeffs;
    double residual_sq = 0;
    bool ill_conditioned = false;
};
LsFit least_squares(const StructuredOperator& op, const std::vector<int>& slots, const CMatrix& v);

struct CtfOptions {
    double tau = 1e-6;               // relative eigenvalue gate
    bool noise_calibrated = false;   // additionally gate at median_factor * median eigenvalue
    double median_factor = 4.0;
};

struct Frame {
    CMatrix v;            // M^2 x rank, V V^H = Q
    RVector eigenvalues;  // descending, all computed
};

// Frame for the columns of `rz` (M^2 x n_f) with Q = delta * rz rz^H.
Frame ctf_frame(const CMatrix& rz, double delta, const CtfOptions& opts);
Frame ctf_reduce(const CorrelationTensor& t, int qa, const CtfOptions& opts, int begin = 0, int end = -1);

struct SupportSet {
    std::vector<int> slots;  // ascending slot ids
    int k = 0;
    bool admissible = false;       // sigma_admissible with this k
    bool group_symmetric = false;  // informational
};

SupportSet make_support(std::vector<int> slots, const SelectionLayout& layout, int k);

struct RecoveredPiece {
    int begin = 0, end = 0;  // q_f interval
    SupportSet support;
    CMatrix coeffs;  // |S| x (end - begin)
    bool ill_conditioned = false;
    bool oversized = false;
};

struct ShiftRecovery {
    int qa = 0;
    std::vector<RecoveredPiece> pieces;
};

enum class ZeroShiftMode {
    Joint,             // same solve as every other shift; diagonal cells are dropped later
    AntiDiagonalOnly,  // plain OMP on the anti-diagonal columns, power-spectrum part treated as noise
    Skip,
};

struct RecoveryOptions {
    int k = 0;              // band count K; per-frequency vectors are 2K-sparse
    int sbr2_depth = 0;     // 0: plain CTF per shift
    bool structured = true;
    bool per_frequency = false;  // solve every q_f on its own instead of CTF
    double eps_rel = 1e-3;
    double residual_tol = 1e-6;
    int k_max = 0;          // outer OMP iterations per solve, 0: 2K (joint) or K (per frequency)
    CtfOptions ctf;
    ZeroShiftMode zero_shift = ZeroShiftMode::Joint;
    std::vector<int> shifts;  // restrict to these q_a; empty = all
};

struct RecoveredSlices {
    int n = 0, q = 0, p = 0, m = 0;
    double f_s = 0;
    std::vector<ShiftRecovery> shifts;

    // Value of slot at (q_a, q_f); zero off support.
    cplx value(int qa, int qf, int slot) const;
    int flagged_pieces() const;
};

RecoveredSlices recover_slices(const CorrelationTensor& t, const StructuredOperator& op, const RecoveryOptions& opts);

// Recovery for one shift: CTF support on [begin, end), halved while the support exceeds 2K.
std::vector<RecoveredPiece> sbr2_bisection(const CorrelationTensor& t, const StructuredOperator& op, int qa,
                                           const RecoveryOptions& opts, int depth_max);

// Power spectrum from the zero shift restricted to the diagonal columns. Indexed by global
// bin k * Q + q_f, frequency -f_Nyq/2 + bin * delta.
struct PowerSpectrum {
    std::vector<double> psd;
    double f_start = 0;
    double delta = 0;
    std::vector<int> active_slices;
};

PowerSpectrum recover_power_spectrum(const CorrelationTensor& t, const StructuredOperator& op,
                                     const RecoveryOptions& opts);

} // namespace subcyclo
