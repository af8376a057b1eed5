#include "subcyclo/recovery.hpp"

#include <algorithm>
#include <cmath>

namespace subcyclo {

Frame ctf_frame(const CMatrix& rz, double delta, const CtfOptions& opts) {
    Frame f;
    const auto nf = rz.cols();
    f.v = CMatrix(rz.rows(), 0);
    f.eigenvalues = RVector(0);
    if (nf == 0) return f;
    const CMatrix g = delta * (rz.adjoint() * rz);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    const RVector lam = es.eigenvalues().reverse();
    const CMatrix w = es.eigenvectors().rowwise().reverse();
    f.eigenvalues = lam;
    const double lmax = lam(0);
    if (!(lmax > 0)) return f;
    double gate = opts.tau * lmax;
    if (opts.noise_calibrated) {
        // only min(M^2, n_f) eigenvalues can be nonzero
        const auto r = std::min(rz.rows(), nf);
        std::vector<double> sorted(lam.data(), lam.data() + r);
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        gate = std::max(gate, opts.median_factor * sorted[sorted.size() / 2]);
    }
    Eigen::Index keep = 0;
    while (keep < lam.size() && lam(keep) > gate) ++keep;
    f.v = std::sqrt(delta) * (rz * w.leftCols(keep));
    return f;
}

Frame ctf_reduce(const CorrelationTensor& t, int qa, const CtfOptions& opts, int begin, int end) {
    if (end < 0) end = t.q - qa;
    return ctf_frame(measurement_matrix(t, qa, begin, end), t.resolution(), opts);
}

SupportSet make_support(std::vector<int> slots, const SelectionLayout& layout, int k) {
    std::sort(slots.begin(), slots.end());
    SupportSet s;
    s.slots = std::move(slots);
    s.k = k;
    s.admissible = sigma_admissible(s.slots, layout, k);
    s.group_symmetric = group_symmetric(s.slots, layout);
    return s;
}

namespace {

struct ShiftPlan {
    std::vector<int> allowed;
    bool structured;
};

ShiftPlan plan_for(int qa, const StructuredOperator& op, const RecoveryOptions& opts) {
    if (qa == 0 && opts.zero_shift == ZeroShiftMode::AntiDiagonalOnly) return {op.phi2_slots, false};
    return {{}, opts.structured};
}

RecoveredPiece solve_piece(const CMatrix& rz, int begin, const StructuredOperator& op, const ShiftPlan& plan,
                           const RecoveryOptions& opts, double delta, int k_max, int joint_cap) {
    RecoveredPiece piece;
    piece.begin = begin;
    piece.end = begin + static_cast<int>(rz.cols());
    const Frame frame = ctf_frame(rz, delta, opts.ctf);
    std::vector<int> support;
    if (frame.v.cols() > 0) {
        OmpOptions o;
        o.k_max = k_max;
        o.eps_rel = opts.eps_rel;
        o.residual_tol = opts.residual_tol;
        o.structured = plan.structured;
        o.allowed = plan.allowed;
        o.max_support = joint_cap;
        support = structured_omp(frame.v, op, o).support;
    }
    piece.support = make_support(support, op.layout, opts.k);
    const LsFit fit = least_squares(op, piece.support.slots, rz);
    piece.coeffs = fit.coeffs;
    piece.ill_conditioned = fit.ill_conditioned;
    return piece;
}

int default_joint_iterations(const RecoveryOptions& opts) { return opts.k_max > 0 ? opts.k_max : 2 * opts.k; }

void bisect(const CorrelationTensor& t, const StructuredOperator& op, int qa, const RecoveryOptions& opts,
            int begin, int end, int depth, std::vector<RecoveredPiece>& out) {
    const ShiftPlan plan = plan_for(qa, op, opts);
    const CMatrix rz = measurement_matrix(t, qa, begin, end);
    RecoveredPiece piece =
        solve_piece(rz, begin, op, plan, opts, t.resolution(), default_joint_iterations(opts), 4 * opts.k);
    const bool too_big = opts.k > 0 && static_cast<int>(piece.support.slots.size()) > 2 * opts.k;
    if (too_big && depth > 0 && end - begin >= 2) {
        const int mid = begin + (end - begin) / 2;
        bisect(t, op, qa, opts, begin, mid, depth - 1, out);
        bisect(t, op, qa, opts, mid, end, depth - 1, out);
        return;
    }
    piece.oversized = too_big;
    out.push_back(std::move(piece));
}

} // namespace

std::vector<RecoveredPiece> sbr2_bisection(const CorrelationTensor& t, const StructuredOperator& op, int qa,
                                           const RecoveryOptions& opts, int depth_max) {
    if (depth_max < 0) throw ConfigError("depth_max must be >= 0");
    if (qa < 0 || qa >= t.q) throw ConfigError("shift index outside the grid");
    std::vector<RecoveredPiece> out;
    bisect(t, op, qa, opts, 0, t.q - qa, depth_max, out);
    return out;
}

RecoveredSlices recover_slices(const CorrelationTensor& t, const StructuredOperator& op, const RecoveryOptions& opts) {
    if (t.m != op.m) throw ConfigError("tensor channel count does not match the operator");
    if (opts.k < 1) throw ConfigError("recovery needs the band count K >= 1");
    RecoveredSlices out;
    out.n = op.n;
    out.q = t.q;
    out.p = t.p;
    out.m = t.m;
    out.f_s = t.f_s;
    std::vector<int> shifts = opts.shifts;
    if (shifts.empty())
        for (int qa = 0; qa < t.q; ++qa) shifts.push_back(qa);
    for (int qa : shifts) {
        if (qa < 0 || qa >= t.q) throw ConfigError("shift index outside the grid");
        if (qa == 0 && opts.zero_shift == ZeroShiftMode::Skip) continue;
        ShiftRecovery sr;
        sr.qa = qa;
        if (opts.per_frequency) {
            const ShiftPlan plan = plan_for(qa, op, opts);
            const int k_max = opts.k_max > 0 ? opts.k_max : opts.k;
            for (int qf = 0; qf < t.q - qa; ++qf)
                sr.pieces.push_back(
                    solve_piece(measurement_matrix(t, qa, qf, qf + 1), qf, op, plan, opts, t.resolution(), k_max, 0));
        } else {
            sr.pieces = sbr2_bisection(t, op, qa, opts, opts.sbr2_depth);
        }
        out.shifts.push_back(std::move(sr));
    }
    return out;
}

cplx RecoveredSlices::value(int qa, int qf, int slot) const {
    for (const auto& sr : shifts) {
        if (sr.qa != qa) continue;
        for (const auto& piece : sr.pieces) {
            if (qf < piece.begin || qf >= piece.end) continue;
            const auto& s = piece.support.slots;
            const auto it = std::find(s.begin(), s.end(), slot);
            if (it == s.end()) return 0;
            return piece.coeffs(it - s.begin(), qf - piece.begin);
        }
    }
    return 0;
}

int RecoveredSlices::flagged_pieces() const {
    int c = 0;
    for (const auto& sr : shifts)
        for (const auto& p : sr.pieces) c += (p.ill_conditioned || p.oversized);
    return c;
}

PowerSpectrum recover_power_spectrum(const CorrelationTensor& t, const StructuredOperator& op,
                                     const RecoveryOptions& opts) {
    if (opts.k < 1) throw ConfigError("recovery needs the band count K >= 1");
    PowerSpectrum ps;
    ps.delta = t.resolution();
    ps.f_start = -0.5 * t.f_s * op.n;
    ps.psd.assign(static_cast<std::size_t>(op.n) * t.q, 0.0);
    const CMatrix rz = measurement_matrix(t, 0, 0, t.q);
    const Frame frame = ctf_frame(rz, t.resolution(), opts.ctf);
    if (frame.v.cols() == 0) return ps;
    OmpOptions o;
    o.k_max = opts.k_max > 0 ? opts.k_max : 2 * opts.k;
    o.residual_tol = opts.residual_tol;
    o.structured = false;
    o.allowed = op.phi1_slots;
    const auto support = structured_omp(frame.v, op, o).support;
    const LsFit fit = least_squares(op, support, rz);
    for (std::size_t s = 0; s < support.size(); ++s) {
        const int k = op.layout.slots[support[s]].row;
        ps.active_slices.push_back(k);
        for (int qf = 0; qf < t.q; ++qf)
            ps.psd[static_cast<std::size_t>(k) * t.q + qf] = fit.coeffs(static_cast<Eigen::Index>(s), qf).real();
    }
    std::sort(ps.active_slices.begin(), ps.active_slices.end());
    return ps;
}

} // namespace subcyclo
