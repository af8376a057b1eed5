#include "subcyclo/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subcyclo {

StructuredOperator build_operator(const SensingMatrix& a, const SelectionLayout& layout) {
    if (a.a.cols() != layout.n) throw ConfigError("layout size does not match the sensing matrix");
    StructuredOperator op;
    op.m = static_cast<int>(a.a.rows());
    op.n = layout.n;
    op.layout = layout;
    const int m = op.m;
    const int ns = static_cast<int>(layout.slots.size());
    op.phi.resize(static_cast<Eigen::Index>(m) * m, ns);
    for (int s = 0; s < ns; ++s) {
        const int k = layout.slots[s].row, l = layout.slots[s].col;
        for (int q = 0; q < m; ++q) {
            const cplx cl = std::conj(a.a(q, l));
            for (int p = 0; p < m; ++p) op.phi(q * m + p, s) = cl * a.a(p, k);
        }
    }
    op.column_norms = op.phi.colwise().norm().transpose();
    op.gram = op.phi.adjoint() * op.phi;
    op.phi1_slots = layout.diagonal_slots();
    op.phi2_slots = layout.anti_diagonal_slots();
    return op;
}

CMatrix StructuredOperator::columns(const std::vector<int>& slots) const {
    CMatrix out(phi.rows(), static_cast<Eigen::Index>(slots.size()));
    for (std::size_t i = 0; i < slots.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = phi.col(slots[i]);
    return out;
}

CMatrix StructuredOperator::phi1() const { return columns(phi1_slots); }
CMatrix StructuredOperator::phi2() const { return columns(phi2_slots); }

CMatrix StructuredOperator::nominal_phi() const {
    CMatrix out(phi.rows(), static_cast<Eigen::Index>(layout.raw.size()));
    for (std::size_t r = 0; r < layout.raw.size(); ++r) out.col(static_cast<Eigen::Index>(r)) = phi.col(layout.dedup[r]);
    return out;
}

namespace {

// LS on `slots` through the normal equations, given phi^H v for every slot.
LsFit solve_ls(const StructuredOperator& op, const std::vector<int>& slots, const CMatrix& v, const CMatrix& phi_h_v,
               double v_norm2) {
    LsFit fit;
    const auto s = static_cast<Eigen::Index>(slots.size());
    if (s == 0) {
        fit.coeffs = CMatrix::Zero(0, v.cols());
        fit.residual_sq = v_norm2;
        return fit;
    }
    CMatrix g(s, s), b(s, v.cols());
    for (Eigen::Index i = 0; i < s; ++i) {
        b.row(i) = phi_h_v.row(slots[i]);
        for (Eigen::Index j = 0; j < s; ++j) g(i, j) = op.gram(slots[i], slots[j]);
    }
    Eigen::LDLT<CMatrix> ldlt(g);
    if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-10) {
        fit.coeffs = ldlt.solve(b);
        fit.residual_sq = std::max(0.0, v_norm2 - (fit.coeffs.adjoint() * b).trace().real());
        return fit;
    }
    // Rank-deficient support: minimum-norm solution.
    const CMatrix cols = op.columns(slots);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(cols);
    cod.setThreshold(1e-9);
    fit.coeffs = cod.solve(v);
    fit.residual_sq = (v - cols * fit.coeffs).squaredNorm();
    fit.ill_conditioned = true;
    return fit;
}

} // namespace

LsFit least_squares(const StructuredOperator& op, const std::vector<int>& slots, const CMatrix& v) {
    const CMatrix phi_h_v = op.phi.adjoint() * v;
    return solve_ls(op, slots, v, phi_h_v, v.squaredNorm());
}

OmpResult structured_omp(const CMatrix& v, const StructuredOperator& op, const OmpOptions& opts) {
    const int ns = static_cast<int>(op.layout.slots.size());
    if (v.rows() != op.phi.rows()) throw ConfigError("measurement dimension must be M^2");
    OmpResult res;
    res.coeffs = CMatrix::Zero(0, v.cols());
    const double v_norm2 = v.squaredNorm();
    if (v_norm2 == 0 || v.cols() == 0) return res;

    std::vector<char> allowed(ns, opts.allowed.empty() ? 1 : 0);
    for (int s : opts.allowed) allowed.at(s) = 1;
    std::vector<char> gamma = allowed;
    for (int s = 0; s < ns; ++s)
        if (op.column_norms(s) == 0) gamma[s] = 0;

    const CMatrix phi_h_v = op.phi.adjoint() * v;
    const double eps = opts.eps_rel * v_norm2;
    const double tol2 = opts.residual_tol * opts.residual_tol * v_norm2;
    const int k_max = opts.k_max > 0 ? opts.k_max : ns;

    std::vector<int> support;
    LsFit fit = solve_ls(op, support, v, phi_h_v, v_norm2);
    double res2 = v_norm2;

    for (int it = 0; it < k_max; ++it) {
        if (res2 <= tol2) break;
        int best = -1;
        double best_val = 0;
        CMatrix corr = phi_h_v;
        if (!support.empty()) corr.noalias() -= op.gram(Eigen::all, support) * fit.coeffs;
        for (int s = 0; s < ns; ++s) {
            if (!gamma[s]) continue;
            const double val = corr.row(s).squaredNorm() / (op.column_norms(s) * op.column_norms(s));
            if (val > best_val) {
                best_val = val;
                best = s;
            }
        }
        if (best < 0 || best_val <= 1e-28 * v_norm2) break;
        res.iterations = it + 1;
        support.push_back(best);
        gamma[best] = 0;
        fit = solve_ls(op, support, v, phi_h_v, v_norm2);

        if (opts.structured) {
            std::vector<int> lambda;
            for (int t : complement_of(best, op.layout))
                if (allowed[t] && std::find(support.begin(), support.end(), t) == support.end()) lambda.push_back(t);
            for (int t : lambda) gamma[t] = 0;
            int partner = -1;
            LsFit partner_fit;
            double partner_res = std::numeric_limits<double>::infinity();
            for (int t : lambda) {
                auto trial = support;
                trial.push_back(t);
                LsFit f = solve_ls(op, trial, v, phi_h_v, v_norm2);
                if (f.residual_sq < partner_res) {
                    partner_res = f.residual_sq;
                    partner = t;
                    partner_fit = std::move(f);
                }
            }
            if (partner >= 0 && fit.residual_sq - partner_res > eps) {
                support.push_back(partner);
                fit = std::move(partner_fit);
            }
        }
        res2 = (v - op.columns(support) * fit.coeffs).squaredNorm();
        if (opts.max_support > 0 && static_cast<int>(support.size()) >= opts.max_support) break;
    }

    res.support = support;
    res.coeffs = fit.coeffs;
    res.residual_norm = std::sqrt(res2);
    res.ill_conditioned = fit.ill_conditioned;
    return res;
}

} // namespace subcyclo
