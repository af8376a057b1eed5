#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "subcyclo/correlation.hpp"
#include "subcyclo/layout.hpp"
#include "subcyclo/recovery.hpp"
#include "subcyclo/types.hpp"

namespace subcyclo {

struct GridMeta {
    double f_nyq = 0, f_s = 0;
    int n = 0, p = 0, q = 0;
    double delta() const { return f_s / q; }
    // Shift applied to f relative to the textbook mapping with f~ = u in [0, f_s):
    // slices run from -f_Nyq/2 + (k-1) f_s, which puts f~ = u - f_s/2.
    double half_slice_offset_hz() const { return -f_s / 2; }
};

GridMeta grid_meta(const CorrelationTensor& t);

struct MappedPoint {
    double alpha_hz, f_hz;
};

// Cell coordinates of entry (i, j) at (q_a, q_f). i, j are 1-based slice indices.
// alpha_bin counts delta, f_half counts delta / 2.
struct MappedBin {
    long alpha_bin, f_half;
};
MappedBin index_bins(int i, int j, int qa, int qf, const GridMeta& meta);
MappedPoint index_map(int i, int j, int qa, int qf, const GridMeta& meta);

// Sparse cyclic spectrum on alpha >= 0. alpha = alpha_bin * delta, f = f_half * delta / 2.
class CyclicSpectrumGrid {
public:
    struct Cell {
        cplx sum = 0;
        double energy = 0;  // sum of |v|^2 over contributions
        int count = 0;
        cplx value() const { return count ? sum / static_cast<double>(count) : cplx(0); }
    };
    struct Entry {
        long alpha_bin, f_half;
        cplx value;
    };

    CyclicSpectrumGrid() = default;
    explicit CyclicSpectrumGrid(const GridMeta& meta) : meta_(meta) {}

    const GridMeta& meta() const { return meta_; }
    long alpha_bins() const { return static_cast<long>(meta_.n) * meta_.q; }
    long f_half_limit() const { return static_cast<long>(meta_.n) * meta_.q; }

    // Accumulate a contribution. S at -alpha is the conjugate of S at alpha, so negative
    // alpha is folded onto the stored half-plane with conjugation.
    void add(long alpha_bin, long f_half, cplx v);
    // Averaged value; negative alpha reads the mirrored cell conjugated.
    cplx value(long alpha_bin, long f_half) const;
    bool has(long alpha_bin, long f_half) const;

    double alpha_hz(long alpha_bin) const { return alpha_bin * meta_.delta(); }
    double f_hz(long f_half) const { return f_half * meta_.delta() / 2; }

    std::vector<Entry> entries() const;  // sorted by (alpha, f)
    std::size_t size() const { return cells_.size(); }
    double scattered_energy() const;     // sum of contribution energies
    double energy() const;               // sum of |cell value|^2
    void scale(double c);
    // Multiply every cell by f(alpha_hz).
    template <class F>
    void scale_by_alpha(F&& f) {
        for (auto& [k, cell] : cells_) {
            const double s = f(alpha_hz(k / stride()));
            cell.sum *= s;
            cell.energy *= s * s;
        }
    }

    template <class F>
    void for_each(F&& f) const {
        for (const auto& [key, cell] : cells_) f(key / stride(), key % stride() - f_half_limit(), cell);
    }

private:
    long stride() const { return 2 * f_half_limit() + 1; }
    long key(long alpha_bin, long f_half) const { return alpha_bin * stride() + (f_half + f_half_limit()); }

    GridMeta meta_;
    std::unordered_map<long, Cell> cells_;
};

// Scatter recovered slot values onto the grid. Exact zero-cyclic-frequency cells are dropped.
CyclicSpectrumGrid assemble(const RecoveredSlices& rec, const SelectionLayout& layout, const GridMeta& meta);

// Scatter a full slice-domain tensor (M = N channels are the slices), restricted to the layout
// positions when `layout` is given.
CyclicSpectrumGrid assemble_tensor(const CorrelationTensor& rx, const GridMeta& meta,
                                   const SelectionLayout* layout = nullptr);

// |S(alpha, 0)| for alpha_bin = 0..N*Q-1, nearest-bin selection on the f axis.
std::vector<double> profile_at_zero_f(const CyclicSpectrumGrid& grid);
double profile_value(const CyclicSpectrumGrid& grid, double alpha_hz);

void export_grid_csv(const CyclicSpectrumGrid& grid, const std::string& path);

} // namespace subcyclo
