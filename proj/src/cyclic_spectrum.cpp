#include "subcyclo/cyclic_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace subcyclo {

GridMeta grid_meta(const CorrelationTensor& t) {
    GridMeta m;
    m.f_s = t.f_s;
    m.n = t.n_slices;
    m.p = t.p;
    m.q = t.q;
    m.f_nyq = t.f_s * t.n_slices;
    return m;
}

MappedBin index_bins(int i, int j, int qa, int qf, const GridMeta& meta) {
    if (i < 1 || i > meta.n || j < 1 || j > meta.n) throw ConfigError("slice index outside [1, N]");
    if (qa < 0 || qa >= meta.q || qf < 0 || qf >= meta.q - qa) throw ConfigError("grid index outside the shift grid");
    const long q = meta.q, n = meta.n;
    const long k = i - 1, l = j - 1;
    return {(l - k) * q + qa, -n * q + 2L * qf + (k + l) * q + qa};
}

MappedPoint index_map(int i, int j, int qa, int qf, const GridMeta& meta) {
    const MappedBin b = index_bins(i, j, qa, qf, meta);
    return {b.alpha_bin * meta.delta(), b.f_half * meta.delta() / 2};
}

void CyclicSpectrumGrid::add(long alpha_bin, long f_half, cplx v) {
    if (alpha_bin < 0) {
        alpha_bin = -alpha_bin;
        v = std::conj(v);
    }
    if (alpha_bin >= alpha_bins() || std::abs(f_half) > f_half_limit()) throw ConfigError("grid cell outside the plane");
    Cell& c = cells_[key(alpha_bin, f_half)];
    c.sum += v;
    c.energy += std::norm(v);
    ++c.count;
}

bool CyclicSpectrumGrid::has(long alpha_bin, long f_half) const {
    if (alpha_bin < 0) alpha_bin = -alpha_bin;
    if (alpha_bin >= alpha_bins() || std::abs(f_half) > f_half_limit()) return false;
    return cells_.count(key(alpha_bin, f_half)) > 0;
}

cplx CyclicSpectrumGrid::value(long alpha_bin, long f_half) const {
    bool mirrored = false;
    if (alpha_bin < 0) {
        alpha_bin = -alpha_bin;
        mirrored = true;
    }
    if (alpha_bin >= alpha_bins() || std::abs(f_half) > f_half_limit()) return 0;
    const auto it = cells_.find(key(alpha_bin, f_half));
    if (it == cells_.end()) return 0;
    const cplx v = it->second.value();
    return mirrored ? std::conj(v) : v;
}

std::vector<CyclicSpectrumGrid::Entry> CyclicSpectrumGrid::entries() const {
    std::vector<Entry> out;
    out.reserve(cells_.size());
    for_each([&](long a, long f, const Cell& c) { out.push_back({a, f, c.value()}); });
    std::sort(out.begin(), out.end(), [](const Entry& x, const Entry& y) {
        return x.alpha_bin != y.alpha_bin ? x.alpha_bin < y.alpha_bin : x.f_half < y.f_half;
    });
    return out;
}

double CyclicSpectrumGrid::scattered_energy() const {
    double e = 0;
    for (const auto& [k, c] : cells_) e += c.energy;
    return e;
}

double CyclicSpectrumGrid::energy() const {
    double e = 0;
    for (const auto& [k, c] : cells_) e += std::norm(c.value());
    return e;
}

void CyclicSpectrumGrid::scale(double c) {
    for (auto& [k, cell] : cells_) {
        cell.sum *= c;
        cell.energy *= c * c;
    }
}

CyclicSpectrumGrid assemble(const RecoveredSlices& rec, const SelectionLayout& layout, const GridMeta& meta) {
    if (layout.n != meta.n || rec.n != meta.n || rec.q != meta.q) throw ConfigError("recovery does not match grid metadata");
    CyclicSpectrumGrid grid(meta);
    for (const auto& sr : rec.shifts)
        for (const auto& piece : sr.pieces)
            for (std::size_t s = 0; s < piece.support.slots.size(); ++s) {
                const Slot& slot = layout.slots[piece.support.slots[s]];
                for (int qf = piece.begin; qf < piece.end; ++qf) {
                    const MappedBin b = index_bins(slot.row + 1, slot.col + 1, sr.qa, qf, meta);
                    if (b.alpha_bin == 0) continue;
                    grid.add(b.alpha_bin, b.f_half, piece.coeffs(static_cast<Eigen::Index>(s), qf - piece.begin));
                }
            }
    return grid;
}

CyclicSpectrumGrid assemble_tensor(const CorrelationTensor& rx, const GridMeta& meta, const SelectionLayout* layout) {
    if (rx.m != meta.n || rx.q != meta.q) throw ConfigError("slice tensor does not match grid metadata");
    CyclicSpectrumGrid grid(meta);
    std::vector<std::pair<int, int>> positions;
    if (layout) {
        for (const auto& s : layout->slots) positions.emplace_back(s.row, s.col);
    } else {
        for (int k = 0; k < meta.n; ++k)
            for (int l = 0; l < meta.n; ++l) positions.emplace_back(k, l);
    }
    for (int qa = 0; qa < rx.q; ++qa)
        for (int qf = 0; qf + qa < rx.q; ++qf) {
            const auto r = rx.at(qa, qf);
            for (const auto& [k, l] : positions) {
                const MappedBin b = index_bins(k + 1, l + 1, qa, qf, meta);
                if (b.alpha_bin == 0) continue;
                grid.add(b.alpha_bin, b.f_half, r(k, l));
            }
        }
    return grid;
}

std::vector<double> profile_at_zero_f(const CyclicSpectrumGrid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.alpha_bins()), 0.0);
    for (long a = 0; a < grid.alpha_bins(); ++a) {
        if (grid.has(a, 0)) {
            out[a] = std::abs(grid.value(a, 0));
            continue;
        }
        double sum = 0;
        int cnt = 0;
        for (long f : {-1L, 1L})
            if (grid.has(a, f)) {
                sum += std::abs(grid.value(a, f));
                ++cnt;
            }
        out[a] = cnt ? sum / cnt : 0.0;
    }
    return out;
}

double profile_value(const CyclicSpectrumGrid& grid, double alpha_hz) {
    const long a = std::lround(std::abs(alpha_hz) / grid.meta().delta());
    if (a >= grid.alpha_bins()) return 0;
    if (grid.has(a, 0)) return std::abs(grid.value(a, 0));
    double sum = 0;
    int cnt = 0;
    for (long f : {-1L, 1L})
        if (grid.has(a, f)) {
            sum += std::abs(grid.value(a, f));
            ++cnt;
        }
    return cnt ? sum / cnt : 0.0;
}

void export_grid_csv(const CyclicSpectrumGrid& grid, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw RuntimeFailure("cannot write " + path);
    os << "alpha_hz,f_hz,magnitude\n";
    char line[128];
    for (const auto& e : grid.entries()) {
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.9e\n", grid.alpha_hz(e.alpha_bin), grid.f_hz(e.f_half),
                      std::abs(e.value));
        os << line;
    }
}

} // namespace subcyclo
