#include "subcyclo/layout.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "subcyclo/types.hpp"

namespace subcyclo {

SelectionLayout selection_layout(int n) {
    if (n < 2) throw ConfigError("selection layout needs N >= 2");
    SelectionLayout lay;
    lay.n = n;
    lay.row_slots.resize(n);
    for (int r = 0; r < n; ++r) {
        std::vector<RawSlot> row;
        for (int d = -1; d <= 1; ++d) {
            if (r + d >= 0 && r + d < n) row.push_back({r, r + d, Band::Diagonal, d});
            const int c = n - 1 - r + d;
            if (c >= 0 && c < n) row.push_back({r, c, Band::AntiDiagonal, d});
        }
        std::stable_sort(row.begin(), row.end(), [](const RawSlot& a, const RawSlot& b) {
            if (a.col != b.col) return a.col < b.col;
            return a.band == Band::Diagonal && b.band == Band::AntiDiagonal;
        });
        for (const auto& s : row) {
            const int raw_index = static_cast<int>(lay.raw.size());
            lay.raw.push_back(s);
            if (lay.slots.empty() || lay.slots.back().row != s.row || lay.slots.back().col != s.col) {
                lay.slots.push_back({s.row, s.col, false, false, {}});
                lay.row_slots[r].push_back(static_cast<int>(lay.slots.size()) - 1);
            }
            Slot& slot = lay.slots.back();
            (s.band == Band::Diagonal ? slot.diagonal : slot.anti_diagonal) = true;
            slot.raw.push_back(raw_index);
            lay.dedup.push_back(static_cast<int>(lay.slots.size()) - 1);
        }
    }
    return lay;
}

int SelectionLayout::slot_at(int row, int col) const {
    if (row < 0 || row >= n) return -1;
    for (int s : row_slots[row])
        if (slots[s].col == col) return s;
    return -1;
}

std::vector<int> SelectionLayout::diagonal_slots() const {
    std::vector<int> out(n);
    for (int k = 0; k < n; ++k) out[k] = slot_at(k, k);
    return out;
}

std::vector<int> SelectionLayout::anti_diagonal_slots() const {
    std::vector<int> out;
    for (int s = 0; s < static_cast<int>(slots.size()); ++s)
        if (slots[s].anti_diagonal) out.push_back(s);
    return out;
}

GroupSlots complementary_set(int group_j, const SelectionLayout& layout) {
    if (group_j < 1 || group_j > layout.n) throw ConfigError("group index must lie in [1, N]");
    GroupSlots g;
    for (int s : layout.row_slots[group_j - 1]) {
        if (layout.slots[s].diagonal) g.diagonal.push_back(s);
        if (layout.slots[s].anti_diagonal) g.anti_diagonal.push_back(s);
    }
    return g;
}

std::vector<int> complement_of(int slot, const SelectionLayout& layout) {
    const Slot& s = layout.slots.at(slot);
    std::vector<int> out;
    for (int t : layout.row_slots[s.row]) {
        if (t == slot) continue;
        const Slot& u = layout.slots[t];
        if ((s.diagonal && u.anti_diagonal) || (s.anti_diagonal && u.diagonal)) out.push_back(t);
    }
    return out;
}

bool sigma_admissible(const std::vector<int>& support, const SelectionLayout& layout, int k) {
    std::set<int> uniq(support.begin(), support.end());
    if (uniq.size() != support.size()) return false;
    if (k > 0 && static_cast<int>(support.size()) > 2 * k) return false;
    std::vector<int> flexible;
    for (int s : support) {
        const Slot& sl = layout.slots.at(s);
        if (sl.diagonal && sl.anti_diagonal) flexible.push_back(s);
    }
    if (flexible.size() > 20) throw ConfigError("too many dual-band slots for exhaustive admissibility check");
    const std::size_t combos = std::size_t{1} << flexible.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        std::map<int, int> row_d, row_a, col_d, col_a;
        bool ok = true;
        for (int s : support) {
            const Slot& sl = layout.slots[s];
            bool as_diag = sl.diagonal;
            if (sl.diagonal && sl.anti_diagonal) {
                const auto pos = std::find(flexible.begin(), flexible.end(), s) - flexible.begin();
                as_diag = ((mask >> pos) & 1) == 0;
            }
            if (as_diag)
                ok = ok && ++row_d[sl.row] <= 1 && ++col_d[sl.col] <= 1;
            else
                ok = ok && ++row_a[sl.row] <= 1 && ++col_a[sl.col] <= 1;
            if (!ok) break;
        }
        if (ok) return true;
    }
    return false;
}

bool group_symmetric(const std::vector<int>& support, const SelectionLayout& layout) {
    std::set<int> rows;
    for (int s : support) rows.insert(layout.slots.at(s).row);
    for (int r : rows) {
        const int mirror = layout.n - 1 - r;
        if (!rows.count(mirror) && !rows.count(mirror - 1) && !rows.count(mirror + 1)) return false;
    }
    return true;
}

} // namespace subcyclo
