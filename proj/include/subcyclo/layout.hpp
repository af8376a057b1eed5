#pragma once

#include <vector>

namespace subcyclo {

enum class Band { Diagonal, AntiDiagonal };

// One nominal slot of the selection. Row/col are 0-based.
struct RawSlot {
    int row, col;
    Band band;
    int offset;  // -1, 0, +1 from the (anti-)diagonal
};

// A distinct matrix position kept by the selection.
struct Slot {
    int row, col;
    bool diagonal = false;       // on the -1/0/+1 diagonals
    bool anti_diagonal = false;  // on the -1/0/+1 anti-diagonals
    std::vector<int> raw;        // nominal slots that collapse onto this one
};

struct SelectionLayout {
    static constexpr int kVersion = 1;
    int n = 0;
    std::vector<RawSlot> raw;        // 6N-4 entries, row-major, column order within a row
    std::vector<int> dedup;          // raw index -> slot index
    std::vector<Slot> slots;         // distinct positions, row-major
    std::vector<std::vector<int>> row_slots;

    int slot_at(int row, int col) const;  // -1 if not kept
    std::vector<int> diagonal_slots() const;       // slot of (k, k), k = 0..N-1
    std::vector<int> anti_diagonal_slots() const;  // every slot on an anti-diagonal band
};

SelectionLayout selection_layout(int n);

// Slots of row group j (1-based) split by band. Positions on both bands appear in both lists.
struct GroupSlots {
    std::vector<int> diagonal;
    std::vector<int> anti_diagonal;
};
GroupSlots complementary_set(int group_j, const SelectionLayout& layout);

// Slots that may accompany `slot` in its row with the other band role.
std::vector<int> complement_of(int slot, const SelectionLayout& layout);

// Structured sparsity check: |S| <= 2K (skipped when k <= 0) and some band assignment of the
// slots puts at most one diagonal and one anti-diagonal entry in every row and every column.
bool sigma_admissible(const std::vector<int>& support, const SelectionLayout& layout, int k);

// Rows j with row N-1-j (or a neighbour of it) also active, for every active row.
bool group_symmetric(const std::vector<int>& support, const SelectionLayout& layout);

} // namespace subcyclo
