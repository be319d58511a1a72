#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace blend {

// The one ranking order used by seekers, combiners, and the reference
// oracles alike: score descending, table id ascending, then the detail
// column ids lexicographically ascending.
struct EntryDetail {
  // SC: the matched column. MC: the chosen column mapping, in query-column
  // order. CORR: {key_col, num_col}. KEYWORD: empty.
  std::vector<std::uint32_t> columns;
  std::optional<double> qcr;  // signed value; entry score carries |qcr|

  friend bool operator==(const EntryDetail&, const EntryDetail&) = default;
};

struct RankedEntry {
  std::uint32_t table_id = 0;
  double score = 0.0;
  EntryDetail detail;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

using RankedTables = std::vector<RankedEntry>;

inline constexpr std::uint32_t kUnlimitedK =
    std::numeric_limits<std::uint32_t>::max();

inline bool ranked_entry_less(const RankedEntry& a, const RankedEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.table_id != b.table_id) return a.table_id < b.table_id;
  return a.detail.columns < b.detail.columns;
}

inline void rank_truncate(RankedTables& entries, std::uint32_t k) {
  std::sort(entries.begin(), entries.end(), ranked_entry_less);
  if (entries.size() > k) entries.resize(k);
}

}  // namespace blend
