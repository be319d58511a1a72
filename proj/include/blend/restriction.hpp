#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace blend {

// Candidate-table filter the optimizer injects into seekers. Include mode
// scans only the listed tables' posting ranges; Exclude skips them.
struct TableRestriction {
  enum class Mode { None, Include, Exclude };
  Mode mode = Mode::None;
  std::vector<std::uint32_t> tables;  // sorted, unique

  static TableRestriction include(std::vector<std::uint32_t> tables) {
    return make(Mode::Include, std::move(tables));
  }
  static TableRestriction exclude(std::vector<std::uint32_t> tables) {
    return make(Mode::Exclude, std::move(tables));
  }

  bool allows(std::uint32_t table_id) const {
    if (mode == Mode::None) return true;
    const bool listed =
        std::binary_search(tables.begin(), tables.end(), table_id);
    return mode == Mode::Include ? listed : !listed;
  }

 private:
  static TableRestriction make(Mode mode, std::vector<std::uint32_t> tables) {
    std::sort(tables.begin(), tables.end());
    tables.erase(std::unique(tables.begin(), tables.end()), tables.end());
    return TableRestriction{mode, std::move(tables)};
  }
};

}  // namespace blend
