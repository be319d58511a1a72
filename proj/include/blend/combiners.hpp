#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blend/ranking.hpp"

namespace blend {

struct CombinerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CombinerKind { Intersection, Union, Difference, Counter };

std::string_view to_string(CombinerKind kind);
std::optional<CombinerKind> combiner_kind_from_string(std::string_view s);

struct CombinerSpec {
  CombinerKind kind = CombinerKind::Intersection;
  std::uint32_t k = 10;
};

// Every input is deduplicated to one entry per table (the first, i.e. best
// ranked, occurrence) before the set operation. Output ordering everywhere:
// score descending, best input rank ascending, table id ascending — except
// Difference, which preserves the first input's order.

// Tables present in every input; scores/details from the last input.
RankedTables combine_intersection(const std::vector<RankedTables>& inputs,
                                  std::uint32_t k);

// Union of the tables; score is the max across inputs.
RankedTables combine_union(const std::vector<RankedTables>& inputs,
                           std::uint32_t k);

// Tables of `first` not present in `second`, keeping first's scores and order.
RankedTables combine_difference(const RankedTables& first,
                                const RankedTables& second, std::uint32_t k);

// Score = number of inputs containing the table.
RankedTables combine_counter(const std::vector<RankedTables>& inputs,
                             std::uint32_t k);

RankedTables combine(const CombinerSpec& spec,
                     const std::vector<RankedTables>& inputs);

}  // namespace blend
