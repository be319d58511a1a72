#include "blend/combiners.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace blend {

std::string_view to_string(CombinerKind kind) {
  switch (kind) {
    case CombinerKind::Intersection: return "intersection";
    case CombinerKind::Union: return "union";
    case CombinerKind::Difference: return "difference";
    case CombinerKind::Counter: return "counter";
  }
  return "?";
}

std::optional<CombinerKind> combiner_kind_from_string(std::string_view s) {
  if (s == "intersection") return CombinerKind::Intersection;
  if (s == "union") return CombinerKind::Union;
  if (s == "difference") return CombinerKind::Difference;
  if (s == "counter") return CombinerKind::Counter;
  return std::nullopt;
}

namespace {

// One entry per table: the first (best ranked) occurrence wins.
RankedTables dedup_best(const RankedTables& input) {
  RankedTables out;
  std::unordered_set<std::uint32_t> seen;
  for (const auto& entry : input)
    if (seen.insert(entry.table_id).second) out.push_back(entry);
  return out;
}

struct Merged {
  RankedEntry entry;
  std::size_t best_rank;  // lowest dedup position across inputs
};

void sort_merged(std::vector<Merged>& merged) {
  std::sort(merged.begin(), merged.end(), [](const Merged& a, const Merged& b) {
    if (a.entry.score != b.entry.score) return a.entry.score > b.entry.score;
    if (a.best_rank != b.best_rank) return a.best_rank < b.best_rank;
    return a.entry.table_id < b.entry.table_id;
  });
}

RankedTables finalize(std::vector<Merged> merged, std::uint32_t k) {
  sort_merged(merged);
  RankedTables out;
  out.reserve(std::min<std::size_t>(merged.size(), k));
  for (const auto& m : merged) {
    if (out.size() == k) break;
    out.push_back(m.entry);
  }
  return out;
}

}  // namespace

RankedTables combine_intersection(const std::vector<RankedTables>& inputs,
                                  std::uint32_t k) {
  if (inputs.size() < 2)
    throw CombinerError("intersection requires at least two inputs");

  std::vector<RankedTables> deduped;
  deduped.reserve(inputs.size());
  for (const auto& input : inputs) deduped.push_back(dedup_best(input));

  // Tables present everywhere; table sets per input for the membership test,
  // positions for the rank tie-break.
  std::vector<std::unordered_map<std::uint32_t, std::size_t>> positions;
  for (const auto& input : deduped) {
    std::unordered_map<std::uint32_t, std::size_t> pos;
    for (std::size_t i = 0; i < input.size(); ++i)
      pos.emplace(input[i].table_id, i);
    positions.push_back(std::move(pos));
  }

  std::vector<Merged> merged;
  for (std::size_t i = 0; i < deduped.back().size(); ++i) {
    const auto& entry = deduped.back()[i];
    std::size_t best_rank = i;
    bool everywhere = true;
    for (std::size_t j = 0; j + 1 < positions.size() && everywhere; ++j) {
      auto it = positions[j].find(entry.table_id);
      if (it == positions[j].end()) {
        everywhere = false;
      } else {
        best_rank = std::min(best_rank, it->second);
      }
    }
    if (everywhere) merged.push_back(Merged{entry, best_rank});
  }
  return finalize(std::move(merged), k);
}

RankedTables combine_union(const std::vector<RankedTables>& inputs,
                           std::uint32_t k) {
  if (inputs.size() < 2)
    throw CombinerError("union requires at least two inputs");

  std::vector<Merged> merged;
  std::unordered_map<std::uint32_t, std::size_t> slot;
  for (const auto& input : inputs) {
    const RankedTables deduped = dedup_best(input);
    for (std::size_t i = 0; i < deduped.size(); ++i) {
      const auto& entry = deduped[i];
      auto [it, inserted] = slot.emplace(entry.table_id, merged.size());
      if (inserted) {
        merged.push_back(Merged{entry, i});
      } else {
        Merged& m = merged[it->second];
        m.best_rank = std::min(m.best_rank, i);
        if (entry.score > m.entry.score) m.entry = entry;  // max; earliest wins ties
      }
    }
  }
  return finalize(std::move(merged), k);
}

RankedTables combine_difference(const RankedTables& first,
                                const RankedTables& second, std::uint32_t k) {
  std::unordered_set<std::uint32_t> subtract;
  for (const auto& entry : second) subtract.insert(entry.table_id);

  RankedTables out;
  for (const auto& entry : dedup_best(first)) {
    if (subtract.contains(entry.table_id)) continue;
    if (out.size() == k) break;
    out.push_back(entry);
  }
  return out;
}

RankedTables combine_counter(const std::vector<RankedTables>& inputs,
                             std::uint32_t k) {
  if (inputs.empty()) throw CombinerError("counter requires at least one input");

  std::vector<Merged> merged;
  std::unordered_map<std::uint32_t, std::size_t> slot;
  for (const auto& input : inputs) {
    const RankedTables deduped = dedup_best(input);
    for (std::size_t i = 0; i < deduped.size(); ++i) {
      const auto& entry = deduped[i];
      auto [it, inserted] = slot.emplace(entry.table_id, merged.size());
      if (inserted) {
        Merged m{entry, i};
        m.entry.score = 1.0;
        merged.push_back(std::move(m));
      } else {
        Merged& m = merged[it->second];
        m.entry.score += 1.0;
        if (i < m.best_rank) {
          m.best_rank = i;
          m.entry.detail = entry.detail;
        }
      }
    }
  }
  return finalize(std::move(merged), k);
}

RankedTables combine(const CombinerSpec& spec,
                     const std::vector<RankedTables>& inputs) {
  switch (spec.kind) {
    case CombinerKind::Intersection:
      return combine_intersection(inputs, spec.k);
    case CombinerKind::Union:
      return combine_union(inputs, spec.k);
    case CombinerKind::Difference:
      if (inputs.size() != 2)
        throw CombinerError("difference requires exactly two inputs");
      return combine_difference(inputs[0], inputs[1], spec.k);
    case CombinerKind::Counter:
      return combine_counter(inputs, spec.k);
  }
  throw CombinerError("unknown combiner kind");
}

}  // namespace blend
