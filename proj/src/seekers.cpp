#include "blend/seekers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace blend {

std::string_view to_string(SeekerKind kind) {
  switch (kind) {
    case SeekerKind::SC: return "sc";
    case SeekerKind::Keyword: return "keyword";
    case SeekerKind::MC: return "mc";
    case SeekerKind::Corr: return "corr";
  }
  return "?";
}

std::optional<SeekerKind> seeker_kind_from_string(std::string_view s) {
  if (s == "sc") return SeekerKind::SC;
  if (s == "keyword") return SeekerKind::Keyword;
  if (s == "mc") return SeekerKind::MC;
  if (s == "corr") return SeekerKind::Corr;
  return std::nullopt;
}

namespace {

// Distinct normalized query values, sorted.
std::vector<std::string> normalize_query_column(
    const std::vector<std::string>& raw, NormalizePolicy policy) {
  std::vector<std::string> values;
  values.reserve(raw.size());
  for (const auto& v : raw) {
    std::string text = normalize_text(v, policy);
    if (!text.empty()) values.push_back(std::move(text));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::uint64_t table_row_key(std::uint32_t table, std::uint32_t row) {
  return (static_cast<std::uint64_t>(table) << 32) | row;
}

// Grouped overlap counting shared by SC (per table+column) and KEYWORD
// (per table).
RankedTables seek_overlap(const IndexHandle& index, const SeekerSpec& spec,
                          bool group_by_column, SeekStats* stats) {
  if (spec.query_columns.size() != 1)
    throw SeekerError("seeker takes exactly one query column");
  const auto values =
      normalize_query_column(spec.query_columns[0], index.policy());
  if (values.empty()) throw SeekerError("empty query column");

  // One count per group; a query value counts once per group no matter how
  // many rows it hits.
  std::unordered_map<std::uint64_t, std::uint32_t> counts;
  std::unordered_set<std::uint64_t> seen;
  std::size_t current_value = SIZE_MAX;
  const std::uint64_t scanned = index.for_each_posting(
      values, spec.restriction, [&](std::size_t vi, const Posting& p) {
        if (vi != current_value) {
          current_value = vi;
          seen.clear();
        }
        const std::uint64_t group =
            group_by_column ? (static_cast<std::uint64_t>(p.table_id) << 16) |
                                  p.column_id
                            : p.table_id;
        if (seen.insert(group).second) ++counts[group];
      });
  if (stats) stats->rows_scanned += scanned;

  RankedTables entries;
  entries.reserve(counts.size());
  for (auto [group, count] : counts) {
    RankedEntry entry;
    if (group_by_column) {
      entry.table_id = static_cast<std::uint32_t>(group >> 16);
      entry.detail.columns = {static_cast<std::uint32_t>(group & 0xffff)};
    } else {
      entry.table_id = static_cast<std::uint32_t>(group);
    }
    entry.score = count;
    entries.push_back(std::move(entry));
  }
  rank_truncate(entries, spec.k);
  return entries;
}

struct McQuery {
  std::vector<std::vector<std::string>> tuples;       // distinct, sorted
  std::vector<std::vector<std::string>> value_sets;   // per column, sorted
  std::vector<Signature> tuple_signatures;
};

McQuery prepare_mc_query(const IndexHandle& index, const SeekerSpec& spec) {
  const std::size_t arity = spec.query_columns.size();
  if (arity < 2)
    throw SeekerError("multi-column seeker requires at least two query columns");
  if (arity > 32) throw SeekerError("too many query columns");
  const std::size_t length = spec.query_columns[0].size();
  for (const auto& column : spec.query_columns)
    if (column.size() != length)
      throw SeekerError("query columns must have equal length");

  std::set<std::vector<std::string>> tuple_set;
  for (std::size_t r = 0; r < length; ++r) {
    std::vector<std::string> tuple(arity);
    bool complete = true;
    for (std::size_t c = 0; c < arity; ++c) {
      tuple[c] = normalize_text(spec.query_columns[c][r], index.policy());
      if (tuple[c].empty()) {
        complete = false;
        break;
      }
    }
    if (complete) tuple_set.insert(std::move(tuple));
  }
  if (tuple_set.empty()) throw SeekerError("empty query relation");

  McQuery query;
  query.tuples.assign(tuple_set.begin(), tuple_set.end());
  query.value_sets.resize(arity);
  for (const auto& tuple : query.tuples) {
    Signature sig;
    for (std::size_t c = 0; c < arity; ++c) {
      query.value_sets[c].push_back(tuple[c]);
      sig |= cell_signature(tuple[c]);
    }
    query.tuple_signatures.push_back(sig);
  }
  for (auto& set : query.value_sets) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  return query;
}

// Phase 1: rows holding, for every query column, at least one of its values.
std::vector<McCandidateRow> mc_joined_rows(const IndexHandle& index,
                                           const SeekerSpec& spec,
                                           const McQuery& query,
                                           SeekStats* stats) {
  const std::size_t arity = query.value_sets.size();
  const std::uint32_t full_mask =
      arity == 32 ? 0xffffffffu : (1u << arity) - 1;
  std::unordered_map<std::uint64_t, std::uint32_t> masks;
  for (std::size_t c = 0; c < arity; ++c) {
    const std::uint64_t scanned = index.for_each_posting(
        query.value_sets[c], spec.restriction,
        [&](std::size_t, const Posting& p) {
          masks[table_row_key(p.table_id, p.row_id)] |= 1u << c;
        });
    if (stats) stats->rows_scanned += scanned;
  }

  std::vector<McCandidateRow> rows;
  for (auto [key, mask] : masks)
    if (mask == full_mask)
      rows.push_back(McCandidateRow{static_cast<std::uint32_t>(key >> 32),
                                    static_cast<std::uint32_t>(key)});
  std::sort(rows.begin(), rows.end(),
            [](const McCandidateRow& a, const McCandidateRow& b) {
              return std::tie(a.table_id, a.row_id) <
                     std::tie(b.table_id, b.row_id);
            });
  return rows;
}

// Phase 2: keep rows whose super key subsumes some query tuple's signature.
std::vector<McCandidateRow> mc_filter_rows(
    const IndexHandle& index, const McQuery& query,
    const std::vector<McCandidateRow>& joined) {
  std::vector<McCandidateRow> survivors;
  survivors.reserve(joined.size());
  for (const auto& row : joined) {
    const Signature row_sig = index.row_signature(row.table_id, row.row_id);
    for (const auto& tuple_sig : query.tuple_signatures) {
      if (subsumes(tuple_sig, row_sig)) {
        survivors.push_back(row);
        break;
      }
    }
  }
  return survivors;
}

struct McValidation {
  std::uint32_t score = 0;
  std::vector<std::uint32_t> mapping;
};

// Phase 3 per table: the injective query->candidate column mapping that
// matches the most distinct query tuples; ties go to the lexicographically
// smallest mapping. Assignments are enumerated in lexicographic order, so
// the first strict maximum wins.
McValidation mc_validate_table(const IndexHandle& index, const McQuery& query,
                               std::uint32_t table_id,
                               std::span<const McCandidateRow> rows,
                               SeekStats* stats) {
  const std::size_t arity = query.value_sets.size();
  const auto& store = index.table_store(table_id);
  if (stats) stats->rows_scanned += rows.size();

  // Tuples as value ids; a tuple with an unknown value can never match.
  std::vector<std::vector<std::uint32_t>> tuple_ids;
  for (const auto& tuple : query.tuples) {
    std::vector<std::uint32_t> ids(arity);
    bool known = true;
    for (std::size_t c = 0; c < arity && known; ++c) {
      ids[c] = index.find_value_id(tuple[c]);
      known = ids[c] != IndexHandle::kInvalidValueId;
    }
    if (known) tuple_ids.push_back(std::move(ids));
  }
  if (tuple_ids.empty()) return {};

  std::vector<std::unordered_set<std::uint32_t>> value_ids(arity);
  for (std::size_t c = 0; c < arity; ++c)
    for (const auto& v : query.value_sets[c]) {
      const std::uint32_t id = index.find_value_id(v);
      if (id != IndexHandle::kInvalidValueId) value_ids[c].insert(id);
    }

  // (column -> value id) per surviving row, plus per-query-column candidate
  // column sets.
  std::vector<std::unordered_map<std::uint16_t, std::uint32_t>> row_cells;
  std::vector<std::set<std::uint16_t>> candidate_cols(arity);
  row_cells.reserve(rows.size());
  for (const auto& row : rows) {
    std::unordered_map<std::uint16_t, std::uint32_t> cells;
    for (const auto& cell : store.rows[row.row_id]) {
      cells[cell.column_id] = cell.value_id;
      for (std::size_t c = 0; c < arity; ++c)
        if (value_ids[c].contains(cell.value_id))
          candidate_cols[c].insert(cell.column_id);
    }
    row_cells.push_back(std::move(cells));
  }

  McValidation best;
  std::vector<std::uint16_t> assignment(arity);
  std::unordered_set<std::uint16_t> used_cols;

  auto count_matches = [&]() {
    std::uint32_t count = 0;
    for (const auto& tuple : tuple_ids) {
      for (const auto& cells : row_cells) {
        bool match = true;
        for (std::size_t c = 0; c < arity && match; ++c) {
          auto it = cells.find(assignment[c]);
          match = it != cells.end() && it->second == tuple[c];
        }
        if (match) {
          ++count;
          break;
        }
      }
    }
    return count;
  };

  std::function<void(std::size_t)> enumerate = [&](std::size_t c) {
    if (c == arity) {
      const std::uint32_t count = count_matches();
      if (count > best.score) {
        best.score = count;
        best.mapping.assign(assignment.begin(), assignment.end());
      }
      return;
    }
    for (std::uint16_t col : candidate_cols[c]) {
      if (used_cols.contains(col)) continue;
      used_cols.insert(col);
      assignment[c] = col;
      enumerate(c + 1);
      used_cols.erase(col);
    }
  };
  enumerate(0);
  return best;
}

}  // namespace

RankedTables seek_sc(const IndexHandle& index, const SeekerSpec& spec,
                     SeekStats* stats) {
  return seek_overlap(index, spec, /*group_by_column=*/true, stats);
}

RankedTables seek_keyword(const IndexHandle& index, const SeekerSpec& spec,
                          SeekStats* stats) {
  return seek_overlap(index, spec, /*group_by_column=*/false, stats);
}

McPhases seek_mc_phases(const IndexHandle& index, const SeekerSpec& spec) {
  const McQuery query = prepare_mc_query(index, spec);
  McPhases phases;
  phases.joined = mc_joined_rows(index, spec, query, nullptr);
  phases.survivors = mc_filter_rows(index, query, phases.joined);
  return phases;
}

RankedTables seek_mc(const IndexHandle& index, const SeekerSpec& spec,
                     SeekStats* stats) {
  const McQuery query = prepare_mc_query(index, spec);
  const auto joined = mc_joined_rows(index, spec, query, stats);
  const auto survivors = mc_filter_rows(index, query, joined);

  RankedTables entries;
  std::size_t begin = 0;
  while (begin < survivors.size()) {
    std::size_t end = begin;
    while (end < survivors.size() &&
           survivors[end].table_id == survivors[begin].table_id)
      ++end;
    const std::uint32_t table_id = survivors[begin].table_id;
    const McValidation result = mc_validate_table(
        index, query, table_id,
        std::span(survivors.data() + begin, end - begin), stats);
    if (result.score > 0) {
      RankedEntry entry;
      entry.table_id = table_id;
      entry.score = result.score;
      entry.detail.columns = result.mapping;
      entries.push_back(std::move(entry));
    }
    begin = end;
  }
  rank_truncate(entries, spec.k);
  return entries;
}

RankedTables seek_corr(const IndexHandle& index, const SeekerSpec& spec,
                       SeekStats* stats) {
  if (spec.query_columns.size() != 2)
    throw SeekerError("correlation seeker takes key and target columns");
  const auto& raw_key = spec.query_columns[0];
  const auto& raw_target = spec.query_columns[1];
  if (raw_key.size() != raw_target.size())
    throw SeekerError("query columns must have equal length");

  // Target mean over the parseable target values.
  std::vector<std::optional<double>> target(raw_target.size());
  double sum = 0.0;
  std::uint64_t parseable = 0;
  for (std::size_t r = 0; r < raw_target.size(); ++r) {
    auto cell = normalize_value(raw_target[r], index.policy());
    if (cell && cell->numeric) {
      target[r] = cell->numeric;
      sum += *cell->numeric;
      ++parseable;
    }
  }
  if (parseable < 2) throw SeekerError("non-numeric target");
  const double mean = sum / static_cast<double>(parseable);

  // Key tokens partitioned by the paired target's side of the mean. A key
  // appearing with both classes is kept in both.
  enum : std::uint8_t { kAbove = 1, kBelow = 2 };
  std::unordered_map<std::string, std::uint8_t> token_class;
  for (std::size_t r = 0; r < raw_key.size(); ++r) {
    if (!target[r]) continue;
    std::string key = normalize_text(raw_key[r], index.policy());
    if (key.empty()) continue;
    token_class[key] |= *target[r] >= mean ? kAbove : kBelow;
  }

  std::vector<std::string> tokens;
  tokens.reserve(token_class.size());
  for (const auto& [token, _] : token_class) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());

  // Key-side hits per (table, row): matching column + class bits.
  struct KeyHit {
    std::uint16_t column;
    std::uint8_t classes;
  };
  std::unordered_map<std::uint64_t, std::vector<KeyHit>> hits;
  const std::optional<std::uint32_t> h = spec.sample_size;
  const std::uint64_t scanned = index.for_each_posting(
      tokens, spec.restriction, [&](std::size_t vi, const Posting& p) {
        if (h && p.row_id >= *h) return;
        hits[table_row_key(p.table_id, p.row_id)].push_back(
            KeyHit{p.column_id, token_class.at(tokens[vi])});
      });
  if (stats) stats->rows_scanned += scanned;

  // (table, key_col, num_col) -> agreement / disagreement counts.
  struct Counts {
    std::uint64_t agree = 0;
    std::uint64_t disagree = 0;
  };
  std::unordered_map<std::uint64_t, Counts> groups;
  for (const auto& [key, key_hits] : hits) {
    const auto table_id = static_cast<std::uint32_t>(key >> 32);
    const auto row_id = static_cast<std::uint32_t>(key);
    const auto& cells = index.table_store(table_id).rows[row_id];
    if (stats) ++stats->rows_scanned;
    for (const auto& cell : cells) {
      if (cell.quadrant == Quadrant::None) continue;
      for (const auto& hit : key_hits) {
        if (hit.column == cell.column_id) continue;  // self pair
        auto& counts = groups[(static_cast<std::uint64_t>(table_id) << 32) |
                              (static_cast<std::uint64_t>(hit.column) << 16) |
                              cell.column_id];
        if (hit.classes & kAbove)
          (cell.quadrant == Quadrant::T ? counts.agree : counts.disagree) += 1;
        if (hit.classes & kBelow)
          (cell.quadrant == Quadrant::F ? counts.agree : counts.disagree) += 1;
      }
    }
  }

  RankedTables entries;
  for (const auto& [group, counts] : groups) {
    const std::uint64_t n = counts.agree + counts.disagree;
    if (n < spec.min_support) continue;
    const double qcr =
        (static_cast<double>(counts.agree) - static_cast<double>(counts.disagree)) /
        static_cast<double>(n);
    RankedEntry entry;
    entry.table_id = static_cast<std::uint32_t>(group >> 32);
    entry.score = std::fabs(qcr);
    entry.detail.columns = {static_cast<std::uint32_t>((group >> 16) & 0xffff),
                            static_cast<std::uint32_t>(group & 0xffff)};
    entry.detail.qcr = qcr;
    entries.push_back(std::move(entry));
  }
  rank_truncate(entries, spec.k);
  return entries;
}

RankedTables run_seeker(const IndexHandle& index, const SeekerSpec& spec,
                        SeekStats* stats) {
  switch (spec.kind) {
    case SeekerKind::SC: return seek_sc(index, spec, stats);
    case SeekerKind::Keyword: return seek_keyword(index, spec, stats);
    case SeekerKind::MC: return seek_mc(index, spec, stats);
    case SeekerKind::Corr: return seek_corr(index, spec, stats);
  }
  throw SeekerError("unknown seeker kind");
}

}  // namespace blend
