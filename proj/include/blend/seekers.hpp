#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blend/index.hpp"
#include "blend/ranking.hpp"

namespace blend {

struct SeekerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SeekerKind { SC, Keyword, MC, Corr };

std::string_view to_string(SeekerKind kind);
std::optional<SeekerKind> seeker_kind_from_string(std::string_view s);

inline constexpr std::uint32_t kDefaultSampleSize = 256;
inline constexpr std::uint32_t kDefaultMinSupport = 3;

struct SeekerSpec {
  SeekerKind kind = SeekerKind::SC;
  // Raw (un-normalized) query values. SC/KEYWORD: one column. MC: n >= 2
  // columns of equal length. CORR: {key, target}.
  std::vector<std::vector<std::string>> query_columns;
  std::uint32_t k = 10;
  // CORR only: sample rows with row_id < h; nullopt means unlimited.
  std::optional<std::uint32_t> sample_size = kDefaultSampleSize;
  std::uint32_t min_support = kDefaultMinSupport;  // CORR only
  TableRestriction restriction;                    // filled by the optimizer
};

struct SeekStats {
  // Postings visited through the value access path plus candidate rows
  // fetched from the table access path.
  std::uint64_t rows_scanned = 0;
};

// Top-K (table, column) groups by distinct-overlap with the query column.
RankedTables seek_sc(const IndexHandle& index, const SeekerSpec& spec,
                     SeekStats* stats = nullptr);

// As seek_sc but grouped by table only.
RankedTables seek_keyword(const IndexHandle& index, const SeekerSpec& spec,
                          SeekStats* stats = nullptr);

// Top-K tables by distinct query tuples matched under one consistent
// injective column mapping. Three phases: candidate rows via the n-way
// posting join, super-key subsumption filter, exact validation.
RankedTables seek_mc(const IndexHandle& index, const SeekerSpec& spec,
                     SeekStats* stats = nullptr);

// Top-K (table, key_col, num_col) groups by |qcr|, support >= min_support.
RankedTables seek_corr(const IndexHandle& index, const SeekerSpec& spec,
                       SeekStats* stats = nullptr);

RankedTables run_seeker(const IndexHandle& index, const SeekerSpec& spec,
                        SeekStats* stats = nullptr);

// Exposed for the MC precision diagnostics: phase-1/phase-2 candidate rows.
struct McCandidateRow {
  std::uint32_t table_id;
  std::uint32_t row_id;
};
struct McPhases {
  std::vector<McCandidateRow> joined;     // rows matching all query columns
  std::vector<McCandidateRow> survivors;  // rows passing the signature filter
};
McPhases seek_mc_phases(const IndexHandle& index, const SeekerSpec& spec);

}  // namespace blend
