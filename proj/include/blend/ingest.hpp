#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blend {

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NormalizePolicy { Exact, Lower };

std::string_view to_string(NormalizePolicy policy);
std::optional<NormalizePolicy> normalize_policy_from_string(std::string_view s);

struct NormalizedValue {
  std::string text;               // trimmed (and lowercased under Lower)
  std::optional<double> numeric;  // decimal parse of the trimmed string

  friend bool operator==(const NormalizedValue&, const NormalizedValue&) = default;
};

// Returns nullopt when the trimmed string is empty. `numeric` is filled iff
// the trimmed string is a plain decimal number (optional sign, optional
// fraction, optional exponent; no thousands separators).
std::optional<NormalizedValue> normalize_value(std::string_view raw,
                                               NormalizePolicy policy);

// Convenience: normalized text only, empty string when the cell is empty.
std::string normalize_text(std::string_view raw, NormalizePolicy policy);

struct ColumnStats {
  std::uint32_t column_id = 0;
  std::uint64_t non_empty_count = 0;
  std::uint64_t numeric_count = 0;
  bool is_numeric = false;            // >= 50% of non-empty cells parse
  std::optional<double> mean;         // over parseable cells, iff is_numeric
};

using MaybeCell = std::optional<NormalizedValue>;

ColumnStats compute_column_stats(std::span<const MaybeCell> values,
                                 std::uint32_t column_id = 0);

struct TableCatalogEntry {
  std::uint32_t table_id = 0;
  std::string path;  // lake-relative, '/'-separated
  std::vector<std::string> column_names;
  std::uint64_t row_count = 0;
  std::vector<ColumnStats> column_stats;
};

struct ParsedTable {
  TableCatalogEntry entry;
  // rows[r][c]: normalized cell or nullopt; c indexes header columns.
  std::vector<std::vector<MaybeCell>> rows;
};

// Normalizes raw rows against a header, padding short rows and dropping
// cells beyond the header width, then computes per-column stats.
ParsedTable parse_table(std::string name, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& raw_rows,
                        NormalizePolicy policy);

struct ScanReport {
  std::vector<TableCatalogEntry> catalog;
  std::vector<std::string> warnings;
};

// Walks lake_dir recursively for *.csv files, assigns table ids by
// lexicographic relative path, and feeds each ParsedTable to `sink`.
// Malformed files are skipped with a warning; an unreadable directory is
// fatal (IngestError).
ScanReport scan_lake(const std::filesystem::path& lake_dir, NormalizePolicy policy,
                     const std::function<void(ParsedTable&&)>& sink);

struct LakeData {
  NormalizePolicy policy = NormalizePolicy::Lower;
  ScanReport report;
  std::vector<ParsedTable> tables;
};

LakeData scan_lake(const std::filesystem::path& lake_dir, NormalizePolicy policy);

}  // namespace blend
