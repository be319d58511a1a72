#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "blend/ingest.hpp"
#include "blend/restriction.hpp"
#include "blend/signature.hpp"

namespace blend {

struct IndexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;

// T iff the cell parses numeric, its column is numeric, and value >= column
// mean; F iff parseable, numeric column, value < mean; None otherwise.
enum class Quadrant : std::uint8_t { None = 0, T = 1, F = 2 };

struct CellRecord {
  std::string value;
  std::uint32_t table_id = 0;
  std::uint32_t column_id = 0;
  std::uint32_t row_id = 0;
  Quadrant quadrant = Quadrant::None;
};

// One index hit; posting lists are sorted by (table_id, row_id, column_id).
struct Posting {
  std::uint32_t table_id;
  std::uint32_t row_id;
  std::uint16_t column_id;
  Quadrant quadrant;
};

struct StoredCell {
  std::uint16_t column_id;
  Quadrant quadrant;
  std::uint32_t value_id;
};

struct TableStore {
  std::vector<std::vector<StoredCell>> rows;  // dense row_id; cells by column
  std::vector<Signature> row_signatures;      // dense row_id; zero when empty
};

struct FetchedRow {
  std::uint32_t row_id = 0;
  Signature signature;
  std::vector<std::pair<std::uint32_t, std::string>> cells;  // (column, value)
};

// The single logical relation over the lake plus its two access paths
// (value -> postings, table -> rows) and per-row signatures. Immutable
// after build; any number of concurrent readers.
class IndexHandle {
 public:
  IndexHandle() = default;

  static IndexHandle build(const LakeData& lake);
  // Streams tables from disk without materializing the whole lake.
  static IndexHandle build_from_dir(const std::filesystem::path& lake_dir,
                                    NormalizePolicy policy,
                                    std::vector<std::string>* warnings = nullptr);

  // Persistence. `save` refuses to overwrite unless the caller removed the
  // directory first; it takes a lock file for the duration of the write.
  void save(const std::filesystem::path& dir) const;
  static IndexHandle load(const std::filesystem::path& dir);

  NormalizePolicy policy() const { return policy_; }
  const std::vector<TableCatalogEntry>& catalog() const { return catalog_; }
  std::uint32_t table_count() const {
    return static_cast<std::uint32_t>(catalog_.size());
  }
  std::uint64_t cell_count() const { return cell_count_; }
  std::uint64_t signature_count() const { return signature_count_; }

  // Union of the posting lists for `values`, each joined with its quadrant
  // flag, ordered by (table_id, row_id, column_id). Unknown values
  // contribute nothing.
  std::vector<CellRecord> lookup_values(
      std::span<const std::string> values) const;

  // Streaming variant used by the seekers; returns postings visited.
  // `fn(value_index, posting)` where value_index addresses `values`.
  std::uint64_t for_each_posting(
      std::span<const std::string> values, const TableRestriction& restriction,
      const std::function<void(std::size_t, const Posting&)>& fn) const;

  // Materialized cells for exactly the requested rows of one table.
  std::vector<FetchedRow> fetch_rows(std::uint32_t table_id,
                                     std::span<const std::uint32_t> row_ids) const;

  const TableStore& table_store(std::uint32_t table_id) const;
  Signature row_signature(std::uint32_t table_id, std::uint32_t row_id) const;
  const std::string& value_text(std::uint32_t value_id) const {
    return values_[value_id];
  }
  // kInvalidValueId when the value is not in the dictionary.
  std::uint32_t find_value_id(std::string_view value) const;
  static constexpr std::uint32_t kInvalidValueId = 0xffffffffu;

  // Canonical relation dump: CSV with header
  // cell_value,table_id,column_id,row_id,super_key_hex,quadrant
  // one line per cell, sorted by (table_id, row_id, column_id).
  void dump_canonical(std::ostream& out) const;
  std::string dump_canonical() const;

 private:
  NormalizePolicy policy_ = NormalizePolicy::Lower;
  std::vector<TableCatalogEntry> catalog_;
  std::vector<std::string> values_;                       // value_id -> text
  std::unordered_map<std::string, std::uint32_t> value_ids_;
  std::vector<std::vector<Posting>> postings_;            // by value_id
  std::vector<TableStore> tables_;
  std::uint64_t cell_count_ = 0;
  std::uint64_t signature_count_ = 0;

  std::uint32_t intern(std::string value);
  void add_table(const ParsedTable& table);
  void rebuild_postings();
};

}  // namespace blend
