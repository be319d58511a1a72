#include "blend/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "blend/csv.hpp"
#include "json.hpp"

namespace blend {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kCatalogFile[] = "catalog.json";
constexpr char kDataFile[] = "data.bin";
constexpr char kLockFile[] = ".build.lock";
constexpr std::uint32_t kDataMagic = 0x444e4c42;  // "BLND"

char quadrant_char(Quadrant q) {
  switch (q) {
    case Quadrant::T: return 'T';
    case Quadrant::F: return 'F';
    default: return '\0';
  }
}

// Explicit little-endian I/O so index files are portable.
struct BinaryWriter {
  std::ofstream out;

  explicit BinaryWriter(const fs::path& path)
      : out(path, std::ios::binary | std::ios::trunc) {
    if (!out) throw IndexError("cannot write " + path.string());
  }

  template <typename T>
  void put(T value) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
  }

  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
};

struct BinaryReader {
  std::ifstream in;

  explicit BinaryReader(const fs::path& path) : in(path, std::ios::binary) {
    if (!in) throw IndexError("cannot open " + path.string());
  }

  template <typename T>
  T get() {
    static_assert(std::is_unsigned_v<T>);
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw IndexError("truncated index data file");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
  }

  std::string get_string() {
    auto len = get<std::uint32_t>();
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IndexError("truncated index data file");
    return s;
  }
};

json stats_to_json(const ColumnStats& stats) {
  json j;
  j["column_id"] = stats.column_id;
  j["non_empty_count"] = stats.non_empty_count;
  j["numeric_count"] = stats.numeric_count;
  j["is_numeric"] = stats.is_numeric;
  if (stats.mean) j["mean"] = *stats.mean;
  return j;
}

ColumnStats stats_from_json(const json& j) {
  ColumnStats stats;
  stats.column_id = j.at("column_id").get<std::uint32_t>();
  stats.non_empty_count = j.at("non_empty_count").get<std::uint64_t>();
  stats.numeric_count = j.at("numeric_count").get<std::uint64_t>();
  stats.is_numeric = j.at("is_numeric").get<bool>();
  if (j.contains("mean")) stats.mean = j.at("mean").get<double>();
  return stats;
}

std::string seed_hex(std::uint64_t seed) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace

std::uint32_t IndexHandle::intern(std::string value) {
  auto it = value_ids_.find(value);
  if (it != value_ids_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(values_.size());
  value_ids_.emplace(value, id);
  values_.push_back(std::move(value));
  postings_.emplace_back();
  return id;
}

void IndexHandle::add_table(const ParsedTable& table) {
  const auto table_id = static_cast<std::uint32_t>(tables_.size());
  if (table.entry.table_id != table_id)
    throw IndexError("catalog ids must be dense and in scan order");
  catalog_.push_back(table.entry);

  TableStore store;
  store.rows.resize(table.rows.size());
  store.row_signatures.resize(table.rows.size());

  const auto& stats = table.entry.column_stats;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Signature row_sig;
    bool any_cell = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& cell = row[c];
      if (!cell) continue;
      any_cell = true;
      Quadrant quadrant = Quadrant::None;
      if (stats[c].is_numeric && cell->numeric)
        quadrant = *cell->numeric >= *stats[c].mean ? Quadrant::T : Quadrant::F;
      const std::uint32_t value_id = intern(cell->text);
      store.rows[r].push_back(StoredCell{static_cast<std::uint16_t>(c),
                                         quadrant, value_id});
      postings_[value_id].push_back(Posting{table_id,
                                            static_cast<std::uint32_t>(r),
                                            static_cast<std::uint16_t>(c),
                                            quadrant});
      row_sig |= cell_signature(cell->text);
      ++cell_count_;
    }
    store.row_signatures[r] = row_sig;
    if (any_cell) ++signature_count_;
  }
  tables_.push_back(std::move(store));
}

IndexHandle IndexHandle::build(const LakeData& lake) {
  IndexHandle index;
  index.policy_ = lake.policy;
  for (const auto& table : lake.tables) index.add_table(table);
  return index;
}

IndexHandle IndexHandle::build_from_dir(const fs::path& lake_dir,
                                        NormalizePolicy policy,
                                        std::vector<std::string>* warnings) {
  IndexHandle index;
  index.policy_ = policy;
  ScanReport report = scan_lake(lake_dir, policy, [&index](ParsedTable&& table) {
    index.add_table(table);
  });
  if (warnings) *warnings = std::move(report.warnings);
  return index;
}

std::uint32_t IndexHandle::find_value_id(std::string_view value) const {
  auto it = value_ids_.find(std::string(value));
  return it == value_ids_.end() ? kInvalidValueId : it->second;
}

std::uint64_t IndexHandle::for_each_posting(
    std::span<const std::string> values, const TableRestriction& restriction,
    const std::function<void(std::size_t, const Posting&)>& fn) const {
  std::uint64_t visited = 0;
  auto table_less = [](const Posting& p, std::uint32_t t) {
    return p.table_id < t;
  };
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    const std::uint32_t id = find_value_id(values[vi]);
    if (id == kInvalidValueId) continue;
    const auto& list = postings_[id];
    if (restriction.mode == TableRestriction::Mode::Include) {
      for (std::uint32_t t : restriction.tables) {
        auto it = std::lower_bound(list.begin(), list.end(), t, table_less);
        for (; it != list.end() && it->table_id == t; ++it) {
          ++visited;
          fn(vi, *it);
        }
      }
    } else if (restriction.mode == TableRestriction::Mode::Exclude) {
      auto it = list.begin();
      while (it != list.end()) {
        if (!restriction.allows(it->table_id)) {
          it = std::lower_bound(it, list.end(), it->table_id + 1, table_less);
          continue;
        }
        ++visited;
        fn(vi, *it);
        ++it;
      }
    } else {
      for (const auto& posting : list) {
        ++visited;
        fn(vi, posting);
      }
    }
  }
  return visited;
}

std::vector<CellRecord> IndexHandle::lookup_values(
    std::span<const std::string> values) const {
  // Dedupe so a value passed twice does not duplicate its postings.
  std::vector<std::string> unique(values.begin(), values.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<CellRecord> records;
  for_each_posting(unique, TableRestriction{},
                   [&](std::size_t vi, const Posting& p) {
                     records.push_back(CellRecord{unique[vi], p.table_id,
                                                  p.column_id, p.row_id,
                                                  p.quadrant});
                   });
  std::sort(records.begin(), records.end(),
            [](const CellRecord& a, const CellRecord& b) {
              return std::tie(a.table_id, a.row_id, a.column_id) <
                     std::tie(b.table_id, b.row_id, b.column_id);
            });
  return records;
}

const TableStore& IndexHandle::table_store(std::uint32_t table_id) const {
  if (table_id >= tables_.size())
    throw IndexError("no such table: " + std::to_string(table_id));
  return tables_[table_id];
}

Signature IndexHandle::row_signature(std::uint32_t table_id,
                                     std::uint32_t row_id) const {
  const auto& store = table_store(table_id);
  if (row_id >= store.row_signatures.size())
    throw IndexError("no such row: " + std::to_string(row_id));
  return store.row_signatures[row_id];
}

std::vector<FetchedRow> IndexHandle::fetch_rows(
    std::uint32_t table_id, std::span<const std::uint32_t> row_ids) const {
  const auto& store = table_store(table_id);
  std::vector<FetchedRow> rows;
  rows.reserve(row_ids.size());
  for (std::uint32_t r : row_ids) {
    if (r >= store.rows.size())
      throw IndexError("no such row: " + std::to_string(r));
    FetchedRow row;
    row.row_id = r;
    row.signature = store.row_signatures[r];
    row.cells.reserve(store.rows[r].size());
    for (const auto& cell : store.rows[r])
      row.cells.emplace_back(cell.column_id, values_[cell.value_id]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void IndexHandle::dump_canonical(std::ostream& out) const {
  out << "cell_value,table_id,column_id,row_id,super_key_hex,quadrant\n";
  for (std::uint32_t t = 0; t < tables_.size(); ++t) {
    const auto& store = tables_[t];
    for (std::uint32_t r = 0; r < store.rows.size(); ++r) {
      const std::string sig_hex = store.row_signatures[r].to_hex();
      for (const auto& cell : store.rows[r]) {
        out << csv_escape(values_[cell.value_id]) << ',' << t << ','
            << cell.column_id << ',' << r << ',' << sig_hex << ',';
        if (char q = quadrant_char(cell.quadrant)) out << q;
        out << '\n';
      }
    }
  }
}

std::string IndexHandle::dump_canonical() const {
  std::ostringstream out;
  dump_canonical(out);
  return out.str();
}

void IndexHandle::save(const fs::path& dir) const {
  fs::create_directories(dir);
  const fs::path lock = dir / kLockFile;
  if (fs::exists(lock))
    throw IndexError("index directory is locked: " + lock.string());
  std::ofstream(lock).put('\n');

  auto cleanup = [&dir, &lock] {
    std::error_code ec;
    fs::remove(dir / kCatalogFile, ec);
    fs::remove(dir / kDataFile, ec);
    fs::remove(lock, ec);
  };

  try {
    json catalog;
    catalog["format_version"] = kIndexFormatVersion;
    catalog["normalization"] = std::string(to_string(policy_));
    json sig;
    sig["bits"] = kSignatureBits;
    sig["hashes"] = kSignatureHashes;
    json seeds = json::array();
    for (std::uint64_t seed : kSignatureSeeds) seeds.push_back(seed_hex(seed));
    sig["seeds"] = seeds;
    catalog["signature"] = sig;
    json tables = json::array();
    for (const auto& entry : catalog_) {
      json t;
      t["id"] = entry.table_id;
      t["path"] = entry.path;
      t["columns"] = entry.column_names;
      t["row_count"] = entry.row_count;
      json stats = json::array();
      for (const auto& s : entry.column_stats) stats.push_back(stats_to_json(s));
      t["column_stats"] = stats;
      tables.push_back(std::move(t));
    }
    catalog["tables"] = tables;

    std::ofstream catalog_out(dir / kCatalogFile,
                              std::ios::binary | std::ios::trunc);
    if (!catalog_out)
      throw IndexError("cannot write " + (dir / kCatalogFile).string());
    catalog_out << catalog.dump(2) << '\n';
    if (!catalog_out.flush())
      throw IndexError("failed writing " + (dir / kCatalogFile).string());

    BinaryWriter data(dir / kDataFile);
    data.put<std::uint32_t>(kDataMagic);
    data.put<std::uint32_t>(kIndexFormatVersion);
    data.put<std::uint64_t>(values_.size());
    for (const auto& value : values_) data.put_string(value);
    data.put<std::uint32_t>(static_cast<std::uint32_t>(tables_.size()));
    for (const auto& store : tables_) {
      data.put<std::uint64_t>(store.rows.size());
      for (const auto& row : store.rows) {
        data.put<std::uint32_t>(static_cast<std::uint32_t>(row.size()));
        for (const auto& cell : row) {
          data.put<std::uint16_t>(cell.column_id);
          data.put<std::uint8_t>(static_cast<std::uint8_t>(cell.quadrant));
          data.put<std::uint32_t>(cell.value_id);
        }
      }
      for (const auto& sig : store.row_signatures) {
        data.put<std::uint64_t>(sig.hi);
        data.put<std::uint64_t>(sig.lo);
      }
    }
    data.put<std::uint64_t>(cell_count_);
    if (!data.out.flush())
      throw IndexError("failed writing " + (dir / kDataFile).string());
  } catch (...) {
    cleanup();
    throw;
  }
  fs::remove(lock);
}

IndexHandle IndexHandle::load(const fs::path& dir) {
  if (fs::exists(dir / kLockFile))
    throw IndexError("index directory is locked (incomplete build?): " +
                     dir.string());
  std::ifstream catalog_in(dir / kCatalogFile, std::ios::binary);
  if (!catalog_in)
    throw IndexError("cannot open " + (dir / kCatalogFile).string());
  json catalog = json::parse(catalog_in);

  if (catalog.at("format_version").get<std::uint32_t>() != kIndexFormatVersion)
    throw IndexError("unsupported index format version");
  const auto& sig = catalog.at("signature");
  bool seeds_ok = sig.at("bits").get<int>() == kSignatureBits &&
                  sig.at("hashes").get<int>() == kSignatureHashes;
  if (seeds_ok) {
    const auto& seeds = sig.at("seeds");
    seeds_ok = seeds.size() == kSignatureHashes;
    for (std::size_t i = 0; seeds_ok && i < seeds.size(); ++i)
      seeds_ok = seeds[i].get<std::string>() == seed_hex(kSignatureSeeds[i]);
  }
  if (!seeds_ok) throw IndexError("unsupported signature parameters");

  IndexHandle index;
  auto policy = normalize_policy_from_string(
      catalog.at("normalization").get<std::string>());
  if (!policy) throw IndexError("unknown normalization policy in catalog");
  index.policy_ = *policy;

  for (const auto& t : catalog.at("tables")) {
    TableCatalogEntry entry;
    entry.table_id = t.at("id").get<std::uint32_t>();
    entry.path = t.at("path").get<std::string>();
    entry.column_names = t.at("columns").get<std::vector<std::string>>();
    entry.row_count = t.at("row_count").get<std::uint64_t>();
    for (const auto& s : t.at("column_stats"))
      entry.column_stats.push_back(stats_from_json(s));
    index.catalog_.push_back(std::move(entry));
  }

  BinaryReader data(dir / kDataFile);
  if (data.get<std::uint32_t>() != kDataMagic)
    throw IndexError("bad index data file magic");
  if (data.get<std::uint32_t>() != kIndexFormatVersion)
    throw IndexError("unsupported index data version");

  const auto value_count = data.get<std::uint64_t>();
  index.values_.reserve(value_count);
  index.postings_.resize(value_count);
  for (std::uint64_t i = 0; i < value_count; ++i) {
    std::string value = data.get_string();
    index.value_ids_.emplace(value, static_cast<std::uint32_t>(i));
    index.values_.push_back(std::move(value));
  }

  const auto table_count = data.get<std::uint32_t>();
  if (table_count != index.catalog_.size())
    throw IndexError("catalog/data table count mismatch");
  index.tables_.resize(table_count);
  for (std::uint32_t t = 0; t < table_count; ++t) {
    auto& store = index.tables_[t];
    const auto row_count = data.get<std::uint64_t>();
    store.rows.resize(row_count);
    for (auto& row : store.rows) {
      const auto cell_count = data.get<std::uint32_t>();
      row.reserve(cell_count);
      for (std::uint32_t c = 0; c < cell_count; ++c) {
        StoredCell cell;
        cell.column_id = data.get<std::uint16_t>();
        cell.quadrant = static_cast<Quadrant>(data.get<std::uint8_t>());
        cell.value_id = data.get<std::uint32_t>();
        if (cell.value_id >= index.values_.size())
          throw IndexError("corrupt index: value id out of range");
        row.push_back(cell);
      }
      index.cell_count_ += cell_count;
      if (cell_count > 0) ++index.signature_count_;
    }
    store.row_signatures.resize(row_count);
    for (auto& sig : store.row_signatures) {
      sig.hi = data.get<std::uint64_t>();
      sig.lo = data.get<std::uint64_t>();
    }
  }
  if (data.get<std::uint64_t>() != index.cell_count_)
    throw IndexError("corrupt index: cell count mismatch");

  index.rebuild_postings();
  return index;
}

void IndexHandle::rebuild_postings() {
  for (auto& list : postings_) list.clear();
  for (std::uint32_t t = 0; t < tables_.size(); ++t) {
    const auto& store = tables_[t];
    for (std::uint32_t r = 0; r < store.rows.size(); ++r)
      for (const auto& cell : store.rows[r])
        postings_[cell.value_id].push_back(
            Posting{t, r, cell.column_id, cell.quadrant});
  }
}

}  // namespace blend
