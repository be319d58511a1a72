#include "blend/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "blend/csv.hpp"

namespace blend {

namespace fs = std::filesystem;

std::string_view to_string(NormalizePolicy policy) {
  return policy == NormalizePolicy::Exact ? "exact" : "lower";
}

std::optional<NormalizePolicy> normalize_policy_from_string(std::string_view s) {
  if (s == "exact") return NormalizePolicy::Exact;
  if (s == "lower") return NormalizePolicy::Lower;
  return std::nullopt;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::string_view trim(std::string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && is_space(s[begin])) ++begin;
  while (end > begin && is_space(s[end - 1])) --end;
  return s.substr(begin, end - begin);
}

// sign? (digits ('.' digits?)? | '.' digits) ([eE] sign? digits)?
bool matches_decimal_grammar(std::string_view s) {
  std::size_t i = 0;
  auto digits = [&] {
    std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    return i > start;
  };
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  bool int_part = digits();
  bool frac_part = false;
  if (i < s.size() && s[i] == '.') {
    ++i;
    frac_part = digits();
    if (!int_part && !frac_part) return false;  // lone "." or "+."
  } else if (!int_part) {
    return false;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    if (!digits()) return false;
  }
  return i == s.size();
}

std::optional<double> parse_decimal(std::string_view s) {
  if (!matches_decimal_grammar(s)) return std::nullopt;
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return negative ? -value : value;
}

}  // namespace

std::optional<NormalizedValue> normalize_value(std::string_view raw,
                                               NormalizePolicy policy) {
  std::string_view trimmed = trim(raw);
  if (trimmed.empty()) return std::nullopt;
  NormalizedValue out;
  out.text.assign(trimmed);
  if (policy == NormalizePolicy::Lower) {
    std::transform(out.text.begin(), out.text.end(), out.text.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  }
  out.numeric = parse_decimal(trimmed);
  return out;
}

std::string normalize_text(std::string_view raw, NormalizePolicy policy) {
  auto v = normalize_value(raw, policy);
  return v ? std::move(v->text) : std::string();
}

ColumnStats compute_column_stats(std::span<const MaybeCell> values,
                                 std::uint32_t column_id) {
  ColumnStats stats;
  stats.column_id = column_id;
  double sum = 0.0;
  for (const auto& cell : values) {
    if (!cell) continue;
    ++stats.non_empty_count;
    if (cell->numeric) {
      ++stats.numeric_count;
      sum += *cell->numeric;
    }
  }
  stats.is_numeric = stats.non_empty_count > 0 &&
                     2 * stats.numeric_count >= stats.non_empty_count;
  if (stats.is_numeric && stats.numeric_count > 0)
    stats.mean = sum / static_cast<double>(stats.numeric_count);
  return stats;
}

ParsedTable parse_table(std::string name, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& raw_rows,
                        NormalizePolicy policy) {
  ParsedTable table;
  table.entry.path = std::move(name);
  table.entry.column_names = header;
  table.entry.row_count = raw_rows.size();

  const std::size_t width = header.size();
  table.rows.reserve(raw_rows.size());
  for (const auto& raw : raw_rows) {
    std::vector<MaybeCell> row(width);
    const std::size_t n = std::min(width, raw.size());
    for (std::size_t c = 0; c < n; ++c)
      row[c] = normalize_value(raw[c], policy);
    table.rows.push_back(std::move(row));
  }

  table.entry.column_stats.reserve(width);
  std::vector<MaybeCell> column(raw_rows.size());
  for (std::size_t c = 0; c < width; ++c) {
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      column[r] = table.rows[r][c];
    table.entry.column_stats.push_back(
        compute_column_stats(column, static_cast<std::uint32_t>(c)));
  }
  return table;
}

ScanReport scan_lake(const fs::path& lake_dir, NormalizePolicy policy,
                     const std::function<void(ParsedTable&&)>& sink) {
  std::error_code ec;
  if (!fs::is_directory(lake_dir, ec))
    throw IngestError("lake directory not readable: " + lake_dir.string());

  std::vector<std::string> rel_paths;
  for (auto it = fs::recursive_directory_iterator(lake_dir, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw IngestError("error walking " + lake_dir.string() + ": " +
                              ec.message());
    if (!it->is_regular_file()) continue;
    if (it->path().extension() != ".csv") continue;
    rel_paths.push_back(
        fs::relative(it->path(), lake_dir).generic_string());
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  ScanReport report;
  std::uint32_t next_id = 0;
  for (const auto& rel : rel_paths) {
    CsvTable csv;
    try {
      csv = read_csv_file(lake_dir / rel);
    } catch (const CsvError& e) {
      report.warnings.push_back("skipping " + rel + ": " + e.what());
      continue;
    }
    ParsedTable table = parse_table(rel, csv.header, csv.rows, policy);
    table.entry.table_id = next_id++;
    report.catalog.push_back(table.entry);
    sink(std::move(table));
  }
  return report;
}

LakeData scan_lake(const fs::path& lake_dir, NormalizePolicy policy) {
  LakeData data;
  data.policy = policy;
  data.report = scan_lake(lake_dir, policy, [&data](ParsedTable&& table) {
    data.tables.push_back(std::move(table));
  });
  return data;
}

}  // namespace blend
