#include "blend/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "blend/csv.hpp"

namespace blend::testkit {

std::uint64_t Rng::next() {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint32_t Rng::uniform(std::uint32_t bound) {
  return bound == 0 ? 0 : static_cast<std::uint32_t>(next() % bound);
}

double Rng::unit() {
  return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
}

namespace {

std::string table_name(std::uint32_t id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%05u.csv", id);
  return buf;
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

std::vector<std::string> make_header(std::uint32_t cols) {
  std::vector<std::string> header;
  header.reserve(cols);
  for (std::uint32_t c = 0; c < cols; ++c)
    header.push_back("c" + std::to_string(c));
  return header;
}

ToyTable background_table(Rng& rng, const GenProfile& profile,
                          std::uint32_t id) {
  ToyTable table;
  table.name = table_name(id);
  const std::uint32_t cols =
      profile.min_cols + rng.uniform(profile.max_cols - profile.min_cols + 1);
  const std::uint32_t rows =
      profile.min_rows + rng.uniform(profile.max_rows - profile.min_rows + 1);
  table.header = make_header(cols);

  std::vector<bool> numeric(cols);
  for (std::uint32_t c = 0; c < cols; ++c)
    numeric[c] = rng.chance(profile.numeric_col_fraction);

  table.rows.resize(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    auto& row = table.rows[r];
    row.resize(cols);
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (rng.chance(profile.empty_cell_fraction)) continue;
      if (numeric[c]) {
        row[c] = std::to_string(rng.uniform(1000));
      } else {
        row[c] = "v" + std::to_string(rng.uniform(profile.string_pool));
      }
    }
  }
  return table;
}

void plant_join(Rng& rng, const GenProfile& profile, ToyLake& lake,
                PlantedJoin& truth) {
  const std::uint32_t arity = profile.plant_join_arity;
  const std::uint32_t tuples = profile.plant_join_tuples;

  truth.query_columns.assign(arity, {});
  std::vector<std::vector<std::string>> tuple_values(tuples);
  for (std::uint32_t j = 0; j < tuples; ++j) {
    for (std::uint32_t c = 0; c < arity; ++c) {
      std::string v = "jk" + std::to_string(c) + "_" + std::to_string(j);
      truth.query_columns[c].push_back(v);
      tuple_values[j].push_back(std::move(v));
    }
  }
  truth.tuple_count = tuples;

  for (std::uint32_t p = 0; p < profile.plant_join_tables; ++p) {
    ToyTable table;
    const auto id = static_cast<std::uint32_t>(lake.tables.size());
    table.name = table_name(id);
    const std::uint32_t cols = std::max(profile.min_cols, arity + 1 +
                                        rng.uniform(2));
    table.header = make_header(cols);

    // One consistent (possibly permuted) column placement per table.
    std::vector<std::uint32_t> placement(cols);
    for (std::uint32_t c = 0; c < cols; ++c) placement[c] = c;
    for (std::uint32_t c = cols - 1; c > 0; --c)
      std::swap(placement[c], placement[rng.uniform(c + 1)]);
    placement.resize(arity);

    for (std::uint32_t j = 0; j < tuples; ++j) {
      std::vector<std::string> row(cols);
      for (std::uint32_t c = 0; c < cols; ++c)
        row[c] = "fill" + std::to_string(rng.uniform(profile.string_pool));
      for (std::uint32_t c = 0; c < arity; ++c)
        row[placement[c]] = tuple_values[j][c];
      table.rows.push_back(std::move(row));
    }

    // Misaligned rows: components drawn from different tuples. These join on
    // every query column but no single tuple fits them.
    for (std::uint32_t x = 0; x < profile.plant_misaligned_rows && tuples >= 2;
         ++x) {
      std::vector<std::string> row(cols);
      for (std::uint32_t c = 0; c < cols; ++c)
        row[c] = "fill" + std::to_string(rng.uniform(profile.string_pool));
      const std::uint32_t first = rng.uniform(tuples);
      std::uint32_t second = rng.uniform(tuples - 1);
      if (second >= first) ++second;
      for (std::uint32_t c = 0; c < arity; ++c)
        row[placement[c]] = tuple_values[c == 0 ? first : second][c];
      table.rows.push_back(std::move(row));
    }
    truth.tables.push_back(id);
    lake.tables.push_back(std::move(table));
  }
}

void plant_union(Rng& rng, const GenProfile& profile, ToyLake& lake,
                 PlantedUnion& truth) {
  const std::uint32_t cols = std::max<std::uint32_t>(3, profile.min_cols + 1);
  const std::uint32_t pool_size = 24;
  std::vector<std::vector<std::string>> pools(cols);
  for (std::uint32_t c = 0; c < cols; ++c)
    for (std::uint32_t i = 0; i < pool_size; ++i)
      pools[c].push_back("ug" + std::to_string(c) + "_" + std::to_string(i));

  for (std::uint32_t g = 0; g < profile.plant_union_group; ++g) {
    ToyTable table;
    const auto id = static_cast<std::uint32_t>(lake.tables.size());
    table.name = table_name(id);
    table.header = make_header(cols);
    const std::uint32_t rows = 18 + rng.uniform(10);
    table.rows.resize(rows);
    for (auto& row : table.rows) {
      row.resize(cols);
      for (std::uint32_t c = 0; c < cols; ++c)
        row[c] = pools[c][rng.uniform(pool_size)];
    }
    truth.group.push_back(id);
    lake.tables.push_back(std::move(table));
  }
  if (!truth.group.empty()) truth.query_table = truth.group.front();
}

void plant_corr(Rng& rng, const GenProfile& profile, ToyLake& lake,
                PlantedCorr& truth) {
  const std::uint32_t n = 24;
  for (std::uint32_t j = 0; j < n; ++j) {
    truth.key.push_back("ck" + std::to_string(j));
    truth.target.push_back(std::to_string(10 + rng.uniform(990)));
  }

  for (std::uint32_t p = 0; p < profile.plant_corr_tables; ++p) {
    ToyTable table;
    const auto id = static_cast<std::uint32_t>(lake.tables.size());
    table.name = table_name(id);
    const std::uint32_t cols = 3;
    table.header = make_header(cols);
    const std::uint32_t key_col = rng.uniform(cols);
    std::uint32_t num_col = rng.uniform(cols - 1);
    if (num_col >= key_col) ++num_col;
    const double direction = rng.chance(0.5) ? 1.0 : -1.0;

    PlantedCorr::Candidate candidate;
    candidate.table = id;
    candidate.key_col = key_col;
    candidate.num_col = num_col;

    std::vector<std::uint32_t> order(n);
    for (std::uint32_t j = 0; j < n; ++j) order[j] = j;
    for (std::uint32_t j = n - 1; j > 0; --j)
      std::swap(order[j], order[rng.uniform(j + 1)]);

    for (std::uint32_t j = 0; j < n; ++j) {
      const std::uint32_t q = order[j];
      const double target_value = std::stod(truth.target[q]);
      const double noise =
          profile.corr_noise * 1000.0 * (rng.unit() - 0.5);
      const double column_value = direction * target_value + noise;
      std::vector<std::string> row(cols);
      for (std::uint32_t c = 0; c < cols; ++c)
        row[c] = "cf" + std::to_string(rng.uniform(profile.string_pool));
      row[key_col] = truth.key[q];
      row[num_col] = format_number(column_value);
      table.rows.push_back(std::move(row));
      candidate.target_values.push_back(target_value);
      candidate.column_values.push_back(column_value);
    }
    truth.candidates.push_back(std::move(candidate));
    lake.tables.push_back(std::move(table));
  }
}

}  // namespace

GeneratedLake gen_lake(std::uint64_t seed, const GenProfile& profile) {
  Rng rng(seed);
  GeneratedLake out;
  out.lake.seed = seed;
  for (std::uint32_t t = 0; t < profile.tables; ++t)
    out.lake.tables.push_back(background_table(rng, profile, t));

  if (profile.plant_join_tables > 0) {
    PlantedJoin truth;
    plant_join(rng, profile, out.lake, truth);
    out.join = std::move(truth);
  }
  if (profile.plant_union_group > 0) {
    PlantedUnion truth;
    plant_union(rng, profile, out.lake, truth);
    out.union_group = std::move(truth);
  }
  if (profile.plant_corr_tables > 0) {
    PlantedCorr truth;
    plant_corr(rng, profile, out.lake, truth);
    out.corr = std::move(truth);
  }
  return out;
}

void write_lake_csvs(const ToyLake& lake, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& table : lake.tables) {
    CsvTable csv;
    csv.header = table.header;
    csv.rows = table.rows;
    write_csv_file(dir / table.name, csv);
  }
}

LakeData lake_to_data(const ToyLake& lake, NormalizePolicy policy) {
  LakeData data;
  data.policy = policy;
  for (std::size_t t = 0; t < lake.tables.size(); ++t) {
    const auto& table = lake.tables[t];
    ParsedTable parsed =
        parse_table(table.name, table.header, table.rows, policy);
    parsed.entry.table_id = static_cast<std::uint32_t>(t);
    data.report.catalog.push_back(parsed.entry);
    data.tables.push_back(std::move(parsed));
  }
  return data;
}

namespace {

std::vector<std::string> normalize_query(const std::vector<std::string>& raw,
                                         NormalizePolicy policy) {
  std::vector<std::string> values;
  for (const auto& v : raw) {
    std::string text = normalize_text(v, policy);
    if (!text.empty()) values.push_back(std::move(text));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

// Normalized view of one table: per row (column -> text), per column the
// distinct value set.
struct ScannedTable {
  std::vector<std::unordered_map<std::uint32_t, std::string>> rows;
  std::vector<std::unordered_set<std::string>> column_values;
};

ScannedTable scan_table(const ToyTable& table, NormalizePolicy policy) {
  ScannedTable out;
  const std::size_t width = table.header.size();
  out.column_values.resize(width);
  out.rows.reserve(table.rows.size());
  for (const auto& raw : table.rows) {
    std::unordered_map<std::uint32_t, std::string> row;
    const std::size_t n = std::min(width, raw.size());
    for (std::size_t c = 0; c < n; ++c) {
      std::string text = normalize_text(raw[c], policy);
      if (text.empty()) continue;
      out.column_values[c].insert(text);
      row.emplace(static_cast<std::uint32_t>(c), std::move(text));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace

RankedTables oracle_sc(const ToyLake& lake, const std::vector<std::string>& query,
                       std::uint32_t k, NormalizePolicy policy,
                       const TableRestriction& restriction) {
  const auto values = normalize_query(query, policy);
  RankedTables entries;
  for (std::uint32_t t = 0; t < lake.tables.size(); ++t) {
    if (!restriction.allows(t)) continue;
    const ScannedTable scanned = scan_table(lake.tables[t], policy);
    for (std::uint32_t c = 0; c < scanned.column_values.size(); ++c) {
      std::uint32_t overlap = 0;
      for (const auto& v : values)
        if (scanned.column_values[c].contains(v)) ++overlap;
      if (overlap == 0) continue;
      RankedEntry entry;
      entry.table_id = t;
      entry.score = overlap;
      entry.detail.columns = {c};
      entries.push_back(std::move(entry));
    }
  }
  rank_truncate(entries, k);
  return entries;
}

RankedTables oracle_keyword(const ToyLake& lake,
                            const std::vector<std::string>& query,
                            std::uint32_t k, NormalizePolicy policy,
                            const TableRestriction& restriction) {
  const auto values = normalize_query(query, policy);
  RankedTables entries;
  for (std::uint32_t t = 0; t < lake.tables.size(); ++t) {
    if (!restriction.allows(t)) continue;
    const ScannedTable scanned = scan_table(lake.tables[t], policy);
    std::unordered_set<std::string> all;
    for (const auto& column : scanned.column_values)
      all.insert(column.begin(), column.end());
    std::uint32_t overlap = 0;
    for (const auto& v : values)
      if (all.contains(v)) ++overlap;
    if (overlap == 0) continue;
    RankedEntry entry;
    entry.table_id = t;
    entry.score = overlap;
    entries.push_back(std::move(entry));
  }
  rank_truncate(entries, k);
  return entries;
}

namespace {

struct OracleMcQuery {
  std::vector<std::vector<std::string>> tuples;
  std::vector<std::set<std::string>> value_sets;
};

std::optional<OracleMcQuery> prepare_oracle_mc(
    const std::vector<std::vector<std::string>>& query_columns,
    NormalizePolicy policy) {
  if (query_columns.size() < 2) return std::nullopt;
  const std::size_t arity = query_columns.size();
  const std::size_t length = query_columns[0].size();
  for (const auto& column : query_columns)
    if (column.size() != length) return std::nullopt;

  std::set<std::vector<std::string>> tuple_set;
  for (std::size_t r = 0; r < length; ++r) {
    std::vector<std::string> tuple(arity);
    bool complete = true;
    for (std::size_t c = 0; c < arity && complete; ++c) {
      tuple[c] = normalize_text(query_columns[c][r], policy);
      complete = !tuple[c].empty();
    }
    if (complete) tuple_set.insert(std::move(tuple));
  }
  if (tuple_set.empty()) return std::nullopt;

  OracleMcQuery query;
  query.tuples.assign(tuple_set.begin(), tuple_set.end());
  query.value_sets.resize(arity);
  for (const auto& tuple : query.tuples)
    for (std::size_t c = 0; c < arity; ++c)
      query.value_sets[c].insert(tuple[c]);
  return query;
}

}  // namespace

RankedTables oracle_mc(const ToyLake& lake,
                       const std::vector<std::vector<std::string>>& query_columns,
                       std::uint32_t k, NormalizePolicy policy,
                       const TableRestriction& restriction) {
  const auto query = prepare_oracle_mc(query_columns, policy);
  if (!query) return {};
  const std::size_t arity = query->value_sets.size();

  RankedTables entries;
  for (std::uint32_t t = 0; t < lake.tables.size(); ++t) {
    if (!restriction.allows(t)) continue;
    const ScannedTable scanned = scan_table(lake.tables[t], policy);

    std::vector<std::set<std::uint32_t>> candidate_cols(arity);
    for (std::uint32_t c = 0; c < scanned.column_values.size(); ++c)
      for (std::size_t qc = 0; qc < arity; ++qc)
        for (const auto& v : query->value_sets[qc])
          if (scanned.column_values[c].contains(v)) {
            candidate_cols[qc].insert(c);
            break;
          }

    std::uint32_t best_score = 0;
    std::vector<std::uint32_t> best_mapping;
    std::vector<std::uint32_t> assignment(arity);
    std::set<std::uint32_t> used;
    std::function<void(std::size_t)> enumerate = [&](std::size_t qc) {
      if (qc == arity) {
        std::uint32_t count = 0;
        for (const auto& tuple : query->tuples) {
          for (const auto& row : scanned.rows) {
            bool match = true;
            for (std::size_t i = 0; i < arity && match; ++i) {
              auto it = row.find(assignment[i]);
              match = it != row.end() && it->second == tuple[i];
            }
            if (match) {
              ++count;
              break;
            }
          }
        }
        if (count > best_score) {
          best_score = count;
          best_mapping.assign(assignment.begin(), assignment.end());
        }
        return;
      }
      for (std::uint32_t col : candidate_cols[qc]) {
        if (used.contains(col)) continue;
        used.insert(col);
        assignment[qc] = col;
        enumerate(qc + 1);
        used.erase(col);
      }
    };
    enumerate(0);

    if (best_score > 0) {
      RankedEntry entry;
      entry.table_id = t;
      entry.score = best_score;
      entry.detail.columns = best_mapping;
      entries.push_back(std::move(entry));
    }
  }
  rank_truncate(entries, k);
  return entries;
}

RankedTables oracle_corr(const ToyLake& lake, const std::vector<std::string>& key,
                         const std::vector<std::string>& target,
                         std::optional<std::uint32_t> sample_size,
                         std::uint32_t m, std::uint32_t k,
                         NormalizePolicy policy,
                         const TableRestriction& restriction) {
  if (key.size() != target.size()) return {};

  std::vector<std::optional<double>> target_values(target.size());
  double sum = 0.0;
  std::uint64_t parseable = 0;
  for (std::size_t r = 0; r < target.size(); ++r) {
    auto cell = normalize_value(target[r], policy);
    if (cell && cell->numeric) {
      target_values[r] = cell->numeric;
      sum += *cell->numeric;
      ++parseable;
    }
  }
  if (parseable < 2) return {};
  const double mean = sum / static_cast<double>(parseable);

  enum : std::uint8_t { kAbove = 1, kBelow = 2 };
  std::unordered_map<std::string, std::uint8_t> token_class;
  for (std::size_t r = 0; r < key.size(); ++r) {
    if (!target_values[r]) continue;
    std::string token = normalize_text(key[r], policy);
    if (token.empty()) continue;
    token_class[token] |= *target_values[r] >= mean ? kAbove : kBelow;
  }

  RankedTables entries;
  for (std::uint32_t t = 0; t < lake.tables.size(); ++t) {
    if (!restriction.allows(t)) continue;
    const ToyTable& table = lake.tables[t];
    const std::size_t width = table.header.size();

    // Independent recomputation of the per-column quadrant inputs.
    std::vector<std::vector<MaybeCell>> cells(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      cells[r].resize(width);
      const std::size_t n = std::min(width, table.rows[r].size());
      for (std::size_t c = 0; c < n; ++c)
        cells[r][c] = normalize_value(table.rows[r][c], policy);
    }
    std::vector<ColumnStats> stats(width);
    std::vector<MaybeCell> column(table.rows.size());
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t r = 0; r < table.rows.size(); ++r)
        column[r] = cells[r][c];
      stats[c] = compute_column_stats(column, static_cast<std::uint32_t>(c));
    }

    struct Counts {
      std::uint64_t agree = 0;
      std::uint64_t disagree = 0;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, Counts> groups;

    const std::size_t row_limit =
        sample_size ? std::min<std::size_t>(*sample_size, table.rows.size())
                    : table.rows.size();
    for (std::size_t r = 0; r < row_limit; ++r) {
      for (std::size_t kc = 0; kc < width; ++kc) {
        if (!cells[r][kc]) continue;
        auto it = token_class.find(cells[r][kc]->text);
        if (it == token_class.end()) continue;
        const std::uint8_t classes = it->second;
        for (std::size_t nc = 0; nc < width; ++nc) {
          if (nc == kc) continue;
          const auto& cell = cells[r][nc];
          if (!cell || !cell->numeric || !stats[nc].is_numeric) continue;
          const bool above = *cell->numeric >= *stats[nc].mean;
          auto& counts = groups[{static_cast<std::uint32_t>(kc),
                                 static_cast<std::uint32_t>(nc)}];
          if (classes & kAbove) (above ? counts.agree : counts.disagree) += 1;
          if (classes & kBelow) (!above ? counts.agree : counts.disagree) += 1;
        }
      }
    }

    for (const auto& [cols, counts] : groups) {
      const std::uint64_t n = counts.agree + counts.disagree;
      if (n < m) continue;
      const double qcr = (static_cast<double>(counts.agree) -
                          static_cast<double>(counts.disagree)) /
                         static_cast<double>(n);
      RankedEntry entry;
      entry.table_id = t;
      entry.score = std::fabs(qcr);
      entry.detail.columns = {cols.first, cols.second};
      entry.detail.qcr = qcr;
      entries.push_back(std::move(entry));
    }
  }
  rank_truncate(entries, k);
  return entries;
}

bool row_joinable(const ToyTable& table, std::size_t row,
                  const std::vector<std::vector<std::string>>& query_tuples,
                  NormalizePolicy policy) {
  if (row >= table.rows.size()) return false;
  std::unordered_map<std::uint32_t, std::string> cells;
  const std::size_t width = table.header.size();
  const std::size_t n = std::min(width, table.rows[row].size());
  for (std::size_t c = 0; c < n; ++c) {
    std::string text = normalize_text(table.rows[row][c], policy);
    if (!text.empty()) cells.emplace(static_cast<std::uint32_t>(c), text);
  }

  for (const auto& raw_tuple : query_tuples) {
    std::vector<std::string> tuple;
    bool complete = true;
    for (const auto& v : raw_tuple) {
      tuple.push_back(normalize_text(v, policy));
      complete = complete && !tuple.back().empty();
    }
    if (!complete) continue;

    std::set<std::uint32_t> used;
    std::function<bool(std::size_t)> fit = [&](std::size_t i) -> bool {
      if (i == tuple.size()) return true;
      for (const auto& [col, text] : cells) {
        if (text != tuple[i] || used.contains(col)) continue;
        used.insert(col);
        if (fit(i + 1)) return true;
        used.erase(col);
      }
      return false;
    };
    if (fit(0)) return true;
  }
  return false;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = std::min(xs.size(), ys.size());
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace blend::testkit
