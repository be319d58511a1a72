#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blend/ingest.hpp"
#include "blend/ranking.hpp"
#include "blend/restriction.hpp"

// Brute-force reference implementations and synthetic-lake generators.
// The oracles work straight off the in-memory tables; they never touch the
// index or the seekers, and share only the ranking order and the value
// normalization rules with the engine.

namespace blend::testkit {

// splitmix64; deliberately not <random> so lakes are identical on every
// platform for a given seed.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  std::uint32_t uniform(std::uint32_t bound);  // [0, bound)
  double unit();                               // [0, 1)
  bool chance(double p) { return unit() < p; }
};

struct ToyTable {
  std::string name;  // file name, e.g. "t0042.csv"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ToyLake {
  std::uint64_t seed = 0;
  std::vector<ToyTable> tables;  // position == table id (names sort the same)
};

struct GenProfile {
  std::uint32_t tables = 20;
  std::uint32_t min_cols = 2, max_cols = 8;
  std::uint32_t min_rows = 5, max_rows = 60;
  std::uint32_t string_pool = 300;  // distinct text tokens shared lake-wide
  double numeric_col_fraction = 0.35;
  double empty_cell_fraction = 0.05;

  // Planted ground truth, all off by default.
  std::uint32_t plant_join_tables = 0;   // tables carrying the query tuples
  std::uint32_t plant_join_arity = 2;
  std::uint32_t plant_join_tuples = 4;
  std::uint32_t plant_misaligned_rows = 0;  // cross-tuple rows per table
  std::uint32_t plant_union_group = 0;      // unionable tables incl. the query
  std::uint32_t plant_corr_tables = 0;      // tables with a correlated column
  double corr_noise = 0.0;                  // 0 = perfectly monotone
};

struct PlantedJoin {
  std::vector<std::vector<std::string>> query_columns;
  std::vector<std::uint32_t> tables;   // tables containing aligned tuples
  std::uint32_t tuple_count = 0;       // distinct planted tuples
};

struct PlantedUnion {
  std::uint32_t query_table = 0;
  std::vector<std::uint32_t> group;  // includes query_table
};

struct PlantedCorr {
  std::vector<std::string> key;
  std::vector<std::string> target;
  struct Candidate {
    std::uint32_t table;
    std::uint32_t key_col;
    std::uint32_t num_col;
    // joined (target, candidate) pairs in key order, for direct checks
    std::vector<double> target_values;
    std::vector<double> column_values;
  };
  std::vector<Candidate> candidates;
};

struct GeneratedLake {
  ToyLake lake;
  std::optional<PlantedJoin> join;
  std::optional<PlantedUnion> union_group;
  std::optional<PlantedCorr> corr;
};

GeneratedLake gen_lake(std::uint64_t seed, const GenProfile& profile = {});

void write_lake_csvs(const ToyLake& lake, const std::filesystem::path& dir);

// Parses a ToyLake through the ingest pipeline without touching disk.
LakeData lake_to_data(const ToyLake& lake, NormalizePolicy policy);

// ---- oracles -------------------------------------------------------------

RankedTables oracle_sc(const ToyLake& lake, const std::vector<std::string>& query,
                       std::uint32_t k,
                       NormalizePolicy policy = NormalizePolicy::Lower,
                       const TableRestriction& restriction = {});

RankedTables oracle_keyword(const ToyLake& lake,
                            const std::vector<std::string>& query, std::uint32_t k,
                            NormalizePolicy policy = NormalizePolicy::Lower,
                            const TableRestriction& restriction = {});

RankedTables oracle_mc(const ToyLake& lake,
                       const std::vector<std::vector<std::string>>& query_columns,
                       std::uint32_t k,
                       NormalizePolicy policy = NormalizePolicy::Lower,
                       const TableRestriction& restriction = {});

RankedTables oracle_corr(const ToyLake& lake, const std::vector<std::string>& key,
                         const std::vector<std::string>& target,
                         std::optional<std::uint32_t> sample_size, std::uint32_t m,
                         std::uint32_t k,
                         NormalizePolicy policy = NormalizePolicy::Lower,
                         const TableRestriction& restriction = {});

// Row-level joinability: does some query tuple fit the row under an
// injective column assignment? Used by the MC filter diagnostics.
bool row_joinable(const ToyTable& table, std::size_t row,
                  const std::vector<std::vector<std::string>>& query_tuples,
                  NormalizePolicy policy);

double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace blend::testkit
