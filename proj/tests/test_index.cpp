#include "doctest.h"

#include <map>
#include <set>
#include <sstream>

#include "blend/index.hpp"
#include "blend/testkit.hpp"
#include "test_util.hpp"

using namespace blend;

namespace {

// In-memory lake assembly for index tests.
LakeData make_lake(
    std::vector<std::tuple<std::string, std::vector<std::string>,
                           std::vector<std::vector<std::string>>>>
        tables,
    NormalizePolicy policy = NormalizePolicy::Lower) {
  LakeData lake;
  lake.policy = policy;
  std::sort(tables.begin(), tables.end(),
            [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  for (std::size_t i = 0; i < tables.size(); ++i) {
    auto& [name, header, rows] = tables[i];
    ParsedTable parsed = parse_table(name, header, rows, policy);
    parsed.entry.table_id = static_cast<std::uint32_t>(i);
    lake.report.catalog.push_back(parsed.entry);
    lake.tables.push_back(std::move(parsed));
  }
  return lake;
}

}  // namespace

TEST_CASE("build: one row of two cells yields two records and one signature") {
  auto index = IndexHandle::build(
      make_lake({{"t.csv", {"c0", "c1"}, {{"a", "b"}}}}));
  CHECK(index.cell_count() == 2);
  CHECK(index.signature_count() == 1);
  CHECK(index.row_signature(0, 0) ==
        (cell_signature("a") | cell_signature("b")));
}

TEST_CASE("build: quadrants follow the >= mean rule") {
  auto index = IndexHandle::build(
      make_lake({{"t.csv", {"n"}, {{"1"}, {"2"}, {"3"}, {"4"}}}}));
  auto records = index.lookup_values(std::vector<std::string>{"1", "2", "3", "4"});
  REQUIRE(records.size() == 4);
  // mean 2.5: F, F, T, T
  CHECK(records[0].quadrant == Quadrant::F);
  CHECK(records[1].quadrant == Quadrant::F);
  CHECK(records[2].quadrant == Quadrant::T);
  CHECK(records[3].quadrant == Quadrant::T);
}

TEST_CASE("build: mean boundary value lands in T") {
  auto index = IndexHandle::build(
      make_lake({{"t.csv", {"n"}, {{"2"}, {"2"}}}}));
  for (const auto& r : index.lookup_values(std::vector<std::string>{"2"}))
    CHECK(r.quadrant == Quadrant::T);
}

TEST_CASE("build: non-numeric columns carry no quadrant") {
  auto index = IndexHandle::build(
      make_lake({{"t.csv", {"s"}, {{"x"}, {"y"}, {"7"}}}}));
  auto records = index.lookup_values(std::vector<std::string>{"7"});
  REQUIRE(records.size() == 1);
  CHECK(records[0].quadrant == Quadrant::None);  // 1 of 3 numeric: text column
}

TEST_CASE("build: a table of only empty cells indexes nothing") {
  auto index = IndexHandle::build(
      make_lake({{"t.csv", {"a", "b"}, {{" ", ""}, {"", "  "}}}}));
  CHECK(index.cell_count() == 0);
  CHECK(index.signature_count() == 0);
  CHECK(index.dump_canonical() ==
        "cell_value,table_id,column_id,row_id,super_key_hex,quadrant\n");
}

TEST_CASE("lookup_values") {
  auto index = IndexHandle::build(make_lake({
      {"a.csv", {"c0"}, {{"x"}, {"y"}}},
      {"b.csv", {"c0", "c1"}, {{"z", "x"}}},
  }));

  SUBCASE("empty input yields an empty iterator") {
    CHECK(index.lookup_values(std::vector<std::string>{}).empty());
  }
  SUBCASE("a value present in two tables yields records from both") {
    auto records = index.lookup_values(std::vector<std::string>{"x"});
    REQUIRE(records.size() == 2);
    CHECK(records[0].table_id == 0);
    CHECK(records[1].table_id == 1);
    CHECK(records[1].column_id == 1);
  }
  SUBCASE("an absent value contributes nothing") {
    CHECK(index.lookup_values(std::vector<std::string>{"nope"}).empty());
  }
  SUBCASE("records come out ordered by (table, row, column)") {
    auto records = index.lookup_values(std::vector<std::string>{"x", "y", "z"});
    REQUIRE(records.size() == 4);
    for (std::size_t i = 1; i < records.size(); ++i) {
      auto key = [](const CellRecord& r) {
        return std::tuple(r.table_id, r.row_id, r.column_id);
      };
      CHECK(key(records[i - 1]) < key(records[i]));
    }
  }
  SUBCASE("duplicate query values do not duplicate postings") {
    CHECK(index.lookup_values(std::vector<std::string>{"x", "x"}).size() == 2);
  }
}

TEST_CASE("fetch_rows") {
  auto index = IndexHandle::build(
      make_lake({{"t.csv", {"c0", "c1"}, {{"a", "b"}, {"c", ""}}}}));

  SUBCASE("empty request yields nothing") {
    CHECK(index.fetch_rows(0, std::vector<std::uint32_t>{}).empty());
  }
  SUBCASE("cells come back keyed by column") {
    auto rows = index.fetch_rows(0, std::vector<std::uint32_t>{0});
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].cells.size() == 2);
    CHECK(rows[0].cells[0] == std::pair<std::uint32_t, std::string>{0, "a"});
    CHECK(rows[0].cells[1] == std::pair<std::uint32_t, std::string>{1, "b"});
  }
  SUBCASE("the returned signature equals the built one") {
    auto rows = index.fetch_rows(0, std::vector<std::uint32_t>{0, 1});
    CHECK(rows[0].signature == (cell_signature("a") | cell_signature("b")));
    CHECK(rows[1].signature == cell_signature("c"));
  }
  SUBCASE("unknown table id errors") {
    CHECK_THROWS_WITH_AS(index.fetch_rows(7, std::vector<std::uint32_t>{0}),
                         "no such table: 7", IndexError);
  }
}

TEST_CASE("dump_canonical shape and determinism") {
  auto lake = make_lake({
      {"a.csv", {"c0", "c1"}, {{"a", "1"}, {"b,x", "2"}}},
      {"b.csv", {"k"}, {{"a"}}},
  });
  auto index = IndexHandle::build(lake);
  const std::string dump = index.dump_canonical();

  CHECK(dump.starts_with(
      "cell_value,table_id,column_id,row_id,super_key_hex,quadrant\n"));
  // embedded comma is quoted
  CHECK(dump.find("\"b,x\"") != std::string::npos);

  // byte-identical across two independent builds
  CHECK(IndexHandle::build(lake).dump_canonical() == dump);

  // all lines of one (table,row) share the super key
  std::istringstream in(dump);
  std::string line;
  std::getline(in, line);  // header
  std::map<std::pair<std::string, std::string>, std::set<std::string>> keys;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    // the test data has no quoted commas beyond field 0; split from the right
    for (std::size_t i = line.size(), cut = 0; i-- > 0 && cut < 5;) {
      if (line[i] == ',') {
        fields.insert(fields.begin(), line.substr(i + 1));
        line.resize(i);
        ++cut;
      }
    }
    REQUIRE(fields.size() == 5);
    keys[{fields[0], fields[2]}].insert(fields[3]);
  }
  for (const auto& [row, sigs] : keys) CHECK(sigs.size() == 1);
}

TEST_CASE("completeness: every non-empty cell yields exactly one record") {
  auto generated = testkit::gen_lake(11, testkit::GenProfile{.tables = 6});
  auto lake = testkit::lake_to_data(generated.lake, NormalizePolicy::Lower);
  auto index = IndexHandle::build(lake);

  // independent recount straight off the raw tables
  std::uint64_t expected = 0;
  for (const auto& table : generated.lake.tables)
    for (const auto& row : table.rows)
      for (const auto& cell : row)
        if (!normalize_text(cell, NormalizePolicy::Lower).empty()) ++expected;
  CHECK(index.cell_count() == expected);
}

TEST_CASE("quadrant partition: count(T)+count(F) = numeric_count per column") {
  auto generated = testkit::gen_lake(13, testkit::GenProfile{.tables = 8});
  auto lake = testkit::lake_to_data(generated.lake, NormalizePolicy::Lower);
  auto index = IndexHandle::build(lake);

  const std::string dump = index.dump_canonical();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> tf_counts;
  std::istringstream in(dump);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto quadrant = line.substr(line.rfind(',') + 1);
    if (quadrant.empty()) continue;
    std::istringstream fields(line);
    std::string value, t, c;
    std::getline(fields, value, ',');
    std::getline(fields, t, ',');
    std::getline(fields, c, ',');
    tf_counts[{std::stoul(t), std::stoul(c)}] += 1;
  }
  for (const auto& entry : index.catalog())
    for (const auto& stats : entry.column_stats)
      if (stats.is_numeric)
        CHECK(tf_counts[{entry.table_id, stats.column_id}] ==
              stats.numeric_count);
}

TEST_CASE("persistence round-trips byte-identically") {
  auto generated = testkit::gen_lake(17, testkit::GenProfile{.tables = 5});
  auto lake = testkit::lake_to_data(generated.lake, NormalizePolicy::Lower);
  auto index = IndexHandle::build(lake);

  TempDir dir("index_rt");
  const auto index_dir = dir.path / "idx";
  index.save(index_dir);
  auto loaded = IndexHandle::load(index_dir);

  CHECK(loaded.dump_canonical() == index.dump_canonical());
  CHECK(loaded.cell_count() == index.cell_count());
  CHECK(loaded.signature_count() == index.signature_count());
  CHECK(loaded.policy() == index.policy());
  CHECK(loaded.catalog().size() == index.catalog().size());

  SUBCASE("a leftover lock file blocks save and load") {
    write_file(index_dir / ".build.lock", "");
    CHECK_THROWS_AS(index.save(index_dir), IndexError);
    CHECK_THROWS_AS(IndexHandle::load(index_dir), IndexError);
  }
}

TEST_CASE("load rejects missing or foreign directories") {
  TempDir dir("index_missing");
  CHECK_THROWS_AS(IndexHandle::load(dir.path / "nope"), IndexError);
}

TEST_CASE("signature soundness: value-subset rows are never rejected") {
  // if q's values are a subset of c's values, subsumes(sig(q), sig(c)) holds
  testkit::Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t n = 1 + rng.uniform(6);
    Signature subset_sig, superset_sig;
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::string value = "v" + std::to_string(rng.uniform(1000));
      const Signature sig = cell_signature(value);
      superset_sig |= sig;
      if (rng.chance(0.6)) subset_sig |= sig;
    }
    CHECK(subsumes(subset_sig, superset_sig));
  }
}
