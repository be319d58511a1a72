// Acceptance gates. Each criterion prints exactly one [PASS]/[FAIL] line;
// the process exits non-zero if any gate fails. Criteria can be selected by
// number on the command line (default: all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blend/combiners.hpp"
#include "blend/executor.hpp"
#include "blend/index.hpp"
#include "blend/plan.hpp"
#include "blend/seekers.hpp"
#include "blend/testkit.hpp"
#include "test_util.hpp"

using namespace blend;
using namespace blend::testkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

IndexHandle index_of(const ToyLake& lake) {
  return IndexHandle::build(lake_to_data(lake, NormalizePolicy::Lower));
}

std::set<std::uint32_t> table_set(const RankedTables& entries) {
  std::set<std::uint32_t> out;
  for (const auto& e : entries) out.insert(e.table_id);
  return out;
}

// ---- query sampling --------------------------------------------------------

std::vector<std::string> sample_column(const ToyLake& lake, Rng& rng,
                                       std::uint32_t count) {
  for (int tries = 0; tries < 32; ++tries) {
    const auto& table = lake.tables[rng.uniform(
        static_cast<std::uint32_t>(lake.tables.size()))];
    if (table.rows.empty()) continue;
    const std::uint32_t col =
        rng.uniform(static_cast<std::uint32_t>(table.header.size()));
    std::vector<std::string> values;
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto& row = table.rows[rng.uniform(
          static_cast<std::uint32_t>(table.rows.size()))];
      if (col < row.size()) values.push_back(row[col]);
    }
    std::erase_if(values, [](const std::string& v) {
      return normalize_text(v, NormalizePolicy::Lower).empty();
    });
    if (!values.empty()) {
      // a couple of misses and a duplicate exercise the set semantics
      values.push_back("nohit_" + std::to_string(rng.uniform(100000)));
      if (values.size() > 1) values.push_back(values[0]);
      return values;
    }
  }
  return {"fallback_" + std::to_string(rng.uniform(1000))};
}

// Tuples from random complete rows of one table, as column lists.
std::optional<std::vector<std::vector<std::string>>> sample_tuples(
    const ToyLake& lake, Rng& rng) {
  for (int tries = 0; tries < 32; ++tries) {
    const auto& table = lake.tables[rng.uniform(
        static_cast<std::uint32_t>(lake.tables.size()))];
    if (table.header.size() < 2 || table.rows.size() < 2) continue;
    const std::uint32_t arity =
        2 + rng.uniform(std::min<std::uint32_t>(
                2, static_cast<std::uint32_t>(table.header.size()) - 1));
    std::vector<std::uint32_t> cols(table.header.size());
    for (std::uint32_t c = 0; c < cols.size(); ++c) cols[c] = c;
    for (std::uint32_t c = static_cast<std::uint32_t>(cols.size()) - 1; c > 0;
         --c)
      std::swap(cols[c], cols[rng.uniform(c + 1)]);
    cols.resize(arity);

    std::vector<std::vector<std::string>> columns(arity);
    std::uint32_t found = 0;
    for (const auto& row : table.rows) {
      bool complete = true;
      for (std::uint32_t c : cols)
        complete = complete && c < row.size() &&
                   !normalize_text(row[c], NormalizePolicy::Lower).empty();
      if (!complete) continue;
      if (rng.chance(0.4)) continue;
      for (std::uint32_t i = 0; i < arity; ++i)
        columns[i].push_back(row[cols[i]]);
      if (++found >= 5) break;
    }
    if (found < 2) continue;
    // one misaligned tuple that should rank nothing extra
    for (std::uint32_t i = 0; i < arity; ++i)
      columns[i].push_back("mx_" + std::to_string(rng.uniform(10000)));
    return columns;
  }
  return std::nullopt;
}

struct CorrQuery {
  std::vector<std::string> key;
  std::vector<std::string> target;
  std::optional<std::uint32_t> h;
  std::uint32_t m;
};

CorrQuery sample_corr(const ToyLake& lake, Rng& rng) {
  CorrQuery query;
  const auto keys = sample_column(lake, rng, 8 + rng.uniform(8));
  for (const auto& k : keys) {
    query.key.push_back(k);
    query.target.push_back(std::to_string(rng.uniform(1000)));
  }
  const std::uint32_t h_pick = rng.uniform(3);
  if (h_pick == 1) query.h = 4;
  if (h_pick == 2) query.h = 16;
  query.m = 1 + rng.uniform(3);
  return query;
}

// ---- criteria --------------------------------------------------------------

bool criterion1(std::string& note) {
  const auto start = Clock::now();
  std::uint64_t queries = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GenProfile profile;
    profile.tables = 8 + static_cast<std::uint32_t>(seed % 9);
    profile.max_rows = 40;
    const auto generated = gen_lake(1000 + seed, profile);
    const auto& lake = generated.lake;
    const auto index = index_of(lake);
    Rng rng(5000 + seed);

    auto check = [&](const RankedTables& engine, const RankedTables& oracle) {
      ++queries;
      if (!(engine == oracle)) ++mismatches;
    };

    {  // SC
      SeekerSpec spec;
      spec.kind = SeekerKind::SC;
      spec.query_columns = {sample_column(lake, rng, 4 + rng.uniform(10))};
      spec.k = 1 + rng.uniform(10);
      check(seek_sc(index, spec),
            oracle_sc(lake, spec.query_columns[0], spec.k));
    }
    {  // KEYWORD
      SeekerSpec spec;
      spec.kind = SeekerKind::Keyword;
      spec.query_columns = {sample_column(lake, rng, 4 + rng.uniform(10))};
      spec.k = 1 + rng.uniform(10);
      check(seek_keyword(index, spec),
            oracle_keyword(lake, spec.query_columns[0], spec.k));
    }
    {  // MC
      if (auto columns = sample_tuples(lake, rng)) {
        SeekerSpec spec;
        spec.kind = SeekerKind::MC;
        spec.query_columns = *columns;
        spec.k = 1 + rng.uniform(10);
        check(seek_mc(index, spec), oracle_mc(lake, spec.query_columns, spec.k));
      }
    }
    {  // CORR
      const auto query = sample_corr(lake, rng);
      SeekerSpec spec;
      spec.kind = SeekerKind::Corr;
      spec.query_columns = {query.key, query.target};
      spec.k = 1 + rng.uniform(10);
      spec.sample_size = query.h;
      spec.min_support = query.m;
      check(seek_corr(index, spec),
            oracle_corr(lake, query.key, query.target, query.h, query.m, spec.k));
    }
    {  // SC under a random include restriction
      SeekerSpec spec;
      spec.kind = SeekerKind::SC;
      spec.query_columns = {sample_column(lake, rng, 6)};
      spec.k = 1 + rng.uniform(10);
      std::vector<std::uint32_t> allowed;
      for (std::uint32_t t = 0; t < lake.tables.size(); ++t)
        if (rng.chance(0.5)) allowed.push_back(t);
      spec.restriction = TableRestriction::include(allowed);
      check(seek_sc(index, spec),
            oracle_sc(lake, spec.query_columns[0], spec.k,
                      NormalizePolicy::Lower, spec.restriction));
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%llu queries over 100 lakes, %llu mismatches (%.1fs)",
                static_cast<unsigned long long>(queries),
                static_cast<unsigned long long>(mismatches),
                seconds_since(start));
  note = buf;
  return mismatches == 0 && queries >= 400 && seconds_since(start) < 300.0;
}

bool criterion2(std::string& note) {
  std::uint64_t survivors_total = 0, true_positive = 0, joined_total = 0;
  std::uint64_t joined_true = 0, false_negatives = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenProfile profile;
    profile.tables = 15;
    profile.plant_join_tables = 4;
    profile.plant_join_arity = 2 + static_cast<std::uint32_t>(seed % 2);
    profile.plant_join_tuples = 5;
    profile.plant_misaligned_rows = 6;
    const auto generated = gen_lake(2000 + seed, profile);
    const auto& lake = generated.lake;
    const auto index = index_of(lake);

    SeekerSpec spec;
    spec.kind = SeekerKind::MC;
    spec.query_columns = generated.join->query_columns;
    spec.k = kUnlimitedK;
    const auto phases = seek_mc_phases(index, spec);

    std::vector<std::vector<std::string>> tuples;
    for (std::size_t j = 0; j < generated.join->query_columns[0].size(); ++j) {
      std::vector<std::string> tuple;
      for (const auto& column : generated.join->query_columns)
        tuple.push_back(column[j]);
      tuples.push_back(std::move(tuple));
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> survivor_set;
    for (const auto& row : phases.survivors)
      survivor_set.insert({row.table_id, row.row_id});

    joined_total += phases.joined.size();
    for (const auto& row : phases.joined)
      if (row_joinable(lake.tables[row.table_id], row.row_id, tuples,
                       NormalizePolicy::Lower))
        ++joined_true;
    survivors_total += phases.survivors.size();
    for (const auto& row : phases.survivors)
      if (row_joinable(lake.tables[row.table_id], row.row_id, tuples,
                       NormalizePolicy::Lower))
        ++true_positive;

    // no false negatives, ever: every joinable row survives the filter
    for (std::uint32_t t = 0; t < lake.tables.size(); ++t)
      for (std::uint32_t r = 0; r < lake.tables[t].rows.size(); ++r)
        if (row_joinable(lake.tables[t], r, tuples, NormalizePolicy::Lower) &&
            !survivor_set.contains({t, r}))
          ++false_negatives;
  }
  const double precision =
      survivors_total ? 100.0 * true_positive / survivors_total : 0.0;
  const double join_precision =
      joined_total ? 100.0 * joined_true / joined_total : 0.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "filter precision %.2f%% (%llu/%llu survivors; SQL-phase "
                "precision %.1f%%), false negatives %llu",
                precision, static_cast<unsigned long long>(true_positive),
                static_cast<unsigned long long>(survivors_total),
                join_precision,
                static_cast<unsigned long long>(false_negatives));
  note = buf;
  return survivors_total > 0 && precision >= 95.0 && false_negatives == 0 &&
         joined_total > survivors_total;  // the filter actually pruned
}

bool criterion3(std::string& note) {
  std::uint32_t candidates = 0, qcr_mismatch = 0, bounds = 0, sign_checked = 0,
                sign_mismatch = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenProfile profile;
    profile.tables = 8;
    profile.plant_corr_tables = 5;
    profile.corr_noise = (seed % 3) * 0.35;
    const auto generated = gen_lake(3000 + seed, profile);
    const auto& lake = generated.lake;
    const auto index = index_of(lake);
    const auto& corr = *generated.corr;

    SeekerSpec spec;
    spec.kind = SeekerKind::Corr;
    spec.query_columns = {corr.key, corr.target};
    spec.k = kUnlimitedK;
    spec.sample_size = std::nullopt;  // h unlimited
    spec.min_support = 3;
    const auto engine = seek_corr(index, spec);

    for (const auto& e : engine) {
      if (!(e.score >= 0.0 && e.score <= 1.0 && *e.detail.qcr >= -1.0 &&
            *e.detail.qcr <= 1.0))
        ++bounds;
    }

    for (const auto& candidate : corr.candidates) {
      ++candidates;
      // direct QCR formula on the joined pairs, no engine machinery
      double target_mean = 0.0, column_mean = 0.0;
      const std::size_t n = candidate.target_values.size();
      for (double v : candidate.target_values) target_mean += v;
      for (double v : candidate.column_values) column_mean += v;
      target_mean /= static_cast<double>(n);
      column_mean /= static_cast<double>(n);
      std::int64_t agree = 0, disagree = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const bool key_above = candidate.target_values[j] >= target_mean;
        const bool col_above = candidate.column_values[j] >= column_mean;
        (key_above == col_above ? agree : disagree) += 1;
      }
      const double direct =
          static_cast<double>(agree - disagree) / static_cast<double>(n);

      std::optional<double> engine_qcr;
      for (const auto& e : engine)
        if (e.table_id == candidate.table &&
            e.detail.columns ==
                std::vector<std::uint32_t>{candidate.key_col, candidate.num_col})
          engine_qcr = e.detail.qcr;
      if (!engine_qcr || std::fabs(*engine_qcr - direct) > 1e-12) {
        ++qcr_mismatch;
        continue;
      }
      worst = std::max(worst, std::fabs(*engine_qcr - direct));

      const double rho =
          pearson(candidate.target_values, candidate.column_values);
      if (std::fabs(rho) >= 0.5) {
        ++sign_checked;
        if ((rho > 0) != (*engine_qcr > 0)) ++sign_mismatch;
      }
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%u planted columns, max |engine-direct| %.2e, bounds "
                "violations %u, Pearson sign checks %u (mismatches %u)",
                candidates, worst, bounds, sign_checked, sign_mismatch);
  note = buf;
  return candidates == 50 && qcr_mismatch == 0 && bounds == 0 &&
         sign_checked > 0 && sign_mismatch == 0;
}

bool criterion4(std::string& note) {
  std::uint32_t groups = 0, misses = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenProfile profile;
    profile.tables = 20;
    profile.plant_union_group = 3 + static_cast<std::uint32_t>(seed % 4);
    const auto generated = gen_lake(4000 + seed, profile);
    const auto& group = *generated.union_group;
    const auto index = index_of(generated.lake);

    const auto& query_table = generated.lake.tables[group.query_table];
    TableData table;
    table.column_names = query_table.header;
    table.columns.resize(query_table.header.size());
    for (const auto& row : query_table.rows)
      for (std::size_t c = 0; c < table.columns.size(); ++c)
        table.columns[c].push_back(c < row.size() ? row[c] : std::string());

    const auto k = static_cast<std::uint32_t>(group.group.size());
    const auto plan = build_union_plan(table, k);  // k' = 10k
    const auto report = execute_plan(plan, index, {});
    const auto found = table_set(report.results);
    ++groups;
    for (std::uint32_t member : group.group)
      if (!found.contains(member)) ++misses;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%u planted groups, %u membership misses",
                groups, misses);
  note = buf;
  return groups == 10 && misses == 0;
}

// One random intersection plan over sampled queries.
struct IntersectionFixture {
  PlanGraph graph;
  std::vector<std::string> seekers;
};

IntersectionFixture make_intersection_plan(const ToyLake& lake, Rng& rng,
                                           std::uint32_t seeker_k,
                                           std::uint32_t combiner_k) {
  IntersectionFixture fixture;
  fixture.graph.add("input", make_input(), {});
  const std::uint32_t count = 2 + rng.uniform(2);
  for (std::uint32_t i = 0; i < count; ++i) {
    SeekerNodeSpec spec;
    const std::uint32_t kind = rng.uniform(3);
    if (kind == 2) {
      if (auto columns = sample_tuples(lake, rng)) {
        spec.kind = SeekerKind::MC;
        for (auto& column : *columns)
          spec.columns.push_back(ColumnSource::inline_values(std::move(column)));
      } else {
        spec.kind = SeekerKind::SC;
        spec.columns = {ColumnSource::inline_values(sample_column(lake, rng, 8))};
      }
    } else {
      spec.kind = kind == 0 ? SeekerKind::SC : SeekerKind::Keyword;
      spec.columns = {
          ColumnSource::inline_values(sample_column(lake, rng, 4 + rng.uniform(8)))};
    }
    spec.k = seeker_k;
    const std::string name = "s" + std::to_string(i);
    fixture.graph.add(name, make_seeker(std::move(spec)), {"input"});
    fixture.seekers.push_back(name);
  }
  fixture.graph.add("x", make_combiner(CombinerKind::Intersection, combiner_k),
                    fixture.seekers);
  fixture.graph.add("terminal", make_terminal(), {"x"});
  return fixture;
}

RankedTables oracle_run(const ToyLake& lake, const SeekerSpec& spec,
                        const TableRestriction& restriction) {
  switch (spec.kind) {
    case SeekerKind::SC:
      return oracle_sc(lake, spec.query_columns[0], spec.k,
                       NormalizePolicy::Lower, restriction);
    case SeekerKind::Keyword:
      return oracle_keyword(lake, spec.query_columns[0], spec.k,
                            NormalizePolicy::Lower, restriction);
    case SeekerKind::MC:
      return oracle_mc(lake, spec.query_columns, spec.k, NormalizePolicy::Lower,
                       restriction);
    case SeekerKind::Corr:
      return oracle_corr(lake, spec.query_columns[0], spec.query_columns[1],
                         spec.sample_size, spec.min_support, spec.k,
                         NormalizePolicy::Lower, restriction);
  }
  return {};
}

bool criterion5(std::string& note) {
  std::uint32_t plans = 0, set_violations = 0, sequential_mismatches = 0,
                baseline_mismatches = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenProfile profile;
    profile.tables = 12;
    profile.max_rows = 40;
    const auto generated = gen_lake(5000 + seed, profile);
    const auto& lake = generated.lake;
    const auto index = index_of(lake);
    Rng rng(7000 + seed);
    ++plans;

    {  // unlimited K: optimized set == full intersection, any order
      const auto fixture =
          make_intersection_plan(lake, rng, kUnlimitedK, kUnlimitedK);
      std::set<std::uint32_t> expected;
      bool first = true;
      for (const auto& name : fixture.seekers) {
        const auto spec = fixture.graph.at(name).seeker.to_seeker_spec();
        const auto tables = table_set(oracle_run(lake, spec, {}));
        if (first) {
          expected = tables;
          first = false;
        } else {
          std::set<std::uint32_t> kept;
          for (std::uint32_t t : expected)
            if (tables.contains(t)) kept.insert(t);
          expected = std::move(kept);
        }
      }

      std::vector<std::string> order = fixture.seekers;
      std::sort(order.begin(), order.end());
      do {
        ExecOptions options;
        options.order_override = [&order](const std::string&,
                                          std::vector<std::string>& o) {
          o = order;
        };
        const auto report = execute_plan(fixture.graph, index, options);
        if (table_set(report.results) != expected) ++set_violations;
      } while (std::next_permutation(order.begin(), order.end()));
    }

    {  // finite K: optimized output equals the sequential oracle exactly
      Rng rng_finite(9000 + seed);
      const auto fixture = make_intersection_plan(
          lake, rng_finite, 3 + rng_finite.uniform(5), 2 + rng_finite.uniform(5));
      const auto engine = execute_plan(fixture.graph, index, {});

      auto groups = group_plan(fixture.graph);
      rank_group(fixture.graph, groups[0]);
      std::vector<RankedTables> stages;
      TableRestriction restriction;
      bool empty_stage = false;
      for (const auto& name : groups[0].seekers) {
        const auto spec = fixture.graph.at(name).seeker.to_seeker_spec();
        auto stage = oracle_run(lake, spec, restriction);
        if (stage.empty()) {
          empty_stage = true;
          break;
        }
        std::vector<std::uint32_t> tables;
        for (const auto& e : stage) tables.push_back(e.table_id);
        restriction = TableRestriction::include(tables);
        stages.push_back(std::move(stage));
      }
      RankedTables expected;
      if (!empty_stage)
        expected = combine_intersection(
            stages, fixture.graph.at("x").combiner.k);
      if (!(engine.results == expected)) ++sequential_mismatches;
    }

    {  // union / counter plans: rewriting must not change anything
      Rng rng_uc(11000 + seed);
      PlanGraph graph;
      graph.add("input", make_input(), {});
      std::vector<std::string> names;
      const std::uint32_t count = 2 + rng_uc.uniform(2);
      for (std::uint32_t i = 0; i < count; ++i) {
        SeekerNodeSpec spec;
        spec.kind = rng_uc.chance(0.5) ? SeekerKind::SC : SeekerKind::Keyword;
        spec.columns = {ColumnSource::inline_values(
            sample_column(lake, rng_uc, 4 + rng_uc.uniform(8)))};
        spec.k = 2 + rng_uc.uniform(6);
        names.push_back("u" + std::to_string(i));
        graph.add(names.back(), make_seeker(std::move(spec)), {"input"});
      }
      graph.add("c",
                make_combiner(rng_uc.chance(0.5) ? CombinerKind::Union
                                                 : CombinerKind::Counter,
                              3 + rng_uc.uniform(5)),
                names);
      graph.add("terminal", make_terminal(), {"c"});

      ExecOptions off;
      off.optimize = false;
      if (!(execute_plan(graph, index, {}).results ==
            execute_plan(graph, index, off).results))
        ++baseline_mismatches;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%u plans: %u set violations (all orders), %u sequential-oracle "
                "mismatches, %u union/counter baseline mismatches",
                plans, set_violations, sequential_mismatches,
                baseline_mismatches);
  note = buf;
  return plans == 50 && set_violations == 0 && sequential_mismatches == 0 &&
         baseline_mismatches == 0;
}

bool criterion6(std::string& note) {
  GenProfile profile;
  profile.tables = 1000;
  profile.min_cols = 3;
  profile.max_cols = 6;
  profile.min_rows = 10;
  profile.max_rows = 30;
  profile.string_pool = 120;  // heavy value sharing across tables
  const auto generated = gen_lake(600, profile);
  const auto& lake = generated.lake;
  const auto index = index_of(lake);

  Rng rng(601);
  std::vector<double> reductions;
  std::uint32_t not_strictly_fewer = 0;
  while (reductions.size() < 20) {
    const auto columns = sample_tuples(lake, rng);
    if (!columns || columns->size() < 2) continue;
    // example pairs from the sampled tuples, query values from another column
    std::vector<ColumnSource> examples;
    for (const auto& column : *columns)
      examples.push_back(ColumnSource::inline_values(column));
    const auto query = sample_column(lake, rng, 8 + rng.uniform(8));
    PlanGraph plan;
    try {
      plan = build_augmentation_plan(std::move(examples),
                                     ColumnSource::inline_values(query), 10);
    } catch (const PlanError&) {
      continue;
    }

    const auto optimized = execute_plan(plan, index, {});
    ExecOptions off;
    off.optimize = false;
    const auto baseline = execute_plan(plan, index, off);
    if (optimized.rows_scanned >= baseline.rows_scanned) ++not_strictly_fewer;
    reductions.push_back(
        1.0 - static_cast<double>(optimized.rows_scanned) /
                  static_cast<double>(baseline.rows_scanned));
  }
  std::sort(reductions.begin(), reductions.end());
  const double median =
      (reductions[9] + reductions[10]) / 2.0;  // 20 samples
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "20 augmentation plans on a 1000-table lake: median scan "
                "reduction %.1f%%, non-improving plans %u",
                100.0 * median, not_strictly_fewer);
  note = buf;
  return median >= 0.20 && not_strictly_fewer == 0;
}

bool criterion7(std::string& note) {
  GenProfile profile;
  profile.tables = 50;
  const auto generated = gen_lake(700, profile);

  TempDir dir("storage");
  const auto lake_dir = dir.path / "lake";
  write_lake_csvs(generated.lake, lake_dir);

  const auto index = IndexHandle::build_from_dir(lake_dir, NormalizePolicy::Lower);
  const auto dump_before = index.dump_canonical();

  const auto index_dir = dir.path / "index";
  index.save(index_dir);
  const auto loaded = IndexHandle::load(index_dir);
  const bool reload_identical = loaded.dump_canonical() == dump_before;

  const auto rebuilt = IndexHandle::build_from_dir(lake_dir, NormalizePolicy::Lower);
  const auto index_dir2 = dir.path / "index2";
  rebuilt.save(index_dir2);
  const bool rebuild_identical =
      IndexHandle::load(index_dir2).dump_canonical() == dump_before;

  // one logical relation + catalog: nothing else in the index directory
  std::set<std::string> files;
  for (const auto& entry : fs::directory_iterator(index_dir))
    files.insert(entry.path().filename().string());
  const bool layout_ok = files == std::set<std::string>{"catalog.json", "data.bin"};

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "reload dump identical: %s; independent rebuild identical: %s; "
                "layout = catalog + one relation: %s",
                reload_identical ? "yes" : "no",
                rebuild_identical ? "yes" : "no", layout_ok ? "yes" : "no");
  note = buf;
  return reload_identical && rebuild_identical && layout_ok;
}

bool criterion8(std::string& note) {
  TempDir dir("perf");
  const auto lake_dir = dir.path / "lake";
  std::uint64_t cells = 0;
  {
    GenProfile profile;
    profile.tables = 10000;
    profile.min_cols = 8;
    profile.max_cols = 12;
    profile.min_rows = 40;
    profile.max_rows = 60;
    profile.string_pool = 5000;
    const auto generated = gen_lake(800, profile);
    for (const auto& table : generated.lake.tables)
      cells += table.rows.size() * table.header.size();
    write_lake_csvs(generated.lake, lake_dir);
  }

  const auto build_start = Clock::now();
  const auto index = IndexHandle::build_from_dir(lake_dir, NormalizePolicy::Lower);
  index.save(dir.path / "index");
  const double build_seconds = seconds_since(build_start);

  Rng rng(801);

  // single-seeker latencies
  auto time_seeker = [&](const SeekerSpec& spec) {
    const auto start = Clock::now();
    run_seeker(index, spec);
    return seconds_since(start);
  };

  // realistic queries against indexed values
  const auto& catalog = index.catalog();
  auto values_from_table = [&](std::uint32_t table_id, std::uint32_t col,
                               std::uint32_t count) {
    std::vector<std::string> values;
    const auto rows = index.fetch_rows(
        table_id, [&] {
          std::vector<std::uint32_t> ids;
          for (std::uint32_t r = 0; r < count; ++r) ids.push_back(r);
          return ids;
        }());
    for (const auto& row : rows)
      for (const auto& [c, value] : row.cells)
        if (c == col) values.push_back(value);
    return values;
  };

  double worst_single = 0.0;
  {
    SeekerSpec spec;
    spec.kind = SeekerKind::SC;
    spec.query_columns = {values_from_table(17, 0, 20)};
    spec.k = 10;
    worst_single = std::max(worst_single, time_seeker(spec));
    spec.kind = SeekerKind::Keyword;
    worst_single = std::max(worst_single, time_seeker(spec));
  }
  {
    SeekerSpec spec;
    spec.kind = SeekerKind::MC;
    spec.query_columns = {values_from_table(42, 0, 5), values_from_table(42, 1, 5)};
    spec.k = 10;
    worst_single = std::max(worst_single, time_seeker(spec));
  }
  {
    SeekerSpec spec;
    spec.kind = SeekerKind::Corr;
    spec.query_columns = {values_from_table(7, 0, 20), {}};
    for (std::uint32_t i = 0; i < spec.query_columns[0].size(); ++i)
      spec.query_columns[1].push_back(std::to_string(rng.uniform(1000)));
    spec.k = 10;
    spec.sample_size = 256;
    worst_single = std::max(worst_single, time_seeker(spec));
  }

  // full union plan over a ten-column query table
  double union_seconds = 0.0;
  {
    TableData table;
    const auto& entry = catalog.at(123);
    table.column_names = entry.column_names;
    table.columns.resize(entry.column_names.size());
    const auto rows = index.fetch_rows(123, [&] {
      std::vector<std::uint32_t> ids;
      for (std::uint32_t r = 0; r < entry.row_count; ++r) ids.push_back(r);
      return ids;
    }());
    for (const auto& row : rows)
      for (const auto& [c, value] : row.cells) table.columns[c].push_back(value);
    const auto plan = build_union_plan(table, 10);
    const auto start = Clock::now();
    execute_plan(plan, index, {});
    union_seconds = seconds_since(start);
  }

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%llu cells / %u tables: build+persist %.1fs (<300), worst "
                "single seeker %.2fs (<2), union plan %.2fs (<10)",
                static_cast<unsigned long long>(cells), index.table_count(),
                build_seconds, worst_single, union_seconds);
  note = buf;
  return cells >= 4500000 && build_seconds < 300.0 && worst_single < 2.0 &&
         union_seconds < 10.0;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  struct Gate {
    int id;
    const char* label;
    bool (*run)(std::string&);
  };
  const Gate gates[] = {
      {1, "seeker-oracle equivalence", criterion1},
      {2, "MC signature-filter precision analog", criterion2},
      {3, "QCR fidelity", criterion3},
      {4, "union task fidelity", criterion4},
      {5, "optimizer consistency", criterion5},
      {6, "rewriting benefit analog", criterion6},
      {7, "storage unification round-trip", criterion7},
      {8, "desk-scale performance", criterion8},
  };

  bool all_ok = true;
  for (const auto& gate : gates) {
    if (!selected.empty() && !selected.contains(gate.id)) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = gate.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", gate.id, gate.label,
                detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
