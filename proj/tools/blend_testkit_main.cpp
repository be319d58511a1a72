#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "blend/testkit.hpp"
#include "json.hpp"

using namespace blend;

int main(int argc, char** argv) {
  CLI::App app{"blend-testkit — synthetic lake generator for fixtures"};
  app.require_subcommand(1);
  int rc = 0;

  auto* gen = app.add_subcommand("gen", "materialize a seeded lake as CSVs");
  std::uint64_t seed = 0;
  std::string out_dir;
  testkit::GenProfile profile;
  gen->add_option("--seed", seed, "generator seed")->required();
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--tables", profile.tables, "background table count");
  gen->add_option("--min-cols", profile.min_cols, "minimum columns");
  gen->add_option("--max-cols", profile.max_cols, "maximum columns");
  gen->add_option("--min-rows", profile.min_rows, "minimum rows");
  gen->add_option("--max-rows", profile.max_rows, "maximum rows");
  gen->add_option("--pool", profile.string_pool, "distinct text token count");
  gen->add_option("--plant-join-tables", profile.plant_join_tables,
                  "tables carrying planted join tuples");
  gen->add_option("--plant-union-group", profile.plant_union_group,
                  "size of the planted unionable group");
  gen->add_option("--plant-corr-tables", profile.plant_corr_tables,
                  "tables with a planted correlated column");
  gen->callback([&] {
    const auto generated = testkit::gen_lake(seed, profile);
    testkit::write_lake_csvs(generated.lake, out_dir);
    nlohmann::json summary;
    summary["seed"] = seed;
    summary["tables"] = generated.lake.tables.size();
    if (generated.join) {
      summary["planted_join_tables"] = generated.join->tables;
      summary["planted_join_query"] = generated.join->query_columns;
    }
    if (generated.union_group) {
      summary["planted_union_group"] = generated.union_group->group;
      summary["planted_union_query_table"] = generated.union_group->query_table;
    }
    if (generated.corr) summary["planted_corr_key"] = generated.corr->key;
    std::cout << summary.dump() << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
