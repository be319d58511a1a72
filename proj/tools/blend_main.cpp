#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blend/csv.hpp"
#include "blend/executor.hpp"
#include "blend/index.hpp"
#include "blend/plan.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string default_index_dir() {
  const char* env = std::getenv("BLEND_INDEX");
  return env ? env : "";
}

blend::IndexHandle open_index(const std::string& dir) {
  if (dir.empty())
    throw CLI::ValidationError(
        "--index", "no index directory given (flag or BLEND_INDEX)");
  return blend::IndexHandle::load(dir);
}

std::string detail_csv(const blend::RankedEntry& entry) {
  const auto& d = entry.detail;
  if (d.qcr) {
    return "key_col=" + std::to_string(d.columns.at(0)) +
           "|num_col=" + std::to_string(d.columns.at(1)) +
           "|qcr=" + format_double(*d.qcr);
  }
  if (d.columns.size() == 1) return "col=" + std::to_string(d.columns[0]);
  if (d.columns.size() > 1) {
    std::string out = "cols=";
    for (std::size_t i = 0; i < d.columns.size(); ++i) {
      if (i) out += '|';
      out += std::to_string(d.columns[i]);
    }
    return out;
  }
  return "";
}

json detail_json(const blend::RankedEntry& entry) {
  const auto& d = entry.detail;
  json j = json::object();
  if (d.qcr) {
    j["key_column"] = d.columns.at(0);
    j["num_column"] = d.columns.at(1);
    j["qcr"] = *d.qcr;
  } else if (d.columns.size() == 1) {
    j["column"] = d.columns[0];
  } else if (d.columns.size() > 1) {
    j["columns"] = d.columns;
  }
  return j;
}

void print_results(const blend::IndexHandle& index,
                   const blend::RankedTables& results,
                   const std::string& format) {
  if (format == "json") {
    json out = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& entry = results[i];
      json j;
      j["rank"] = i + 1;
      j["table_id"] = entry.table_id;
      j["table_path"] = index.catalog().at(entry.table_id).path;
      j["score"] = entry.score;
      j["detail"] = detail_json(entry);
      out.push_back(std::move(j));
    }
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::cout << "rank,table_id,table_path,score,detail\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& entry = results[i];
    std::cout << i + 1 << ',' << entry.table_id << ','
              << blend::csv_escape(index.catalog().at(entry.table_id).path)
              << ',' << format_double(entry.score) << ','
              << blend::csv_escape(detail_csv(entry)) << "\n";
  }
}

struct TaskOptions {
  std::string index_dir = default_index_dir();
  std::uint32_t k = 10;
  bool no_optimize = false;
  bool trace = false;
  std::string format = "csv";
};

void add_task_options(CLI::App* cmd, TaskOptions& options) {
  cmd->add_option("--index", options.index_dir,
                  "index directory (default: $BLEND_INDEX)");
  cmd->add_option("-k,--k", options.k, "result limit")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-optimize", options.no_optimize,
                "run every seeker unrestricted (diagnostic baseline)");
  cmd->add_flag("--trace", options.trace,
                "emit optimizer trace as JSON lines on stderr");
  cmd->add_option("--format", options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

int run_plan(const blend::PlanGraph& graph, const TaskOptions& options) {
  const auto index = open_index(options.index_dir);
  blend::ExecOptions exec;
  exec.optimize = !options.no_optimize;
  if (options.trace) exec.trace = &std::cerr;
  const auto report = blend::execute_plan(graph, index, exec);
  print_results(index, report.results, options.format);
  return kExitOk;
}

int cmd_index_build(const std::string& lake_dir, const std::string& out_dir,
                    const std::string& normalize, bool force) {
  const auto policy = blend::normalize_policy_from_string(normalize);
  if (!policy) throw CLI::ValidationError("--normalize", "unknown policy");

  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!force) {
      std::cerr << "error: index exists at " << out_dir
                << " (use --force to rebuild)\n";
      return kExitRuntime;
    }
    fs::remove_all(out_dir);
  }

  std::vector<std::string> warnings;
  const auto index = blend::IndexHandle::build_from_dir(lake_dir, *policy,
                                                        &warnings);
  index.save(out_dir);
  for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";

  std::uint64_t bytes = 0;
  for (const auto& file : fs::directory_iterator(out_dir))
    if (file.is_regular_file()) bytes += file.file_size();

  json summary;
  summary["tables"] = index.table_count();
  summary["cells"] = index.cell_count();
  summary["signatures"] = index.signature_count();
  summary["bytes"] = bytes;
  summary["warnings"] = warnings.size();
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blend — composable top-K data discovery over a CSV lake"};
  app.require_subcommand(1);
  int rc = kExitOk;

  // ---- index ----
  auto* index_cmd = app.add_subcommand("index", "build or inspect an index");
  index_cmd->require_subcommand(1);

  auto* build_cmd = index_cmd->add_subcommand("build", "index a lake directory");
  std::string lake_dir, out_dir, normalize = "lower";
  bool force = false;
  build_cmd->add_option("--lake", lake_dir, "directory of CSV files")
      ->required();
  build_cmd->add_option("--out", out_dir, "index output directory")->required();
  build_cmd->add_option("--normalize", normalize, "value normalization policy")
      ->check(CLI::IsMember({"lower", "exact"}));
  build_cmd->add_flag("--force", force, "replace an existing index");
  build_cmd->callback(
      [&] { rc = cmd_index_build(lake_dir, out_dir, normalize, force); });

  auto* dump_cmd = index_cmd->add_subcommand("dump", "canonical relation dump");
  std::string dump_index_dir = default_index_dir();
  dump_cmd->add_option("--index", dump_index_dir,
                       "index directory (default: $BLEND_INDEX)");
  dump_cmd->callback([&] {
    const auto index = open_index(dump_index_dir);
    index.dump_canonical(std::cout);
    rc = kExitOk;
  });

  // ---- task ----
  auto* task_cmd = app.add_subcommand("task", "run a predefined discovery task");
  task_cmd->require_subcommand(1);

  auto* sc_cmd = task_cmd->add_subcommand("sc", "single-column join search");
  TaskOptions sc_options;
  std::string sc_query;
  sc_cmd->add_option("--query", sc_query, "query column as file.csv:Column")
      ->required();
  add_task_options(sc_cmd, sc_options);
  sc_cmd->callback([&] {
    const auto values = blend::load_column_ref(sc_query, fs::current_path());
    rc = run_plan(blend::build_join_plan(
                      blend::ColumnSource::inline_values(values), sc_options.k),
                  sc_options);
  });

  auto* kw_cmd = task_cmd->add_subcommand("keyword", "keyword search");
  TaskOptions kw_options;
  std::string kw_query;
  kw_cmd->add_option("--query", kw_query, "query column as file.csv:Column")
      ->required();
  add_task_options(kw_cmd, kw_options);
  kw_cmd->callback([&] {
    const auto values = blend::load_column_ref(kw_query, fs::current_path());
    rc = run_plan(blend::build_keyword_plan(
                      blend::ColumnSource::inline_values(values), kw_options.k),
                  kw_options);
  });

  auto* mc_cmd = task_cmd->add_subcommand("mc", "multi-column join search");
  TaskOptions mc_options;
  std::vector<std::string> mc_queries;
  mc_cmd->add_option("--query", mc_queries,
                     "query columns as file.csv:Column (repeat 2+ times)")
      ->required()
      ->expected(-2);
  add_task_options(mc_cmd, mc_options);
  mc_cmd->callback([&] {
    std::vector<blend::ColumnSource> columns;
    for (const auto& ref : mc_queries)
      columns.push_back(blend::ColumnSource::inline_values(
          blend::load_column_ref(ref, fs::current_path())));
    rc = run_plan(blend::build_mc_join_plan(std::move(columns), mc_options.k),
                  mc_options);
  });

  auto* corr_cmd = task_cmd->add_subcommand("corr", "correlation search");
  TaskOptions corr_options;
  std::string corr_key, corr_target;
  std::uint32_t sample = blend::kDefaultSampleSize;
  std::uint32_t min_support = blend::kDefaultMinSupport;
  corr_cmd->add_option("--key", corr_key, "join key column as file.csv:Column")
      ->required();
  corr_cmd
      ->add_option("--target", corr_target,
                   "numeric target column as file.csv:Column")
      ->required();
  corr_cmd->add_option("--sample", sample, "sample size h (0 = unlimited)");
  corr_cmd->add_option("--min-support", min_support,
                       "minimum matched pairs per ranked group");
  add_task_options(corr_cmd, corr_options);
  corr_cmd->callback([&] {
    const auto key = blend::load_column_ref(corr_key, fs::current_path());
    const auto target = blend::load_column_ref(corr_target, fs::current_path());
    const std::optional<std::uint32_t> h =
        sample == 0 ? std::nullopt : std::optional<std::uint32_t>(sample);
    rc = run_plan(
        blend::build_corr_plan(blend::ColumnSource::inline_values(key),
                               blend::ColumnSource::inline_values(target),
                               corr_options.k, h, min_support),
        corr_options);
  });

  auto* union_cmd = task_cmd->add_subcommand("union", "union (unionable) search");
  TaskOptions union_options;
  std::string union_query;
  std::uint32_t k_prime = 0;
  union_cmd->add_option("--query", union_query, "query table CSV file")
      ->required();
  union_cmd->add_option("--kprime", k_prime,
                        "per-column seeker limit (default 10*k)");
  add_task_options(union_cmd, union_options);
  union_cmd->callback([&] {
    const auto table = blend::load_table_csv(union_query);
    rc = run_plan(blend::build_union_plan(table, union_options.k, k_prime),
                  union_options);
  });

  auto* augment_cmd =
      task_cmd->add_subcommand("augment", "augmentation by example");
  TaskOptions augment_options;
  std::vector<std::string> example_refs;
  std::string augment_query;
  augment_cmd
      ->add_option("--example", example_refs,
                   "example columns as file.csv:Column (repeat 2+ times)")
      ->required()
      ->expected(-2);
  augment_cmd
      ->add_option("--query", augment_query,
                   "query column as file.csv:Column")
      ->required();
  add_task_options(augment_cmd, augment_options);
  augment_cmd->callback([&] {
    std::vector<blend::ColumnSource> examples;
    for (const auto& ref : example_refs)
      examples.push_back(blend::ColumnSource::inline_values(
          blend::load_column_ref(ref, fs::current_path())));
    const auto query = blend::load_column_ref(augment_query, fs::current_path());
    rc = run_plan(blend::build_augmentation_plan(
                      std::move(examples),
                      blend::ColumnSource::inline_values(query),
                      augment_options.k),
                  augment_options);
  });

  // ---- plan ----
  auto* plan_cmd = app.add_subcommand("plan", "run a plan file");
  auto* plan_run_cmd = plan_cmd->add_subcommand("run", "execute a JSON plan");
  TaskOptions plan_options;
  std::string plan_path;
  plan_run_cmd->add_option("--plan", plan_path, "plan JSON file")->required();
  plan_run_cmd->add_option("--index", plan_options.index_dir,
                           "index directory (default: $BLEND_INDEX)");
  plan_run_cmd->add_flag("--no-optimize", plan_options.no_optimize,
                         "run every seeker unrestricted");
  plan_run_cmd->add_flag("--trace", plan_options.trace,
                         "emit optimizer trace as JSON lines on stderr");
  plan_run_cmd->add_option("--format", plan_options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  plan_run_cmd->callback([&] {
    std::ifstream in(plan_path, std::ios::binary);
    if (!in) throw blend::PlanError("cannot open plan file: " + plan_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto graph = blend::parse_plan_json(buffer.str());
    graph.resolve_refs(fs::absolute(plan_path).parent_path());
    rc = run_plan(graph, plan_options);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const blend::PlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const blend::ExecError& e) {
    std::cerr << "error";
    if (!e.node.empty()) std::cerr << " [node " << e.node << "]";
    std::cerr << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return rc;
}
