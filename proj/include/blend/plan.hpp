#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blend/combiners.hpp"
#include "blend/seekers.hpp"

namespace blend {

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Input, Seeker, Combiner, Terminal };

std::string_view to_string(NodeKind kind);

// A query column: either inline values or a `path.csv:Column` reference
// resolved against a base directory before execution.
struct ColumnSource {
  std::vector<std::string> values;
  std::string ref;

  bool is_ref() const { return !ref.empty(); }
  static ColumnSource inline_values(std::vector<std::string> values);
  static ColumnSource reference(std::string ref);
};

struct SeekerNodeSpec {
  SeekerKind kind = SeekerKind::SC;
  std::uint32_t k = 10;
  std::vector<ColumnSource> columns;  // SC/KEYWORD: 1; MC: >=2; CORR: {key, target}
  std::optional<std::uint32_t> sample_size = kDefaultSampleSize;  // CORR
  std::uint32_t min_support = kDefaultMinSupport;                 // CORR

  // Materializes the runtime spec; throws PlanError if any ref is unresolved.
  SeekerSpec to_seeker_spec() const;
};

struct PlanNode {
  std::string name;
  NodeKind kind = NodeKind::Input;
  SeekerNodeSpec seeker;    // kind == Seeker
  CombinerSpec combiner;    // kind == Combiner
  std::vector<std::string> inputs;  // upstream node names
};

class PlanGraph {
 public:
  const std::vector<PlanNode>& nodes() const { return nodes_; }
  const PlanNode* find(std::string_view name) const;
  const PlanNode& at(std::string_view name) const;  // throws PlanError

  // Appends a node; throws PlanError on a duplicate name or unknown
  // upstream. Appending with existing upstreams cannot create a cycle.
  void add(PlanNode node);
  void add(std::string name, PlanNode node, std::vector<std::string> upstream);

  // Unchecked construction for the parser; callers must validate().
  static PlanGraph from_nodes(std::vector<PlanNode> nodes);

  // Whole-graph validation: unique names, known upstreams, acyclic, exactly
  // one terminal, at least one input, kind arities, reachability. Returns
  // every violation; empty means valid.
  std::vector<std::string> validate() const;
  void validate_or_throw() const;

  // Replaces every `file:column` reference by the referenced values.
  void resolve_refs(const std::filesystem::path& base_dir);
  bool has_unresolved_refs() const;

 private:
  std::vector<PlanNode> nodes_;
};

// Node payload helpers (name and upstreams supplied by add()).
PlanNode make_input();
PlanNode make_terminal();
PlanNode make_seeker(SeekerNodeSpec spec);
PlanNode make_combiner(CombinerKind kind, std::uint32_t k);

// Predefined task builders: input -> seeker(s) -> [combiner] -> terminal.
PlanGraph build_join_plan(ColumnSource column, std::uint32_t k);
PlanGraph build_keyword_plan(ColumnSource column, std::uint32_t k);
PlanGraph build_mc_join_plan(std::vector<ColumnSource> columns, std::uint32_t k);
PlanGraph build_corr_plan(ColumnSource key, ColumnSource target, std::uint32_t k,
                          std::optional<std::uint32_t> sample_size = kDefaultSampleSize,
                          std::uint32_t min_support = kDefaultMinSupport);

// One SC seeker (limit k_prime, default 10*k) per non-empty column, all
// feeding a counter with limit k. Columns that are entirely empty after
// normalization are skipped; zero usable columns is an error.
struct TableData {
  std::vector<std::string> column_names;
  std::vector<std::vector<std::string>> columns;  // column-major values
};
PlanGraph build_union_plan(const TableData& table, std::uint32_t k,
                           std::uint32_t k_prime = 0);

// MC seeker on the example columns + SC seeker on the query column feeding
// an intersection combiner.
PlanGraph build_augmentation_plan(std::vector<ColumnSource> example_columns,
                                  ColumnSource query_column, std::uint32_t k);

// JSON plan files. serialize_plan(parse_plan_json(x)) is canonical and
// idempotent. Parse errors carry node/field diagnostics.
PlanGraph parse_plan_json(const std::string& text);
std::string serialize_plan(const PlanGraph& graph);

// Reads `path.csv:Column` against base_dir; raw (un-normalized) values.
std::vector<std::string> load_column_ref(const std::string& ref,
                                         const std::filesystem::path& base_dir);
TableData load_table_csv(const std::filesystem::path& path);

}  // namespace blend
