#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "blend/index.hpp"
#include "blend/plan.hpp"
#include "blend/ranking.hpp"

namespace blend {

struct ExecError : std::runtime_error {
  std::string node;  // offending node name, when known
  ExecError(std::string node_name, const std::string& message)
      : std::runtime_error(message), node(std::move(node_name)) {}
};

// Seekers feeding one combiner, executed sequentially with rewriting.
// A seeker feeding the terminal directly forms a singleton group with an
// implicit pass-through combiner (empty combiner name).
struct ExecutionGroup {
  std::vector<std::string> seekers;  // declaration order until ranked
  std::string combiner;
};

// Groups in topological order of their combiners.
std::vector<ExecutionGroup> group_plan(const PlanGraph& graph);

// Static cost classes, cheapest first: KEYWORD=0, SC=1, CORR=2, MC=3.
// Ties: total query-value count ascending, then node name ascending.
int seeker_cost_class(SeekerKind kind);
void rank_group(const PlanGraph& graph, ExecutionGroup& group);

// Candidate-set rewriting. `prior_tables` are the tables produced by the
// previously executed seeker(s) of the group; `first_in_group` disables
// rewriting for the group's first seeker. For Difference the restriction is
// only sound against the subtrahend's output (NOT IN), so the caller states
// whether the prior seeker was the subtrahend side.
SeekerSpec rewrite_restriction(SeekerSpec spec, CombinerKind combiner_kind,
                               const std::vector<std::uint32_t>& prior_tables,
                               bool first_in_group,
                               bool prior_is_subtrahend = false);

struct ExecStep {
  std::string node;
  std::string group;  // combiner name, or the seeker itself when pass-through
  TableRestriction::Mode restriction_mode = TableRestriction::Mode::None;
  std::uint64_t restriction_size = 0;
  std::uint64_t rows_scanned = 0;
  std::uint64_t result_count = 0;
  bool skipped = false;  // short-circuited by an empty intersection input
};

struct ExecReport {
  RankedTables results;
  std::uint64_t rows_scanned = 0;
  std::vector<ExecStep> steps;
};

struct ExecOptions {
  bool optimize = true;
  std::ostream* trace = nullptr;  // JSON lines, one per execution group
  // Test hook: overrides the ranked seeker order of a group.
  std::function<void(const std::string& combiner,
                     std::vector<std::string>& order)>
      order_override;
};

// Validates, then executes. optimize=true runs each group's seekers in
// ranked order with rewriting; optimize=false runs every seeker
// unrestricted in declaration order. Seeker errors surface as ExecError
// with the node name attached.
ExecReport execute_plan(const PlanGraph& graph, const IndexHandle& index,
                        const ExecOptions& options = {});

}  // namespace blend
