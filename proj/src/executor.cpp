#include "blend/executor.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "blend/combiners.hpp"
#include "blend/seekers.hpp"
#include "json.hpp"

namespace blend {

using nlohmann::json;

namespace {

// Deterministic topological order: Kahn's algorithm, smallest declaration
// index first. add()-built graphs come out in declaration order.
std::vector<std::size_t> topo_order(const PlanGraph& graph) {
  const auto& nodes = graph.nodes();
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < nodes.size(); ++i) by_name.emplace(nodes[i].name, i);

  std::vector<std::size_t> indegree(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> downstream(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    indegree[i] = nodes[i].inputs.size();
    for (const auto& upstream : nodes[i].inputs)
      downstream[by_name.at(upstream)].push_back(i);
  }

  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (indegree[i] == 0) ready.insert(i);

  std::vector<std::size_t> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t next : downstream[i])
      if (--indegree[next] == 0) ready.insert(next);
  }
  return order;
}

std::uint64_t query_value_count(const SeekerNodeSpec& spec) {
  std::uint64_t count = 0;
  for (const auto& column : spec.columns) count += column.values.size();
  return count;
}

std::vector<std::uint32_t> result_tables(const RankedTables& results) {
  std::vector<std::uint32_t> tables;
  tables.reserve(results.size());
  for (const auto& entry : results) tables.push_back(entry.table_id);
  std::sort(tables.begin(), tables.end());
  tables.erase(std::unique(tables.begin(), tables.end()), tables.end());
  return tables;
}

const char* restriction_name(TableRestriction::Mode mode) {
  switch (mode) {
    case TableRestriction::Mode::Include: return "include";
    case TableRestriction::Mode::Exclude: return "exclude";
    default: return "none";
  }
}

struct GroupTrace {
  std::string group;
  std::string combiner_kind;
  std::vector<std::string> order;
  std::vector<std::size_t> step_indices;  // into ExecReport::steps
};

json step_to_json(const ExecStep& step) {
  json s;
  s["seeker"] = step.node;
  s["restriction"] = restriction_name(step.restriction_mode);
  s["restriction_size"] = step.restriction_size;
  s["rows_scanned"] = step.rows_scanned;
  s["results"] = step.result_count;
  s["skipped"] = step.skipped;
  return s;
}

void emit_group_trace(std::ostream& out, const GroupTrace& trace,
                      const std::vector<ExecStep>& all_steps) {
  json j;
  j["group"] = trace.group;
  j["combiner"] = trace.combiner_kind;
  j["order"] = trace.order;
  json steps = json::array();
  for (std::size_t i : trace.step_indices)
    steps.push_back(step_to_json(all_steps[i]));
  j["steps"] = steps;
  out << j.dump() << "\n";
}

}  // namespace

std::vector<ExecutionGroup> group_plan(const PlanGraph& graph) {
  const auto& nodes = graph.nodes();
  std::set<std::string> grouped_seekers;
  std::vector<ExecutionGroup> groups;
  for (std::size_t i : topo_order(graph)) {
    const PlanNode& node = nodes[i];
    if (node.kind != NodeKind::Combiner) continue;
    ExecutionGroup group;
    group.combiner = node.name;
    for (const auto& upstream : node.inputs) {
      if (graph.at(upstream).kind == NodeKind::Seeker) {
        group.seekers.push_back(upstream);
        grouped_seekers.insert(upstream);
      }
    }
    groups.push_back(std::move(group));
  }
  // Seekers feeding the terminal directly: singleton pass-through groups.
  for (const auto& node : nodes) {
    if (node.kind != NodeKind::Terminal) continue;
    for (const auto& upstream : node.inputs) {
      if (graph.at(upstream).kind == NodeKind::Seeker &&
          !grouped_seekers.contains(upstream))
        groups.push_back(ExecutionGroup{{upstream}, ""});
    }
  }
  return groups;
}

int seeker_cost_class(SeekerKind kind) {
  switch (kind) {
    case SeekerKind::Keyword: return 0;
    case SeekerKind::SC: return 1;
    case SeekerKind::Corr: return 2;
    case SeekerKind::MC: return 3;
  }
  return 4;
}

void rank_group(const PlanGraph& graph, ExecutionGroup& group) {
  std::stable_sort(
      group.seekers.begin(), group.seekers.end(),
      [&graph](const std::string& a, const std::string& b) {
        const PlanNode& na = graph.at(a);
        const PlanNode& nb = graph.at(b);
        const int ca = seeker_cost_class(na.seeker.kind);
        const int cb = seeker_cost_class(nb.seeker.kind);
        if (ca != cb) return ca < cb;
        const std::uint64_t va = query_value_count(na.seeker);
        const std::uint64_t vb = query_value_count(nb.seeker);
        if (va != vb) return va < vb;
        return a < b;
      });
}

SeekerSpec rewrite_restriction(SeekerSpec spec, CombinerKind combiner_kind,
                               const std::vector<std::uint32_t>& prior_tables,
                               bool first_in_group, bool prior_is_subtrahend) {
  if (first_in_group) return spec;
  switch (combiner_kind) {
    case CombinerKind::Intersection:
      spec.restriction = TableRestriction::include(prior_tables);
      break;
    case CombinerKind::Difference:
      // NOT IN pruning is only sound against the set being subtracted.
      if (prior_is_subtrahend)
        spec.restriction = TableRestriction::exclude(prior_tables);
      break;
    case CombinerKind::Union:
    case CombinerKind::Counter:
      break;  // results cannot limit the other seekers' search space
  }
  return spec;
}

ExecReport execute_plan(const PlanGraph& graph, const IndexHandle& index,
                        const ExecOptions& options) {
  graph.validate_or_throw();
  if (graph.has_unresolved_refs())
    throw PlanError("plan has unresolved column references");

  ExecReport report;
  std::unordered_map<std::string, RankedTables> results;

  auto run_one = [&](const PlanNode& node, const TableRestriction& restriction,
                     const std::string& group_name) -> const RankedTables& {
    SeekerSpec spec = node.seeker.to_seeker_spec();
    spec.restriction = restriction;
    SeekStats stats;
    RankedTables out;
    try {
      out = run_seeker(index, spec, &stats);
    } catch (const SeekerError& e) {
      throw ExecError(node.name,
                      "seeker '" + node.name + "': " + e.what());
    }
    ExecStep step;
    step.node = node.name;
    step.group = group_name.empty() ? node.name : group_name;
    step.restriction_mode = restriction.mode;
    step.restriction_size = restriction.tables.size();
    step.rows_scanned = stats.rows_scanned;
    step.result_count = out.size();
    report.steps.push_back(step);
    report.rows_scanned += stats.rows_scanned;
    return results[node.name] = std::move(out);
  };

  auto apply_combiner = [&](const PlanNode& node,
                            const std::vector<RankedTables>& inputs) {
    try {
      results[node.name] = combine(node.combiner, inputs);
    } catch (const CombinerError& e) {
      throw ExecError(node.name,
                      "combiner '" + node.name + "': " + e.what());
    }
  };

  const auto order = topo_order(graph);
  const auto& nodes = graph.nodes();

  if (!options.optimize) {
    // Reference mode: every seeker unrestricted, declaration order.
    for (std::size_t i : order) {
      const PlanNode& node = nodes[i];
      switch (node.kind) {
        case NodeKind::Seeker:
          run_one(node, TableRestriction{}, "");
          if (options.trace)
            *options.trace << step_to_json(report.steps.back()).dump() << "\n";
          break;
        case NodeKind::Combiner: {
          std::vector<RankedTables> inputs;
          for (const auto& upstream : node.inputs)
            inputs.push_back(results.at(upstream));
          apply_combiner(node, inputs);
          break;
        }
        default:
          break;
      }
    }
  } else {
    auto groups = group_plan(graph);
    for (auto& group : groups) {
      rank_group(graph, group);
      if (options.order_override)
        options.order_override(group.combiner, group.seekers);

      GroupTrace trace;
      trace.order = group.seekers;

      if (group.combiner.empty()) {
        // Pass-through: a seeker wired straight to the terminal.
        const PlanNode& seeker = graph.at(group.seekers.front());
        run_one(seeker, TableRestriction{}, "");
        trace.group = seeker.name;
        trace.combiner_kind = "pass-through";
        trace.step_indices.push_back(report.steps.size() - 1);
        if (options.trace) emit_group_trace(*options.trace, trace, report.steps);
        continue;
      }

      const PlanNode& combiner = graph.at(group.combiner);
      const CombinerKind kind = combiner.combiner.kind;
      trace.group = combiner.name;
      trace.combiner_kind = std::string(to_string(kind));

      // Upstream combiner results are already available in topo order.
      std::vector<RankedTables> upstream_results;
      for (const auto& upstream : combiner.inputs)
        if (graph.at(upstream).kind == NodeKind::Combiner)
          upstream_results.push_back(results.at(upstream));

      bool short_circuit =
          kind == CombinerKind::Intersection &&
          std::any_of(upstream_results.begin(), upstream_results.end(),
                      [](const RankedTables& r) { return r.empty(); });

      const std::string subtrahend =
          kind == CombinerKind::Difference && combiner.inputs.size() == 2
              ? combiner.inputs[1]
              : "";

      std::vector<std::uint32_t> prior_tables;
      bool have_prior = false;
      std::vector<RankedTables> executed;  // seeker outputs, execution order

      for (const auto& seeker_name : group.seekers) {
        const PlanNode& seeker = graph.at(seeker_name);
        if (short_circuit) {
          ExecStep step;
          step.node = seeker_name;
          step.group = group.combiner;
          step.skipped = true;
          report.steps.push_back(step);
          results[seeker_name] = {};
          executed.emplace_back();
          trace.step_indices.push_back(report.steps.size() - 1);
          continue;
        }

        TableRestriction restriction;
        if (have_prior) {
          SeekerSpec probe = rewrite_restriction(
              seeker.seeker.to_seeker_spec(), kind, prior_tables,
              /*first_in_group=*/false,
              /*prior_is_subtrahend=*/!subtrahend.empty());
          restriction = probe.restriction;
        }
        const RankedTables& out = run_one(seeker, restriction, group.combiner);
        executed.push_back(out);
        trace.step_indices.push_back(report.steps.size() - 1);

        if (kind == CombinerKind::Intersection) {
          prior_tables = result_tables(out);
          have_prior = true;
          if (out.empty()) short_circuit = true;
        } else if (kind == CombinerKind::Difference &&
                   seeker_name == subtrahend) {
          prior_tables = result_tables(out);
          have_prior = true;
        }
      }

      if (kind == CombinerKind::Intersection && short_circuit) {
        results[combiner.name] = {};
      } else if (kind == CombinerKind::Intersection) {
        // Scores come from the last input, i.e. the final executed seeker.
        std::vector<RankedTables> inputs = upstream_results;
        inputs.insert(inputs.end(), executed.begin(), executed.end());
        apply_combiner(combiner, inputs);
      } else {
        std::vector<RankedTables> inputs;
        for (const auto& upstream : combiner.inputs)
          inputs.push_back(results.at(upstream));
        apply_combiner(combiner, inputs);
      }

      if (options.trace) emit_group_trace(*options.trace, trace, report.steps);
    }
  }

  for (const auto& node : nodes)
    if (node.kind == NodeKind::Terminal)
      report.results = results.at(node.inputs.front());

  if (options.trace) {
    json total;
    total["total_rows_scanned"] = report.rows_scanned;
    *options.trace << total.dump() << "\n";
  }
  return report;
}

}  // namespace blend
