#include "blend/plan.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "blend/csv.hpp"
#include "json.hpp"

namespace blend {

using nlohmann::json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Input: return "input";
    case NodeKind::Seeker: return "seeker";
    case NodeKind::Combiner: return "combiner";
    case NodeKind::Terminal: return "terminal";
  }
  return "?";
}

ColumnSource ColumnSource::inline_values(std::vector<std::string> values) {
  ColumnSource source;
  source.values = std::move(values);
  return source;
}

ColumnSource ColumnSource::reference(std::string ref) {
  ColumnSource source;
  source.ref = std::move(ref);
  return source;
}

SeekerSpec SeekerNodeSpec::to_seeker_spec() const {
  SeekerSpec spec;
  spec.kind = kind;
  spec.k = k;
  spec.sample_size = sample_size;
  spec.min_support = min_support;
  for (const auto& column : columns) {
    if (column.is_ref())
      throw PlanError("unresolved column reference: " + column.ref);
    spec.query_columns.push_back(column.values);
  }
  return spec;
}

const PlanNode* PlanGraph::find(std::string_view name) const {
  for (const auto& node : nodes_)
    if (node.name == name) return &node;
  return nullptr;
}

const PlanNode& PlanGraph::at(std::string_view name) const {
  const PlanNode* node = find(name);
  if (!node) throw PlanError("unknown node: " + std::string(name));
  return *node;
}

void PlanGraph::add(PlanNode node) {
  if (find(node.name)) throw PlanError("duplicate name: " + node.name);
  for (const auto& upstream : node.inputs)
    if (!find(upstream)) throw PlanError("unknown upstream: " + upstream);
  nodes_.push_back(std::move(node));
}

void PlanGraph::add(std::string name, PlanNode node,
                    std::vector<std::string> upstream) {
  node.name = std::move(name);
  node.inputs = std::move(upstream);
  add(std::move(node));
}

PlanGraph PlanGraph::from_nodes(std::vector<PlanNode> nodes) {
  PlanGraph graph;
  graph.nodes_ = std::move(nodes);
  return graph;
}

std::vector<std::string> PlanGraph::validate() const {
  std::vector<std::string> errors;
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (!by_name.emplace(node.name, i).second)
      errors.push_back("duplicate name: " + node.name);
  }

  std::size_t inputs = 0, terminals = 0;
  for (const auto& node : nodes_) {
    if (node.kind == NodeKind::Input) ++inputs;
    if (node.kind == NodeKind::Terminal) ++terminals;
    for (const auto& upstream : node.inputs)
      if (!by_name.contains(upstream))
        errors.push_back("node '" + node.name + "': unknown upstream: " +
                         upstream);
  }
  if (inputs == 0) errors.push_back("plan has no input node");
  if (terminals != 1)
    errors.push_back("plan must have exactly one terminal, found " +
                     std::to_string(terminals));
  if (!errors.empty()) return errors;  // the structural checks need valid edges

  for (const auto& node : nodes_) {
    switch (node.kind) {
      case NodeKind::Input:
        if (!node.inputs.empty())
          errors.push_back("input '" + node.name + "' cannot have upstreams");
        break;
      case NodeKind::Seeker: {
        if (node.inputs.size() != 1 ||
            at(node.inputs[0]).kind != NodeKind::Input)
          errors.push_back("seeker '" + node.name +
                           "' must read from exactly one input node");
        if (node.seeker.k < 1)
          errors.push_back("seeker '" + node.name + "': k must be positive");
        const std::size_t arity = node.seeker.columns.size();
        switch (node.seeker.kind) {
          case SeekerKind::SC:
          case SeekerKind::Keyword:
            if (arity != 1)
              errors.push_back("seeker '" + node.name +
                               "' takes exactly one query column");
            break;
          case SeekerKind::MC:
            if (arity < 2)
              errors.push_back("seeker '" + node.name +
                               "' requires at least two query columns");
            break;
          case SeekerKind::Corr:
            if (arity != 2)
              errors.push_back("seeker '" + node.name +
                               "' takes key and target columns");
            break;
        }
        break;
      }
      case NodeKind::Combiner: {
        if (node.combiner.k < 1)
          errors.push_back("combiner '" + node.name + "': k must be positive");
        std::size_t arity = node.inputs.size();
        for (const auto& upstream : node.inputs) {
          const auto kind = at(upstream).kind;
          if (kind != NodeKind::Seeker && kind != NodeKind::Combiner)
            errors.push_back("combiner '" + node.name +
                             "' can only consume seekers or combiners");
        }
        switch (node.combiner.kind) {
          case CombinerKind::Intersection:
          case CombinerKind::Union:
            if (arity < 2)
              errors.push_back("combiner '" + node.name +
                               "' requires at least two inputs");
            break;
          case CombinerKind::Difference:
            if (arity != 2)
              errors.push_back("combiner '" + node.name +
                               "' requires exactly two inputs");
            break;
          case CombinerKind::Counter:
            if (arity < 1)
              errors.push_back("combiner '" + node.name +
                               "' requires at least one input");
            break;
        }
        break;
      }
      case NodeKind::Terminal:
        if (node.inputs.size() != 1 ||
            (at(node.inputs[0]).kind != NodeKind::Seeker &&
             at(node.inputs[0]).kind != NodeKind::Combiner))
          errors.push_back("terminal '" + node.name +
                           "' must read from exactly one seeker or combiner");
        break;
    }
  }

  // Cycle check (DFS over name edges).
  enum class Mark { White, Grey, Black };
  std::vector<Mark> marks(nodes_.size(), Mark::White);
  bool cyclic = false;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (marks[i] == Mark::Black || cyclic) return;
    if (marks[i] == Mark::Grey) {
      cyclic = true;
      return;
    }
    marks[i] = Mark::Grey;
    for (const auto& upstream : nodes_[i].inputs) visit(by_name.at(upstream));
    marks[i] = Mark::Black;
  };
  for (std::size_t i = 0; i < nodes_.size() && !cyclic; ++i) visit(i);
  if (cyclic) {
    errors.push_back("plan contains a cycle");
    return errors;
  }

  // Terminal reachable from every seeker/combiner; seekers fed by inputs.
  std::vector<std::vector<std::size_t>> downstream(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (const auto& upstream : nodes_[i].inputs)
      downstream[by_name.at(upstream)].push_back(i);
  std::vector<bool> reaches_terminal(nodes_.size(), false);
  std::function<bool(std::size_t)> reaches = [&](std::size_t i) -> bool {
    if (nodes_[i].kind == NodeKind::Terminal) return true;
    if (reaches_terminal[i]) return true;
    for (std::size_t next : downstream[i])
      if (reaches(next)) return reaches_terminal[i] = true;
    return false;
  };
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if ((node.kind == NodeKind::Seeker || node.kind == NodeKind::Combiner) &&
        !reaches(i))
      errors.push_back("node '" + node.name + "' cannot reach the terminal");
  }
  return errors;
}

void PlanGraph::validate_or_throw() const {
  const auto errors = validate();
  if (errors.empty()) return;
  std::string message = "invalid plan:";
  for (const auto& error : errors) message += "\n  " + error;
  throw PlanError(message);
}

void PlanGraph::resolve_refs(const std::filesystem::path& base_dir) {
  for (auto& node : nodes_) {
    if (node.kind != NodeKind::Seeker) continue;
    for (auto& column : node.seeker.columns) {
      if (!column.is_ref()) continue;
      column.values = load_column_ref(column.ref, base_dir);
      column.ref.clear();
    }
  }
}

bool PlanGraph::has_unresolved_refs() const {
  for (const auto& node : nodes_)
    if (node.kind == NodeKind::Seeker)
      for (const auto& column : node.seeker.columns)
        if (column.is_ref()) return true;
  return false;
}

PlanNode make_input() {
  PlanNode node;
  node.kind = NodeKind::Input;
  return node;
}

PlanNode make_terminal() {
  PlanNode node;
  node.kind = NodeKind::Terminal;
  return node;
}

PlanNode make_seeker(SeekerNodeSpec spec) {
  PlanNode node;
  node.kind = NodeKind::Seeker;
  node.seeker = std::move(spec);
  return node;
}

PlanNode make_combiner(CombinerKind kind, std::uint32_t k) {
  PlanNode node;
  node.kind = NodeKind::Combiner;
  node.combiner = CombinerSpec{kind, k};
  return node;
}

namespace {

PlanGraph single_seeker_plan(SeekerNodeSpec spec, std::string seeker_name) {
  PlanGraph graph;
  graph.add("input", make_input(), {});
  graph.add(seeker_name, make_seeker(std::move(spec)), {"input"});
  graph.add("terminal", make_terminal(), {std::move(seeker_name)});
  graph.validate_or_throw();
  return graph;
}

}  // namespace

PlanGraph build_join_plan(ColumnSource column, std::uint32_t k) {
  SeekerNodeSpec spec;
  spec.kind = SeekerKind::SC;
  spec.k = k;
  spec.columns = {std::move(column)};
  return single_seeker_plan(std::move(spec), "sc");
}

PlanGraph build_keyword_plan(ColumnSource column, std::uint32_t k) {
  SeekerNodeSpec spec;
  spec.kind = SeekerKind::Keyword;
  spec.k = k;
  spec.columns = {std::move(column)};
  return single_seeker_plan(std::move(spec), "keyword");
}

PlanGraph build_mc_join_plan(std::vector<ColumnSource> columns,
                             std::uint32_t k) {
  SeekerNodeSpec spec;
  spec.kind = SeekerKind::MC;
  spec.k = k;
  spec.columns = std::move(columns);
  return single_seeker_plan(std::move(spec), "mc");
}

PlanGraph build_corr_plan(ColumnSource key, ColumnSource target,
                          std::uint32_t k,
                          std::optional<std::uint32_t> sample_size,
                          std::uint32_t min_support) {
  SeekerNodeSpec spec;
  spec.kind = SeekerKind::Corr;
  spec.k = k;
  spec.columns = {std::move(key), std::move(target)};
  spec.sample_size = sample_size;
  spec.min_support = min_support;
  return single_seeker_plan(std::move(spec), "corr");
}

PlanGraph build_union_plan(const TableData& table, std::uint32_t k,
                           std::uint32_t k_prime) {
  if (k_prime == 0)
    k_prime = k > kUnlimitedK / 10 ? kUnlimitedK : 10 * k;
  PlanGraph graph;
  graph.add("input", make_input(), {});
  std::vector<std::string> seeker_names;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& column = table.columns[c];
    const bool usable = std::any_of(
        column.begin(), column.end(), [](const std::string& v) {
          return !normalize_text(v, NormalizePolicy::Exact).empty();
        });
    if (!usable) continue;  // an empty SC query is an error, skip the column
    SeekerNodeSpec spec;
    spec.kind = SeekerKind::SC;
    spec.k = k_prime;
    spec.columns = {ColumnSource::inline_values(column)};
    std::string name = "col" + std::to_string(c);
    graph.add(name, make_seeker(std::move(spec)), {"input"});
    seeker_names.push_back(std::move(name));
  }
  if (seeker_names.empty())
    throw PlanError("union plan needs at least one non-empty column");
  graph.add("counter", make_combiner(CombinerKind::Counter, k), seeker_names);
  graph.add("terminal", make_terminal(), {"counter"});
  graph.validate_or_throw();
  return graph;
}

PlanGraph build_augmentation_plan(std::vector<ColumnSource> example_columns,
                                  ColumnSource query_column, std::uint32_t k) {
  if (example_columns.size() < 2)
    throw PlanError("augmentation requires at least two example columns");
  PlanGraph graph;
  graph.add("input", make_input(), {});
  SeekerNodeSpec examples;
  examples.kind = SeekerKind::MC;
  examples.k = k;
  examples.columns = std::move(example_columns);
  graph.add("example", make_seeker(std::move(examples)), {"input"});
  SeekerNodeSpec query;
  query.kind = SeekerKind::SC;
  query.k = k;
  query.columns = {std::move(query_column)};
  graph.add("query", make_seeker(std::move(query)), {"input"});
  graph.add("combiner", make_combiner(CombinerKind::Intersection, k),
            {"example", "query"});
  graph.add("terminal", make_terminal(), {"combiner"});
  graph.validate_or_throw();
  return graph;
}

namespace {

json column_source_to_json(const ColumnSource& source) {
  if (source.is_ref()) return source.ref;
  return source.values;
}

ColumnSource column_source_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return ColumnSource::reference(j.get<std::string>());
  if (j.is_array()) {
    std::vector<std::string> values;
    for (const auto& v : j) {
      if (!v.is_string())
        throw PlanError(where + ": column values must be strings");
      values.push_back(v.get<std::string>());
    }
    return ColumnSource::inline_values(std::move(values));
  }
  throw PlanError(where + ": expected a value array or a \"file:column\" ref");
}

std::uint32_t k_from_params(const json& params, const std::string& where) {
  if (!params.contains("k")) throw PlanError(where + ": missing k");
  const auto& k = params.at("k");
  if (!k.is_number_unsigned() || k.get<std::uint64_t>() == 0)
    throw PlanError(where + ": k must be a positive integer");
  return static_cast<std::uint32_t>(
      std::min<std::uint64_t>(k.get<std::uint64_t>(), kUnlimitedK));
}

}  // namespace

PlanGraph parse_plan_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PlanError(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("nodes") ||
      !root.at("nodes").is_array())
    throw PlanError("plan must be an object with a \"nodes\" array");

  std::vector<PlanNode> nodes;
  std::size_t i = 0;
  for (const auto& jnode : root.at("nodes")) {
    const std::string where = "nodes[" + std::to_string(i++) + "]";
    if (!jnode.is_object()) throw PlanError(where + ": must be an object");
    PlanNode node;
    if (!jnode.contains("name") || !jnode.at("name").is_string())
      throw PlanError(where + ".name: must be a string");
    node.name = jnode.at("name").get<std::string>();
    if (node.name.empty()) throw PlanError(where + ".name: must be non-empty");

    const std::string kind = jnode.value("kind", "");
    const json params = jnode.value("params", json::object());
    if (jnode.contains("inputs")) {
      if (!jnode.at("inputs").is_array())
        throw PlanError(where + ".inputs: must be an array of node names");
      for (const auto& input : jnode.at("inputs")) {
        if (!input.is_string())
          throw PlanError(where + ".inputs: must be an array of node names");
        node.inputs.push_back(input.get<std::string>());
      }
    }

    if (kind == "input") {
      node.kind = NodeKind::Input;
    } else if (kind == "terminal") {
      node.kind = NodeKind::Terminal;
    } else if (kind == "seeker") {
      node.kind = NodeKind::Seeker;
      const auto seeker_kind =
          seeker_kind_from_string(jnode.value("seeker", ""));
      if (!seeker_kind)
        throw PlanError(where + ".seeker: unknown seeker kind '" +
                        jnode.value("seeker", "") + "'");
      node.seeker.kind = *seeker_kind;
      node.seeker.k = k_from_params(params, where + ".params");
      switch (*seeker_kind) {
        case SeekerKind::SC:
        case SeekerKind::Keyword:
          if (!params.contains("column"))
            throw PlanError(where + ".params: missing column");
          node.seeker.columns = {column_source_from_json(
              params.at("column"), where + ".params.column")};
          break;
        case SeekerKind::MC: {
          if (!params.contains("columns") || !params.at("columns").is_array())
            throw PlanError(where + ".params: missing columns array");
          for (const auto& column : params.at("columns"))
            node.seeker.columns.push_back(column_source_from_json(
                column, where + ".params.columns"));
          break;
        }
        case SeekerKind::Corr: {
          for (const char* field : {"key", "target"}) {
            if (!params.contains(field))
              throw PlanError(where + ".params: missing " + std::string(field));
            node.seeker.columns.push_back(column_source_from_json(
                params.at(field), where + ".params." + field));
          }
          if (params.contains("h")) {
            const auto& h = params.at("h");
            if (!h.is_number_unsigned())
              throw PlanError(where +
                              ".params.h: must be a non-negative integer "
                              "(0 = unlimited)");
            const auto value = h.get<std::uint64_t>();
            node.seeker.sample_size =
                value == 0 ? std::nullopt
                           : std::optional<std::uint32_t>(
                                 static_cast<std::uint32_t>(value));
          }
          if (params.contains("m")) {
            const auto& m = params.at("m");
            if (!m.is_number_unsigned())
              throw PlanError(where + ".params.m: must be a non-negative integer");
            node.seeker.min_support =
                static_cast<std::uint32_t>(m.get<std::uint64_t>());
          }
          break;
        }
      }
    } else if (kind == "combiner") {
      node.kind = NodeKind::Combiner;
      const auto combiner_kind =
          combiner_kind_from_string(jnode.value("combiner", ""));
      if (!combiner_kind)
        throw PlanError(where + ".combiner: unknown combiner kind '" +
                        jnode.value("combiner", "") + "'");
      node.combiner.kind = *combiner_kind;
      node.combiner.k = k_from_params(params, where + ".params");
    } else {
      throw PlanError(where + ".kind: unknown kind '" + kind + "'");
    }
    nodes.push_back(std::move(node));
  }

  PlanGraph graph = PlanGraph::from_nodes(std::move(nodes));
  graph.validate_or_throw();
  return graph;
}

std::string serialize_plan(const PlanGraph& graph) {
  json jnodes = json::array();
  for (const auto& node : graph.nodes()) {
    json j;
    j["name"] = node.name;
    j["kind"] = std::string(to_string(node.kind));
    j["inputs"] = node.inputs;
    if (node.kind == NodeKind::Seeker) {
      j["seeker"] = std::string(to_string(node.seeker.kind));
      json params;
      params["k"] = node.seeker.k;
      switch (node.seeker.kind) {
        case SeekerKind::SC:
        case SeekerKind::Keyword:
          params["column"] = column_source_to_json(node.seeker.columns.at(0));
          break;
        case SeekerKind::MC: {
          json columns = json::array();
          for (const auto& column : node.seeker.columns)
            columns.push_back(column_source_to_json(column));
          params["columns"] = columns;
          break;
        }
        case SeekerKind::Corr:
          params["key"] = column_source_to_json(node.seeker.columns.at(0));
          params["target"] = column_source_to_json(node.seeker.columns.at(1));
          params["h"] = node.seeker.sample_size.value_or(0);
          params["m"] = node.seeker.min_support;
          break;
      }
      j["params"] = params;
    } else if (node.kind == NodeKind::Combiner) {
      j["combiner"] = std::string(to_string(node.combiner.kind));
      j["params"] = json{{"k", node.combiner.k}};
    }
    jnodes.push_back(std::move(j));
  }
  json root;
  root["nodes"] = jnodes;
  return root.dump(2) + "\n";
}

std::vector<std::string> load_column_ref(const std::string& ref,
                                         const std::filesystem::path& base_dir) {
  const auto colon = ref.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == ref.size())
    throw PlanError("bad column reference (want path.csv:Column): " + ref);
  const std::string path = ref.substr(0, colon);
  const std::string column = ref.substr(colon + 1);

  CsvTable csv;
  try {
    csv = read_csv_file(base_dir / path);
  } catch (const CsvError& e) {
    throw PlanError("cannot read " + ref + ": " + e.what());
  }
  const auto it = std::find(csv.header.begin(), csv.header.end(), column);
  if (it == csv.header.end())
    throw PlanError("column '" + column + "' not found in " + path);
  const auto c = static_cast<std::size_t>(it - csv.header.begin());
  std::vector<std::string> values;
  values.reserve(csv.rows.size());
  for (const auto& row : csv.rows)
    values.push_back(c < row.size() ? row[c] : std::string());
  return values;
}

TableData load_table_csv(const std::filesystem::path& path) {
  CsvTable csv;
  try {
    csv = read_csv_file(path);
  } catch (const CsvError& e) {
    throw PlanError("cannot read " + path.string() + ": " + e.what());
  }
  TableData table;
  table.column_names = csv.header;
  table.columns.resize(csv.header.size());
  for (const auto& row : csv.rows)
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      table.columns[c].push_back(c < row.size() ? row[c] : std::string());
  return table;
}

}  // namespace blend
