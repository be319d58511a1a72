#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>

#include "blend/executor.hpp"
#include "blend/index.hpp"
#include "blend/plan.hpp"
#include "blend/seekers.hpp"

namespace py = pybind11;
using namespace blend;

namespace {

using IndexPtr = std::shared_ptr<IndexHandle>;

std::optional<std::uint32_t> sample_from(std::uint32_t h) {
  return h == 0 ? std::nullopt : std::optional<std::uint32_t>(h);
}

py::dict detail_dict(const RankedEntry& entry) {
  py::dict d;
  if (entry.detail.qcr) {
    d["key_column"] = entry.detail.columns.at(0);
    d["num_column"] = entry.detail.columns.at(1);
    d["qcr"] = *entry.detail.qcr;
  } else if (entry.detail.columns.size() == 1) {
    d["column"] = entry.detail.columns[0];
  } else if (entry.detail.columns.size() > 1) {
    d["columns"] = entry.detail.columns;
  }
  return d;
}

py::list results_list(const IndexHandle& index, const RankedTables& results) {
  py::list out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& entry = results[i];
    py::dict d;
    d["rank"] = i + 1;
    d["table_id"] = entry.table_id;
    d["table_path"] = index.catalog().at(entry.table_id).path;
    d["score"] = entry.score;
    d["detail"] = detail_dict(entry);
    out.append(std::move(d));
  }
  return out;
}

SeekerSpec direct_spec(SeekerKind kind,
                       std::vector<std::vector<std::string>> columns,
                       std::uint32_t k) {
  SeekerSpec spec;
  spec.kind = kind;
  spec.query_columns = std::move(columns);
  spec.k = k;
  return spec;
}

// A plan element before it gets a name and upstream wiring.
struct Element {
  PlanNode node;
};

Element seeker_element(SeekerKind kind, std::vector<std::vector<std::string>> columns,
                       std::uint32_t k) {
  SeekerNodeSpec spec;
  spec.kind = kind;
  spec.k = k;
  for (auto& column : columns)
    spec.columns.push_back(ColumnSource::inline_values(std::move(column)));
  return Element{make_seeker(std::move(spec))};
}

struct PyPlan {
  PlanGraph graph;

  void add(const std::string& name, const Element& element,
           std::vector<std::string> inputs) {
    graph.add(name, element.node, std::move(inputs));
  }

  py::list run(const IndexPtr& index, bool optimize) {
    ExecOptions options;
    options.optimize = optimize;
    const auto report = execute_plan(graph, *index, options);
    return results_list(*index, report.results);
  }

  py::tuple run_report(const IndexPtr& index, bool optimize) {
    ExecOptions options;
    options.optimize = optimize;
    const auto report = execute_plan(graph, *index, options);
    return py::make_tuple(results_list(*index, report.results),
                          report.rows_scanned);
  }
};

TableData table_from_columns(std::vector<std::vector<std::string>> columns,
                             std::vector<std::string> names) {
  TableData table;
  if (names.empty())
    for (std::size_t c = 0; c < columns.size(); ++c)
      names.push_back("c" + std::to_string(c));
  table.column_names = std::move(names);
  table.columns = std::move(columns);
  return table;
}

std::vector<ColumnSource> sources_of(std::vector<std::vector<std::string>> columns) {
  std::vector<ColumnSource> out;
  for (auto& column : columns)
    out.push_back(ColumnSource::inline_values(std::move(column)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Composable top-K data discovery over an indexed CSV lake";

  py::register_exception<PlanError>(m, "PlanError", PyExc_ValueError);
  py::register_exception<SeekerError>(m, "SeekerError", PyExc_ValueError);
  py::register_exception<blend::IndexError>(m, "IndexStoreError", PyExc_RuntimeError);

  m.def(
      "build_index",
      [](const std::string& lake_dir, const std::string& out_dir,
         const std::string& normalize, bool force) {
        const auto policy = normalize_policy_from_string(normalize);
        if (!policy) throw PlanError("unknown normalization policy: " + normalize);
        namespace fs = std::filesystem;
        if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
          if (!force)
            throw blend::IndexError("index exists at " + out_dir +
                              " (pass force=True to rebuild)");
          fs::remove_all(out_dir);
        }
        std::vector<std::string> warnings;
        const auto index =
            IndexHandle::build_from_dir(lake_dir, *policy, &warnings);
        index.save(out_dir);
        py::dict summary;
        summary["tables"] = index.table_count();
        summary["cells"] = index.cell_count();
        summary["signatures"] = index.signature_count();
        summary["warnings"] = warnings;
        return summary;
      },
      py::arg("lake_dir"), py::arg("out_dir"), py::arg("normalize") = "lower",
      py::arg("force") = false, "Index a directory of CSV files.");

  py::class_<IndexHandle, IndexPtr>(m, "Index")
      .def(py::init([](const std::string& dir) {
             return std::make_shared<IndexHandle>(IndexHandle::load(dir));
           }),
           py::arg("path"))
      .def_property_readonly("table_count", &IndexHandle::table_count)
      .def_property_readonly("cell_count", &IndexHandle::cell_count)
      .def_property_readonly("signature_count", &IndexHandle::signature_count)
      .def("table_path",
           [](const IndexHandle& index, std::uint32_t table_id) {
             return index.catalog().at(table_id).path;
           })
      .def("dump",
           [](const IndexHandle& index) { return index.dump_canonical(); },
           "Canonical relation dump as CSV text.")
      .def(
          "seek_sc",
          [](const IndexPtr& index, std::vector<std::string> values,
             std::uint32_t k) {
            return results_list(
                *index, seek_sc(*index, direct_spec(SeekerKind::SC,
                                                    {std::move(values)}, k)));
          },
          py::arg("values"), py::arg("k") = 10)
      .def(
          "seek_keyword",
          [](const IndexPtr& index, std::vector<std::string> values,
             std::uint32_t k) {
            return results_list(
                *index,
                seek_keyword(*index, direct_spec(SeekerKind::Keyword,
                                                 {std::move(values)}, k)));
          },
          py::arg("values"), py::arg("k") = 10)
      .def(
          "seek_mc",
          [](const IndexPtr& index, std::vector<std::vector<std::string>> columns,
             std::uint32_t k) {
            return results_list(
                *index,
                seek_mc(*index, direct_spec(SeekerKind::MC, std::move(columns), k)));
          },
          py::arg("columns"), py::arg("k") = 10)
      .def(
          "seek_corr",
          [](const IndexPtr& index, std::vector<std::string> key,
             std::vector<std::string> target, std::uint32_t k, std::uint32_t h,
             std::uint32_t m) {
            auto spec = direct_spec(SeekerKind::Corr,
                                    {std::move(key), std::move(target)}, k);
            spec.sample_size = sample_from(h);
            spec.min_support = m;
            return results_list(*index, seek_corr(*index, spec));
          },
          py::arg("key"), py::arg("target"), py::arg("k") = 10,
          py::arg("h") = kDefaultSampleSize, py::arg("m") = kDefaultMinSupport);

  py::class_<Element>(m, "Element");

  m.def("Input", [] { return Element{make_input()}; },
        "Plan input marker element.");
  m.def("Terminal", [] { return Element{make_terminal()}; },
        "Plan terminal marker element.");

  struct SeekersNS {};
  py::class_<SeekersNS>(m, "Seekers")
      .def_static(
          "SC",
          [](std::vector<std::string> values, std::uint32_t k) {
            return seeker_element(SeekerKind::SC, {std::move(values)}, k);
          },
          py::arg("values"), py::arg("k") = 10)
      .def_static(
          "Keyword",
          [](std::vector<std::string> values, std::uint32_t k) {
            return seeker_element(SeekerKind::Keyword, {std::move(values)}, k);
          },
          py::arg("values"), py::arg("k") = 10)
      .def_static(
          "MC",
          [](std::vector<std::vector<std::string>> columns, std::uint32_t k) {
            return seeker_element(SeekerKind::MC, std::move(columns), k);
          },
          py::arg("columns"), py::arg("k") = 10)
      .def_static(
          "Corr",
          [](std::vector<std::string> key, std::vector<std::string> target,
             std::uint32_t k, std::uint32_t h, std::uint32_t m) {
            auto element = seeker_element(
                SeekerKind::Corr, {std::move(key), std::move(target)}, k);
            element.node.seeker.sample_size = sample_from(h);
            element.node.seeker.min_support = m;
            return element;
          },
          py::arg("key"), py::arg("target"), py::arg("k") = 10,
          py::arg("h") = kDefaultSampleSize, py::arg("m") = kDefaultMinSupport);

  struct CombinersNS {};
  py::class_<CombinersNS>(m, "Combiners")
      .def_static("Intersection",
                  [](std::uint32_t k) {
                    return Element{make_combiner(CombinerKind::Intersection, k)};
                  },
                  py::arg("k") = 10)
      .def_static("Union",
                  [](std::uint32_t k) {
                    return Element{make_combiner(CombinerKind::Union, k)};
                  },
                  py::arg("k") = 10)
      .def_static("Difference",
                  [](std::uint32_t k) {
                    return Element{make_combiner(CombinerKind::Difference, k)};
                  },
                  py::arg("k") = 10)
      .def_static("Counter",
                  [](std::uint32_t k) {
                    return Element{make_combiner(CombinerKind::Counter, k)};
                  },
                  py::arg("k") = 10);

  py::class_<PyPlan>(m, "Plan")
      .def(py::init<>())
      .def("add", &PyPlan::add, py::arg("name"), py::arg("element"),
           py::arg("inputs") = std::vector<std::string>{},
           "Insert a named element wired to the given upstream elements.")
      .def("run", &PyPlan::run, py::arg("index"), py::arg("optimize") = true,
           "Execute against an index; returns ranked result dicts.")
      .def("run_report", &PyPlan::run_report, py::arg("index"),
           py::arg("optimize") = true,
           "Like run(), also returning the number of index rows scanned.")
      .def("validate",
           [](const PyPlan& plan) { return plan.graph.validate(); })
      .def("to_json",
           [](const PyPlan& plan) { return serialize_plan(plan.graph); })
      .def_static("from_json", [](const std::string& text) {
        PyPlan plan;
        plan.graph = parse_plan_json(text);
        return plan;
      });

  m.def(
      "join_plan",
      [](std::vector<std::string> values, std::uint32_t k) {
        PyPlan plan;
        plan.graph = build_join_plan(
            ColumnSource::inline_values(std::move(values)), k);
        return plan;
      },
      py::arg("values"), py::arg("k") = 10);
  m.def(
      "mc_join_plan",
      [](std::vector<std::vector<std::string>> columns, std::uint32_t k) {
        PyPlan plan;
        plan.graph = build_mc_join_plan(sources_of(std::move(columns)), k);
        return plan;
      },
      py::arg("columns"), py::arg("k") = 10);
  m.def(
      "corr_plan",
      [](std::vector<std::string> key, std::vector<std::string> target,
         std::uint32_t k, std::uint32_t h, std::uint32_t m) {
        PyPlan plan;
        plan.graph = build_corr_plan(
            ColumnSource::inline_values(std::move(key)),
            ColumnSource::inline_values(std::move(target)), k, sample_from(h), m);
        return plan;
      },
      py::arg("key"), py::arg("target"), py::arg("k") = 10,
      py::arg("h") = kDefaultSampleSize, py::arg("m") = kDefaultMinSupport);
  m.def(
      "union_plan",
      [](std::vector<std::vector<std::string>> columns, std::uint32_t k,
         std::uint32_t k_prime, std::vector<std::string> names) {
        PyPlan plan;
        plan.graph = build_union_plan(
            table_from_columns(std::move(columns), std::move(names)), k, k_prime);
        return plan;
      },
      py::arg("columns"), py::arg("k") = 10, py::arg("k_prime") = 0,
      py::arg("names") = std::vector<std::string>{});
  m.def(
      "augmentation_plan",
      [](std::vector<std::vector<std::string>> examples,
         std::vector<std::string> query, std::uint32_t k) {
        PyPlan plan;
        plan.graph = build_augmentation_plan(
            sources_of(std::move(examples)),
            ColumnSource::inline_values(std::move(query)), k);
        return plan;
      },
      py::arg("examples"), py::arg("query"), py::arg("k") = 10);
}
