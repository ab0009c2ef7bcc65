// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings. Class ids cross the boundary as plain ints, label sets
// as dicts of doc id -> list of ints, JSON artifacts as Python objects.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "teleclass/annotation.hpp"
#include "teleclass/classifier.hpp"
#include "teleclass/enrichment.hpp"
#include "teleclass/evaluation.hpp"
#include "teleclass/io.hpp"
#include "teleclass/pipeline.hpp"
#include "teleclass/refinement.hpp"

namespace py = pybind11;
using namespace teleclass;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<int> ints(const ClassList& l) {
  std::vector<int> out;
  for (ClassId c : l) out.push_back(static_cast<int>(index_of(c)));
  return out;
}

ClassList ids(const std::vector<int>& v) {
  ClassList out;
  for (int i : v) {
    if (i < 0) throw ValidationError("class ids must be non-negative");
    out.push_back(class_id(static_cast<std::size_t>(i)));
  }
  return out;
}

using PyLabels = std::map<std::string, std::vector<int>>;

LabelSets label_sets(const PyLabels& in) {
  LabelSets out;
  for (const auto& [k, v] : in) out[k] = ids(v);
  return out;
}

ClassId checked(const Taxonomy& t, int c) {
  if (c < 0 || !t.contains(class_id(static_cast<std::size_t>(c))) ||
      t.is_root(class_id(static_cast<std::size_t>(c)))) {
    throw LookupError("unknown class id " + std::to_string(c));
  }
  return class_id(static_cast<std::size_t>(c));
}

std::unique_ptr<Pipeline> make_pipeline(const std::filesystem::path& config,
                                        const std::optional<std::filesystem::path>& workdir,
                                        const std::vector<std::string>& overrides, bool force) {
  Config c = Config::load(config);
  for (const auto& o : overrides) c.apply_override(o);
  if (workdir) c.set("workdir", std::filesystem::absolute(*workdir).string());
  return std::make_unique<Pipeline>(std::move(c), PipelineOptions{force});
}

}  // namespace

PYBIND11_MODULE(_teleclass, m) {
  m.doc() = "Taxonomy-guided weakly supervised text classification";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<PrerequisiteError>(m, "PrerequisiteError", validation.ptr());
  py::register_exception<BackendError>(m, "BackendError", base.ptr());
  py::register_exception<LookupError>(m, "NotFoundError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<Taxonomy>(m, "Taxonomy")
      .def_static("parse", &Taxonomy::parse, py::arg("text"))
      .def_static("load",
                  [](const std::filesystem::path& p) { return Taxonomy::parse(read_file(p)); },
                  py::arg("path"))
      .def_property_readonly("root", [](const Taxonomy& t) { return index_of(t.root()); })
      .def_property_readonly("root_is_synthetic", &Taxonomy::root_is_synthetic)
      .def_property_readonly("classes", [](const Taxonomy& t) { return ints(t.classes()); })
      .def("name", [](const Taxonomy& t, int c) { return t.name(checked(t, c)); })
      .def("find",
           [](const Taxonomy& t, const std::string& name) -> std::optional<int> {
             auto c = t.find(name);
             if (!c || t.is_root(*c)) return std::nullopt;
             return static_cast<int>(index_of(*c));
           })
      .def("parents", [](const Taxonomy& t, int c) { return ints(t.parents(checked(t, c))); })
      .def("children", [](const Taxonomy& t, int c) { return ints(t.children(checked(t, c))); })
      .def("ancestors", [](const Taxonomy& t, int c) { return ints(t.ancestors(checked(t, c))); })
      .def("descendants",
           [](const Taxonomy& t, int c) { return ints(t.descendants(checked(t, c))); })
      .def("levels", [](const Taxonomy& t, int c) { return t.levels(checked(t, c)); })
      .def("label_paths",
           [](const Taxonomy& t) {
             std::vector<std::vector<int>> out;
             for (const auto& p : t.label_paths()) out.push_back(ints(p.nodes));
             return out;
           })
      .def("__len__", [](const Taxonomy& t) { return t.classes().size(); });

  m.def(
      "candidate_search",
      [](const Taxonomy& t, const std::vector<double>& sims, int beam_base, bool per_parent) {
        if (sims.size() < t.node_count() - (t.root_is_synthetic() ? 1 : 0)) {
          throw ValidationError("need one similarity per class id");
        }
        CandidateSearchOptions o{beam_base, per_parent};
        auto r = candidate_search(t, [&](ClassId c) { return sims.at(index_of(c)); }, o);
        return py::make_tuple(ints(r.classes), index_of(r.best));
      },
      py::arg("taxonomy"), py::arg("similarities"), py::arg("beam_base") = 3,
      py::arg("per_parent") = false,
      "Top-down beam search; similarities are indexed by class id. Returns (classes, best).");

  m.def(
      "largest_gap_cut",
      [](const std::vector<double>& scores) {
        auto g = largest_gap_cut(scores);
        return py::make_tuple(g.cut, g.confidence);
      },
      py::arg("scores"), "Cut position and gap of a descending score list.");
  m.def("retained_count", &retained_count, py::arg("n"), py::arg("fraction") = 0.75);

  m.def(
      "bm25_score",
      [](std::size_t target, const std::vector<std::pair<double, double>>& tf_len, double k1,
         double b) {
        std::vector<PseudoDocStats> col;
        for (auto [tf, len] : tf_len) col.push_back({tf, len});
        if (target >= col.size()) throw ValidationError("target out of range");
        return bm25_score(target, col, {k1, b});
      },
      py::arg("target"), py::arg("collection"), py::arg("k1") = 1.2, py::arg("b") = 0.75,
      "collection: list of (term frequency, pseudo-document length).");
  m.def("affinity", &affinity, py::arg("pop"), py::arg("dist"), py::arg("sem"));

  m.def(
      "build_targets",
      [](const Taxonomy& t, const std::vector<int>& core) {
        ClassList c;
        for (int i : core) c.push_back(checked(t, i));
        auto s = build_targets_core(c, t);
        return py::dict(py::arg("positives") = ints(s.positives),
                        py::arg("negatives") = ints(s.negatives),
                        py::arg("unlabeled") = ints(s.unlabeled));
      },
      py::arg("taxonomy"), py::arg("core"));

  m.def(
      "example_f1",
      [](const PyLabels& g, const PyLabels& p) { return example_f1(label_sets(g), label_sets(p)); },
      py::arg("gold"), py::arg("predicted"));
  m.def(
      "precision_at_k",
      [](const PyLabels& g, const PyLabels& r, int k) {
        return precision_at_k(label_sets(g), label_sets(r), k);
      },
      py::arg("gold"), py::arg("rankings"), py::arg("k"));
  m.def(
      "mrr", [](const PyLabels& g, const PyLabels& r) { return mrr(label_sets(g), label_sets(r)); },
      py::arg("gold"), py::arg("rankings"));

  m.attr("STAGES") = [] {
    std::vector<std::string> out;
    for (Stage s : kAllStages) out.emplace_back(to_string(s));
    return out;
  }();

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init(&make_pipeline), py::arg("config"), py::arg("workdir") = py::none(),
           py::arg("overrides") = std::vector<std::string>{}, py::arg("force") = false)
      .def(
          "run_stage",
          [](Pipeline& p, const std::string& name) {
            auto s = stage_from_string(name);
            if (!s) throw ValidationError("unknown stage \"" + name + "\"");
            StageOutcome o;
            {
              py::gil_scoped_release release;
              o = p.run_stage(*s);
            }
            return py::dict(py::arg("stage") = name, py::arg("skipped") = o.skipped,
                            py::arg("seconds") = o.seconds, py::arg("warnings") = o.warnings);
          },
          py::arg("stage"))
      .def("run_all",
           [](Pipeline& p) {
             Json report;
             {
               py::gil_scoped_release release;
               report = p.run_all();
             }
             return to_python(report);
           })
      .def("write_vector_keys", &Pipeline::write_vector_keys)
      .def("manifest", [](const Pipeline& p) { return to_python(p.manifest()); })
      .def_property_readonly("workdir", &Pipeline::workdir);
}
