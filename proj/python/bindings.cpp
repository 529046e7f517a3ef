#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <memory>
#include <optional>

#include "spikekg/checkpoint.hpp"
#include "spikekg/config.hpp"
#include "spikekg/error.hpp"
#include "spikekg/eval.hpp"
#include "spikekg/neuron.hpp"
#include "spikekg/scoring.hpp"
#include "spikekg/spiketrain.hpp"
#include "spikekg/train.hpp"

namespace py = pybind11;
using namespace spikekg;

namespace {

// A model together with the vocabularies that name its rows.
struct PyModel {
  std::shared_ptr<Model> model;
  Vocabulary entities;
  Vocabulary relations;
  std::string dataset;

  Triple triple(const std::string& s, const std::string& p, const std::string& o) const {
    return {entities.at(s), relations.at(p), entities.at(o)};
  }
};

py::dict report_dict(const RankReport& r) {
  py::dict d;
  d["mrr"] = r.mrr;
  d["hits1"] = r.hits1;
  d["hits3"] = r.hits3;
  d["hits10"] = r.hits10;
  d["size"] = r.size();
  return d;
}

const std::vector<Triple>& split_of(const KnowledgeGraph& kg, const std::string& split) {
  if (split == "train") return kg.train;
  if (split == "valid") return kg.valid;
  if (split == "test") return kg.test;
  throw ConfigError("split must be train, valid or test");
}

py::tuple triple_tuple(const Triple& t) { return py::make_tuple(t.subject, t.predicate, t.object); }

}  // namespace

PYBIND11_MODULE(_spikekg, m) {
  m.doc() = "Spike-train knowledge graph embeddings";

  auto base = py::register_exception<Error>(m, "SpikekgError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<VocabError>(m, "VocabError", base.ptr());

  m.def(
      "spike_times",
      [](const std::vector<double>& params, const std::string& mode, double tau_ref) {
        return spike_train_from_params(params, parse_norm_mode(mode), tau_ref);
      },
      py::arg("params"), py::arg("mode") = "normalized", py::arg("tau_ref") = 0.0,
      "Spike times from ISI parameters.");

  m.def(
      "score",
      [](const std::string& kind, const std::vector<double>& ts, const std::vector<double>& to,
         const std::vector<double>& delta) {
        return score_spike(parse_score_kind(kind), ts, to, delta);
      },
      py::arg("kind"), py::arg("ts"), py::arg("to"), py::arg("delta"));

  m.def(
      "solve_interval",
      [](const std::vector<double>& weights, const std::vector<double>& input_times,
         double threshold, double tau_s) -> std::optional<double> {
        NeuronConfig cfg;
        cfg.threshold = threshold;
        cfg.tau_s = tau_s;
        cfg.input_size = input_times.size();
        const InputPopulation pop(input_times, tau_s);
        // weights follow the caller's input order; the population sorts times
        std::vector<std::size_t> order(input_times.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return input_times[a] < input_times[b]; });
        std::vector<double> w(weights.size());
        if (weights.size() != order.size()) throw DimensionError("one weight per input spike");
        for (std::size_t i = 0; i < order.size(); ++i) w[i] = weights[order[i]];
        auto sol = solve_interval(w, pop, cfg);
        if (!sol) return std::nullopt;
        return sol->interval;
      },
      py::arg("weights"), py::arg("input_times"), py::arg("threshold") = 1.0,
      py::arg("tau_s") = 0.5, "Time of the first threshold crossing, or None.");

  m.def(
      "isi_statistics",
      [](const std::vector<std::vector<double>>& trains, double tau_ref) {
        const auto st = isi_statistics(trains, tau_ref);
        py::dict d;
        d["mean"] = st.mean;
        d["std"] = st.std_dev;
        d["cv"] = st.cv;
        d["cv_uncorrected"] = st.cv_uncorrected;
        d["count"] = st.isis.size();
        return d;
      },
      py::arg("trains"), py::arg("tau_ref") = 0.0);

  py::class_<KnowledgeGraph, std::shared_ptr<KnowledgeGraph>>(m, "KnowledgeGraph")
      .def_property_readonly("name", [](const KnowledgeGraph& kg) { return kg.name; })
      .def_property_readonly("num_entities", &KnowledgeGraph::num_entities)
      .def_property_readonly("num_relations", &KnowledgeGraph::num_relations)
      .def("entity_labels", [](const KnowledgeGraph& kg) { return kg.entities.labels(); })
      .def("relation_labels", [](const KnowledgeGraph& kg) { return kg.relations.labels(); })
      .def("triples",
           [](const KnowledgeGraph& kg, const std::string& split) {
             py::list out;
             for (const auto& t : split_of(kg, split)) out.append(triple_tuple(t));
             return out;
           },
           py::arg("split") = "train")
      .def("is_known", [](const KnowledgeGraph& kg, EntityId s, RelationId p, EntityId o) {
        return kg.filter.contains({s, p, o});
      });

  m.def(
      "load_dataset",
      [](const std::string& name) { return std::make_shared<KnowledgeGraph>(resolve_dataset(name)); },
      py::arg("name"), "Builtin dataset (umls, kinships, zachary) or a directory of TSV splits.");

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("kind", [](const PyModel& pm) { return std::string(to_string(pm.model->kind())); })
      .def_property_readonly("dim", [](const PyModel& pm) { return pm.model->dim(); })
      .def_property_readonly("dataset", [](const PyModel& pm) { return pm.dataset; })
      .def("score",
           [](const PyModel& pm, const std::string& s, const std::string& p, const std::string& o) {
             return pm.model->score(pm.triple(s, p, o));
           })
      .def("spike_train",
           [](const PyModel& pm, const std::string& e) {
             return pm.model->spike_train(pm.entities.at(e));
           })
      .def("evaluate",
           [](const PyModel& pm, const std::string& split, const std::string& dataset) {
             const auto kg = resolve_dataset(dataset.empty() ? pm.dataset : dataset);
             if (kg.entities != pm.entities || kg.relations != pm.relations)
               throw VocabError("dataset vocabulary does not match the model");
             return report_dict(evaluate(*pm.model, split_of(kg, split), kg.filter));
           },
           py::arg("split") = "test", py::arg("dataset") = "")
      .def("isi_statistics",
           [](const PyModel& pm) {
             const auto st = isi_statistics(*pm.model);
             py::dict d;
             d["mean"] = st.mean;
             d["std"] = st.std_dev;
             d["cv"] = st.cv;
             d["cv_uncorrected"] = st.cv_uncorrected;
             return d;
           })
      .def("save",
           [](const PyModel& pm, const std::string& path) {
             save_checkpoint(path, *pm.model, pm.entities, pm.relations, {{"dataset", pm.dataset}});
           });

  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        auto ck = load_checkpoint(path);
        PyModel pm{std::shared_ptr<Model>(std::move(ck.model)), ck.entities, ck.relations,
                   ck.meta.value("dataset", std::string())};
        return pm;
      },
      py::arg("path"));

  m.def(
      "train",
      [](const std::string& config_text, py::dict overrides) {
        std::string text = config_text;
        for (auto [k, v] : overrides) text += "\n" + py::str(k).cast<std::string>() + " = " +
                                              py::str(v).cast<std::string>();
        const auto cfg = parse_experiment_config(text, "<python>");
        const auto kg = resolve_dataset(cfg.dataset);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(kg, cfg.train);
        }
        py::list log;
        for (const auto& rec : r.log) {
          py::dict d;
          d["epoch"] = rec.epoch;
          d["train_loss"] = rec.train_loss;
          if (rec.validated) d["valid_mrr"] = rec.valid_mrr;
          log.append(d);
        }
        PyModel pm{std::shared_ptr<Model>(std::move(r.model)), kg.entities, kg.relations,
                   cfg.dataset};
        return py::make_tuple(pm, log);
      },
      py::arg("config_text"), py::arg("overrides") = py::dict(),
      "Train from config text (key = value lines); returns (model, epoch log).");
}
