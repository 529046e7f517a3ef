#include "spikekg/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "spikekg/error.hpp"

namespace spikekg {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "spikekg-checkpoint";
constexpr int kVersion = 1;

json spec_to_json(const ModelSpec& s) {
  return {
      {"kind", to_string(s.kind)},
      {"num_entities", s.num_entities},
      {"num_relations", s.num_relations},
      {"dim", s.dim},
      {"norm_mode", to_string(s.norm_mode)},
      {"score_kind", to_string(s.score_kind)},
      {"tau_ref", s.tau_ref},
      {"lengths", s.lengths},
      {"frozen_relations", s.frozen_relations},
      {"neuron",
       {{"threshold", s.neuron.threshold},
        {"tau_s", s.neuron.tau_s},
        {"tau_ref", s.neuron.tau_ref},
        {"window", s.neuron.window},
        {"input_size", s.neuron.input_size}}},
      {"input_times", s.input_times},
  };
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.num_entities = j.at("num_entities").get<std::size_t>();
  s.num_relations = j.at("num_relations").get<std::size_t>();
  s.dim = j.at("dim").get<std::size_t>();
  s.norm_mode = parse_norm_mode(j.at("norm_mode").get<std::string>());
  s.score_kind = parse_score_kind(j.at("score_kind").get<std::string>());
  s.tau_ref = j.at("tau_ref").get<double>();
  s.lengths = j.at("lengths").get<std::vector<std::size_t>>();
  s.frozen_relations = j.at("frozen_relations").get<std::vector<RelationId>>();
  const auto& n = j.at("neuron");
  s.neuron.threshold = n.at("threshold").get<double>();
  s.neuron.tau_s = n.at("tau_s").get<double>();
  s.neuron.tau_ref = n.at("tau_ref").get<double>();
  s.neuron.window = n.at("window").get<double>();
  s.neuron.input_size = n.at("input_size").get<std::size_t>();
  s.input_times = j.at("input_times").get<std::vector<double>>();
  return s;
}

}  // namespace

json checkpoint_to_json(const Model& model, const Vocabulary& entities,
                        const Vocabulary& relations, const json& meta) {
  if (entities.size() != model.num_entities() || relations.size() != model.num_relations())
    throw DimensionError("vocabulary sizes do not match the model");
  json tensors = json::object();
  for (const auto& p : model.params())
    tensors[p.name] = {{"rows", p.rows}, {"cols", p.cols}, {"values", p.value}};
  return {
      {"format", kFormat},
      {"version", kVersion},
      {"model", spec_to_json(model.spec())},
      {"entities", entities.labels()},
      {"relations", relations.labels()},
      {"tensors", tensors},
      {"meta", meta},
  };
}

Checkpoint checkpoint_from_json(const json& doc, const std::string& source) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormat)
      throw ParseError(source, 1, "not a spikekg checkpoint");
    if (doc.at("version").get<int>() != kVersion)
      throw ParseError(source, 1,
                       "unsupported checkpoint version " + doc.at("version").dump());
    Checkpoint c;
    const auto spec = spec_from_json(doc.at("model"));
    c.entities = Vocabulary(doc.at("entities").get<std::vector<std::string>>());
    c.relations = Vocabulary(doc.at("relations").get<std::vector<std::string>>());
    c.entities.freeze();
    c.relations.freeze();
    if (c.entities.size() != spec.num_entities || c.relations.size() != spec.num_relations)
      throw ParseError(source, 1, "vocabulary sizes do not match the model header");
    c.model = make_model(spec);
    const auto& tensors = doc.at("tensors");
    for (auto& p : c.model->params()) {
      if (!tensors.contains(p.name)) throw ParseError(source, 1, "missing tensor '" + p.name + "'");
      const auto& t = tensors.at(p.name);
      auto values = t.at("values").get<std::vector<double>>();
      if (t.at("rows").get<std::size_t>() != p.rows || t.at("cols").get<std::size_t>() != p.cols ||
          values.size() != p.value.size())
        throw ParseError(source, 1, "tensor '" + p.name + "' has the wrong shape");
      p.value = std::move(values);
    }
    c.model->refresh();
    if (doc.contains("meta")) c.meta = doc.at("meta");
    return c;
  } catch (const json::exception& e) {
    throw ParseError(source, 1, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Vocabulary& entities, const Vocabulary& relations, const json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_json(model, entities, relations, meta).dump(1) << '\n';
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 1, std::string("invalid JSON: ") + e.what());
  }
  return checkpoint_from_json(doc, path.string());
}

void require_same_vocabulary(const Checkpoint& ckpt, const KnowledgeGraph& kg) {
  if (!(ckpt.entities == kg.entities))
    throw VocabError("checkpoint entity vocabulary differs from dataset '" + kg.name + "'");
  if (!(ckpt.relations == kg.relations))
    throw VocabError("checkpoint relation vocabulary differs from dataset '" + kg.name + "'");
}

}  // namespace spikekg
