#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "spikekg/kg.hpp"
#include "spikekg/model.hpp"

namespace spikekg {

// A trained model plus the vocabularies that give its rows meaning.
//
// On disk this is one JSON object (see README, "Checkpoint format"):
//   format   "spikekg-checkpoint"
//   version  1
//   model    kind, sizes, norm/score mode, tau_ref, lengths, frozen
//            relations, neuron constants and input spike times
//   entities / relations   label lists in id order
//   tensors  {name: {rows, cols, values}}
//   meta     free-form provenance (dataset, seed, best epoch, config)
struct Checkpoint {
  std::unique_ptr<Model> model;
  Vocabulary entities;
  Vocabulary relations;
  nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Model& model, const Vocabulary& entities,
                                  const Vocabulary& relations,
                                  const nlohmann::json& meta = nlohmann::json::object());
Checkpoint checkpoint_from_json(const nlohmann::json& doc, const std::string& source = "<memory>");

// Serialization is byte-for-byte deterministic for a given model.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Vocabulary& entities, const Vocabulary& relations,
                     const nlohmann::json& meta = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws VocabError unless the checkpoint was trained on `kg`'s vocabularies.
void require_same_vocabulary(const Checkpoint& ckpt, const KnowledgeGraph& kg);

}  // namespace spikekg
