#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "spikekg/adam.hpp"
#include "spikekg/kg.hpp"
#include "spikekg/losses.hpp"
#include "spikekg/model.hpp"

namespace spikekg {

// Which negatives a positive is compared against by a pairwise loss.
//   own:   only the corruptions drawn for it
//   batch: every corruption drawn in the batch
enum class NegativePairing { own, batch };

NegativePairing parse_negative_pairing(std::string_view s);
std::string_view to_string(NegativePairing p);

struct TrainConfig {
  ModelKind model = ModelKind::spikte;
  std::size_t dim = 32;
  double learning_rate = 0.01;
  std::size_t batch_size = 100;
  std::size_t num_negatives = 1;
  double margin = 0.0;  // gamma
  double l2 = 0.0;
  double tau_ref = 0.0;
  LossKind loss = LossKind::margin;
  NegativePairing pairing = NegativePairing::own;
  NormMode norm_mode = NormMode::normalized;
  ScoreKind score_kind = ScoreKind::asym;
  std::size_t max_epochs = 1000;
  std::size_t patience = 20;
  std::size_t valid_every = 1;
  std::uint64_t seed = 0;
  // Relation labels pinned to zero (e.g. "interact" for community prediction).
  std::vector<std::string> frozen_relations;
  // Neuronal model only.
  NeuronConfig neuron;
  double spike_regularizer = kDefaultSpikeRegularizer;
  // Variable-length spike trains: per-entity counts ~ round(N(dim, length_std))
  // clamped to [1, dim]. Negative disables.
  double length_std = -1.0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_mrr = 0.0;
  double valid_hits1 = 0.0;
  double valid_hits3 = 0.0;
  bool validated = false;
  std::size_t skipped_pairs = 0;  // pairs with a silent neuron, skipped this epoch
};

struct TrainResult {
  std::unique_ptr<Model> model;  // best-validation snapshot
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_valid_mrr = 0.0;
};

// k corruptions of `triple`; each replaces subject or object (fair coin) with a
// uniformly drawn different entity.
std::vector<Triple> sample_negatives(const Triple& triple, std::size_t k,
                                     std::size_t num_entities, std::mt19937_64& rng);

// Draws per-entity spike counts for variable-length trains.
std::vector<std::size_t> draw_spike_counts(std::size_t num_entities, std::size_t dim,
                                           double std_dev, std::mt19937_64& rng);

ModelSpec model_spec_for(const KnowledgeGraph& kg, const TrainConfig& cfg);

// Freshly initialized model for `kg` under `cfg` (what epoch 0 starts from).
std::unique_ptr<Model> init_model(const KnowledgeGraph& kg, const TrainConfig& cfg,
                                  std::mt19937_64& rng);

// Loss of one batch plus its gradient accumulated into the model's parameter
// gradients (which are zeroed first). Negatives are given per positive.
struct BatchLoss {
  double loss = 0.0;
  std::size_t skipped_pairs = 0;
};
BatchLoss batch_loss_and_grad(Model& model, std::span<const Triple> positives,
                              std::span<const std::vector<Triple>> negatives,
                              const TrainConfig& cfg);

// Adam step over every parameter tensor, honoring frozen relations.
void optimizer_step(Model& model, std::vector<AdamState>& states, double lr);
std::vector<AdamState> make_adam_states(const Model& model);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Epoch loop with validation-MRR early stopping. Deterministic given cfg.seed.
TrainResult train(const KnowledgeGraph& kg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace spikekg
