#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikekg/kg.hpp"
#include "spikekg/neuron.hpp"
#include "spikekg/scoring.hpp"
#include "spikekg/spiketrain.hpp"

namespace spikekg {

enum class ModelKind { spikte, transe, rescal, neuron };

ModelKind parse_model_kind(std::string_view s);
std::string_view to_string(ModelKind k);

// A trainable parameter matrix with its gradient buffer.
struct ParamTensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;

  ParamTensor() = default;
  ParamTensor(std::string n, std::size_t r, std::size_t c)
      : name(std::move(n)), rows(r), cols(c), value(r * c, 0.0), grad(r * c, 0.0) {}

  std::span<double> row(std::size_t r) { return {value.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {value.data() + r * cols, cols}; }
  std::span<double> grad_row(std::size_t r) { return {grad.data() + r * cols, cols}; }
};

// Everything a checkpoint needs to rebuild a model besides its tensors.
struct ModelSpec {
  ModelKind kind = ModelKind::spikte;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::size_t dim = 32;
  NormMode norm_mode = NormMode::normalized;
  ScoreKind score_kind = ScoreKind::asym;
  double tau_ref = 0.0;
  // Per-entity spike counts for variable-length trains (empty = all `dim`).
  std::vector<std::size_t> lengths;
  // Relations pinned to zero and excluded from training.
  std::vector<RelationId> frozen_relations;
  NeuronConfig neuron;
  std::vector<double> input_times;  // neuronal model only
};

// Common interface of all link-prediction models. Entity parameters map to a
// cached per-entity representation (spike train or embedding vector) that
// scores are computed from; refresh() rebuilds the cache after parameters
// change. Gradients flow score -> representation -> parameters.
class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {}
  virtual ~Model() = default;

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }
  std::size_t num_entities() const { return spec_.num_entities; }
  std::size_t num_relations() const { return spec_.num_relations; }
  std::size_t dim() const { return spec_.dim; }

  std::vector<ParamTensor>& params() { return params_; }
  const std::vector<ParamTensor>& params() const { return params_; }
  ParamTensor& param(std::string_view name);
  const ParamTensor& param(std::string_view name) const;

  virtual std::unique_ptr<Model> clone() const = 0;
  virtual void init(std::mt19937_64& rng) = 0;
  virtual void refresh() = 0;

  // False when the entity has no valid representation (a silent neuron slot).
  virtual bool usable(EntityId) const { return true; }
  void require_usable() const;

  virtual double score(const Triple& t) const = 0;
  // Scores of every replacement on `side` (out.size() == num_entities()).
  virtual void score_candidates(const Triple& t, Side side, std::span<double> out) const;

  void zero_grad();
  // Accumulates upstream * d score(t) into representation gradients.
  virtual void backward_score(const Triple& t, double upstream) = 0;
  // Pushes representation gradients into parameter gradients and adds model
  // regularizers; returns the regularizer loss.
  virtual double finish_backward() = 0;
  // Projections applied after each optimizer step.
  virtual void after_step() {}

  // Spike times of an entity (spike models only).
  virtual std::vector<double> spike_train(EntityId e) const;
  bool is_spike_model() const { return kind() == ModelKind::spikte || kind() == ModelKind::neuron; }

  // Squared parameter norm of an entity / relation and its gradient.
  virtual double entity_sq_norm(EntityId e) const;
  virtual double relation_sq_norm(RelationId r) const;
  virtual void add_entity_sq_norm_grad(EntityId e, double scale);
  virtual void add_relation_sq_norm_grad(RelationId r, double scale);

  bool relation_frozen(RelationId r) const;

 protected:
  virtual std::string entity_tensor() const = 0;
  virtual std::string relation_tensor() const = 0;

  ModelSpec spec_;
  std::vector<ParamTensor> params_;
};

std::unique_ptr<Model> make_model(const ModelSpec& spec);

// Abstract spike-train model: ISI parameters -> normalized, ordered spike times.
class SpikteModel : public Model {
 public:
  explicit SpikteModel(ModelSpec spec);
  std::unique_ptr<Model> clone() const override { return std::make_unique<SpikteModel>(*this); }
  void init(std::mt19937_64& rng) override;
  void refresh() override;
  double score(const Triple& t) const override;
  void score_candidates(const Triple& t, Side side, std::span<double> out) const override;
  void backward_score(const Triple& t, double upstream) override;
  double finish_backward() override;
  std::vector<double> spike_train(EntityId e) const override;

  std::size_t length(EntityId e) const;

 protected:
  std::string entity_tensor() const override { return "isi"; }
  std::string relation_tensor() const override { return "delta"; }

 private:
  std::span<const double> times(EntityId e) const;
  double score_from(std::span<const double> ts, std::span<const double> to, RelationId p) const;

  std::vector<double> times_;       // E x N, refractory offsets applied
  std::vector<double> times_grad_;  // E x N
  std::vector<char> touched_;
};

class TranseModel : public Model {
 public:
  explicit TranseModel(ModelSpec spec);
  std::unique_ptr<Model> clone() const override { return std::make_unique<TranseModel>(*this); }
  void init(std::mt19937_64& rng) override;
  void refresh() override {}
  double score(const Triple& t) const override;
  void score_candidates(const Triple& t, Side side, std::span<double> out) const override;
  void backward_score(const Triple& t, double upstream) override;
  double finish_backward() override { return 0.0; }
  // Entities are projected back onto the unit sphere.
  void after_step() override;

 protected:
  std::string entity_tensor() const override { return "entity"; }
  std::string relation_tensor() const override { return "relation"; }
};

class RescalModel : public Model {
 public:
  explicit RescalModel(ModelSpec spec);
  std::unique_ptr<Model> clone() const override { return std::make_unique<RescalModel>(*this); }
  void init(std::mt19937_64& rng) override;
  void refresh() override {}
  double score(const Triple& t) const override;
  void score_candidates(const Triple& t, Side side, std::span<double> out) const override;
  void backward_score(const Triple& t, double upstream) override;
  double finish_backward() override { return 0.0; }

 protected:
  std::string entity_tensor() const override { return "entity"; }
  std::string relation_tensor() const override { return "relation"; }
};

// Spike trains produced by integrate-and-fire neurons driven by a shared input
// population; each spike slot owns a disjoint weight vector.
class NeuronModel : public Model {
 public:
  explicit NeuronModel(ModelSpec spec);
  std::unique_ptr<Model> clone() const override { return std::make_unique<NeuronModel>(*this); }
  void init(std::mt19937_64& rng) override;
  void refresh() override;
  bool usable(EntityId e) const override { return usable_[e] != 0; }
  double score(const Triple& t) const override;
  void score_candidates(const Triple& t, Side side, std::span<double> out) const override;
  void backward_score(const Triple& t, double upstream) override;
  double finish_backward() override;
  std::vector<double> spike_train(EntityId e) const override;

  const InputPopulation& inputs() const { return inputs_; }
  std::span<const double> weights(EntityId e) const;
  // Number of (entity, slot) pairs that currently never reach threshold.
  std::size_t silent_slots() const;

  double spike_regularizer_strength = kDefaultSpikeRegularizer;

 protected:
  std::string entity_tensor() const override { return "weights"; }
  std::string relation_tensor() const override { return "delta"; }

 private:
  std::span<const double> times(EntityId e) const;

  InputPopulation inputs_;
  std::vector<double> times_;
  std::vector<double> times_grad_;
  std::vector<IntervalSolution> solutions_;  // E x N
  std::vector<char> slot_ok_;                // E x N
  std::vector<char> usable_;
  std::vector<char> touched_;
};

}  // namespace spikekg
