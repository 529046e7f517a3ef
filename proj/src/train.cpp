#include "spikekg/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikekg/error.hpp"
#include "spikekg/eval.hpp"

namespace spikekg {

NegativePairing parse_negative_pairing(std::string_view s) {
  if (s == "own") return NegativePairing::own;
  if (s == "batch") return NegativePairing::batch;
  throw ConfigError("unknown negative pairing '" + std::string(s) + "' (expected own or batch)");
}

std::string_view to_string(NegativePairing p) {
  return p == NegativePairing::own ? "own" : "batch";
}

void TrainConfig::validate() const {
  if (dim == 0) throw ConfigError("dim: must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate: must be positive");
  if (batch_size == 0) throw ConfigError("batch_size: must be positive");
  if (num_negatives == 0) throw ConfigError("num_negatives: must be positive");
  if (!(margin >= 0.0)) throw ConfigError("margin: must be >= 0");
  if (!(l2 >= 0.0)) throw ConfigError("l2: must be >= 0");
  if (!(tau_ref >= 0.0)) throw ConfigError("tau_ref: must be >= 0");
  if (max_epochs == 0) throw ConfigError("max_epochs: must be positive");
  if (patience == 0) throw ConfigError("patience: must be >= 1");
  if (valid_every == 0) throw ConfigError("valid_every: must be positive");
  if (!(spike_regularizer >= 0.0)) throw ConfigError("spike_regularizer: must be >= 0");
  if (model == ModelKind::neuron) neuron.validate();
  if (length_std >= 0.0 && model != ModelKind::spikte)
    throw ConfigError("length_std: variable-length trains need model = spikte");
}

std::vector<Triple> sample_negatives(const Triple& triple, std::size_t k,
                                     std::size_t num_entities, std::mt19937_64& rng) {
  if (num_entities < 2) throw ConfigError("negative sampling needs at least two entities");
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(num_entities - 2));
  std::vector<Triple> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Triple c = triple;
    EntityId& slot = coin(rng) ? c.subject : c.object;
    // Draw from the other |E|-1 entities by skipping over the original.
    EntityId e = pick(rng);
    if (e >= slot) ++e;
    slot = e;
    out.push_back(c);
  }
  return out;
}

std::vector<std::size_t> draw_spike_counts(std::size_t num_entities, std::size_t dim,
                                           double std_dev, std::mt19937_64& rng) {
  std::vector<std::size_t> counts(num_entities, dim);
  if (std_dev <= 0.0) return counts;
  std::normal_distribution<double> g(static_cast<double>(dim), std_dev);
  for (auto& c : counts) {
    const double v = std::round(g(rng));
    c = static_cast<std::size_t>(std::clamp(v, 1.0, static_cast<double>(dim)));
  }
  return counts;
}

ModelSpec model_spec_for(const KnowledgeGraph& kg, const TrainConfig& cfg) {
  ModelSpec spec;
  spec.kind = cfg.model;
  spec.num_entities = kg.num_entities();
  spec.num_relations = kg.num_relations();
  spec.dim = cfg.dim;
  spec.norm_mode = cfg.norm_mode;
  spec.score_kind = cfg.score_kind;
  spec.tau_ref = cfg.tau_ref;
  spec.neuron = cfg.neuron;
  // One refractory period for both model families.
  spec.neuron.tau_ref = cfg.tau_ref;
  for (const auto& label : cfg.frozen_relations) {
    auto id = kg.relations.find(label);
    if (!id) throw ConfigError("frozen_relations: unknown relation '" + label + "'");
    spec.frozen_relations.push_back(*id);
  }
  return spec;
}

std::unique_ptr<Model> init_model(const KnowledgeGraph& kg, const TrainConfig& cfg,
                                  std::mt19937_64& rng) {
  auto spec = model_spec_for(kg, cfg);
  if (cfg.length_std >= 0.0)
    spec.lengths = draw_spike_counts(spec.num_entities, spec.dim, cfg.length_std, rng);
  auto model = make_model(spec);
  if (auto* nm = dynamic_cast<NeuronModel*>(model.get()))
    nm->spike_regularizer_strength = cfg.spike_regularizer;
  model->init(rng);
  return model;
}

BatchLoss batch_loss_and_grad(Model& model, std::span<const Triple> positives,
                              std::span<const std::vector<Triple>> negatives,
                              const TrainConfig& cfg) {
  model.zero_grad();
  BatchLoss out;
  const double nb = static_cast<double>(positives.size());
  if (positives.empty()) return out;

  if (is_pairwise(cfg.loss)) {
    // Score every triple once, accumulate dL/dscore per triple, then
    // backpropagate each triple a single time.
    std::vector<double> pos_score(positives.size()), pos_up(positives.size(), 0.0);
    std::vector<char> pos_ok(positives.size());
    for (std::size_t i = 0; i < positives.size(); ++i) {
      const auto& t = positives[i];
      pos_ok[i] = model.usable(t.subject) && model.usable(t.object);
      if (pos_ok[i]) pos_score[i] = model.score(t);
    }
    std::vector<const Triple*> neg;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < negatives.size(); ++i)
      for (const auto& t : negatives[i]) {
        neg.push_back(&t);
        owner.push_back(i);
      }
    std::vector<double> neg_score(neg.size()), neg_up(neg.size(), 0.0);
    std::vector<char> neg_ok(neg.size());
    for (std::size_t k = 0; k < neg.size(); ++k) {
      neg_ok[k] = model.usable(neg[k]->subject) && model.usable(neg[k]->object);
      if (neg_ok[k]) neg_score[k] = model.score(*neg[k]);
    }
    auto pair = [&](std::size_t i, std::size_t k, double w) {
      if (!pos_ok[i] || !neg_ok[k]) {
        ++out.skipped_pairs;
        return;
      }
      const auto pl = pair_loss(cfg.loss, pos_score[i], neg_score[k], cfg.margin);
      out.loss += w * pl.value;
      pos_up[i] += w * pl.d_pos;
      neg_up[k] += w * pl.d_neg;
    };
    if (cfg.pairing == NegativePairing::own) {
      // mean over positives of the mean over that positive's negatives
      for (std::size_t k = 0; k < neg.size(); ++k)
        pair(owner[k], k, 1.0 / (nb * static_cast<double>(negatives[owner[k]].size())));
    } else {
      // mean over every (positive, negative) pair drawn from the batch
      const double w = 1.0 / (nb * static_cast<double>(neg.size()));
      for (std::size_t i = 0; i < positives.size(); ++i)
        for (std::size_t k = 0; k < neg.size(); ++k) pair(i, k, w);
    }
    for (std::size_t i = 0; i < positives.size(); ++i)
      if (pos_up[i] != 0.0) model.backward_score(positives[i], pos_up[i]);
    for (std::size_t k = 0; k < neg.size(); ++k)
      if (neg_up[k] != 0.0) model.backward_score(*neg[k], neg_up[k]);
  } else {
    // mean over every labelled triple (positives 1, negatives 0)
    std::size_t items = positives.size();
    for (const auto& negs : negatives) items += negs.size();
    const double w = 1.0 / static_cast<double>(items);
    auto point = [&](const Triple& t, double label) {
      if (!model.usable(t.subject) || !model.usable(t.object)) {
        ++out.skipped_pairs;
        return;
      }
      const auto pl = point_loss(cfg.loss, model.score(t), label);
      out.loss += w * pl.value;
      if (pl.d_score != 0.0) model.backward_score(t, w * pl.d_score);
    };
    for (std::size_t i = 0; i < positives.size(); ++i) {
      point(positives[i], 1.0);
      for (const auto& neg : negatives[i]) point(neg, 0.0);
    }
  }

  if (cfg.l2 > 0.0) {
    const double w = cfg.l2 / nb;
    for (const auto& t : positives) {
      out.loss += w * (model.entity_sq_norm(t.subject) + model.relation_sq_norm(t.predicate) +
                       model.entity_sq_norm(t.object));
      model.add_entity_sq_norm_grad(t.subject, w);
      model.add_entity_sq_norm_grad(t.object, w);
      model.add_relation_sq_norm_grad(t.predicate, w);
    }
  }

  out.loss += model.finish_backward();
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite training loss");
  return out;
}

std::vector<AdamState> make_adam_states(const Model& model) {
  std::vector<AdamState> states;
  for (const auto& p : model.params()) states.emplace_back(p.name, p.value.size());
  return states;
}

void optimizer_step(Model& model, std::vector<AdamState>& states, double lr) {
  // Frozen relations never receive gradient, so their moments stay zero and
  // Adam leaves them untouched.
  auto& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i)
    adam_step(states[i], params[i].value, params[i].grad, lr);
  model.after_step();
  model.refresh();
}

TrainResult train(const KnowledgeGraph& kg, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (kg.train.empty()) throw ConfigError("training split is empty");
  std::mt19937_64 rng(cfg.seed);
  auto model = init_model(kg, cfg, rng);
  auto states = make_adam_states(*model);

  TrainResult result;
  std::vector<std::size_t> order(kg.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool has_valid = !kg.valid.empty();
  double best = -1.0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::vector<Triple> batch;
    std::vector<std::vector<Triple>> negs;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      negs.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(kg.train[order[i]]);
        negs.push_back(sample_negatives(batch.back(), cfg.num_negatives, kg.num_entities(), rng));
      }
      const auto bl = batch_loss_and_grad(*model, batch, negs, cfg);
      loss_sum += bl.loss * static_cast<double>(batch.size());
      rec.skipped_pairs += bl.skipped_pairs;
      optimizer_step(*model, states, cfg.learning_rate);
    }
    rec.train_loss = loss_sum / static_cast<double>(order.size());

    const bool last = epoch == cfg.max_epochs;
    if (has_valid && (epoch % cfg.valid_every == 0 || last)) {
      bool can_rank = true;
      for (EntityId e = 0; e < model->num_entities() && can_rank; ++e) can_rank = model->usable(e);
      if (can_rank) {
        const auto report = evaluate(*model, kg.valid, kg.filter);
        rec.validated = true;
        rec.valid_mrr = report.mrr;
        rec.valid_hits1 = report.hits1;
        rec.valid_hits3 = report.hits3;
        if (report.mrr > best) {
          best = report.mrr;
          result.best_epoch = epoch;
          result.best_valid_mrr = report.mrr;
          result.model = model->clone();
        }
      }
    }
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (has_valid && result.model && epoch - result.best_epoch >= cfg.patience) break;
  }

  if (!has_valid || !result.model) {
    result.model = std::move(model);
    result.best_epoch = result.log.size();
  }
  return result;
}

}  // namespace spikekg
