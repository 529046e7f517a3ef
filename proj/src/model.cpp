#include "spikekg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikekg/error.hpp"

namespace spikekg {

ModelKind parse_model_kind(std::string_view s) {
  if (s == "spikte") return ModelKind::spikte;
  if (s == "transe") return ModelKind::transe;
  if (s == "rescal") return ModelKind::rescal;
  if (s == "neuron") return ModelKind::neuron;
  throw ConfigError("unknown model '" + std::string(s) +
                    "' (expected spikte, transe, rescal or neuron)");
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::spikte: return "spikte";
    case ModelKind::transe: return "transe";
    case ModelKind::rescal: return "rescal";
    case ModelKind::neuron: return "neuron";
  }
  return "?";
}

ParamTensor& Model::param(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw Error("model has no parameter tensor '" + std::string(name) + "'");
}

const ParamTensor& Model::param(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw Error("model has no parameter tensor '" + std::string(name) + "'");
}

void Model::require_usable() const {
  for (EntityId e = 0; e < num_entities(); ++e)
    if (!usable(e))
      throw SilentNeuronError("entity " + std::to_string(e) +
                              " has a silent neuron slot and cannot be scored");
}

void Model::score_candidates(const Triple& t, Side side, std::span<double> out) const {
  Triple c = t;
  for (EntityId e = 0; e < num_entities(); ++e) {
    (side == Side::object ? c.object : c.subject) = e;
    out[e] = score(c);
  }
}

void Model::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::vector<double> Model::spike_train(EntityId) const {
  throw Error(std::string(to_string(kind())) + " embeddings are not spike trains");
}

namespace {

double sq_norm(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

void add_scaled(std::span<const double> v, double scale, std::span<double> out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] += scale * v[i];
}

void require_dims(const ModelSpec& s) {
  if (s.dim == 0) throw ConfigError("dim must be positive");
  if (s.num_entities == 0) throw ConfigError("model needs at least one entity");
}

}  // namespace

double Model::entity_sq_norm(EntityId e) const { return sq_norm(param(entity_tensor()).row(e)); }
double Model::relation_sq_norm(RelationId r) const {
  return sq_norm(param(relation_tensor()).row(r));
}

void Model::add_entity_sq_norm_grad(EntityId e, double scale) {
  auto& p = param(entity_tensor());
  add_scaled(p.row(e), 2.0 * scale, p.grad_row(e));
}

void Model::add_relation_sq_norm_grad(RelationId r, double scale) {
  if (relation_frozen(r)) return;
  auto& p = param(relation_tensor());
  add_scaled(p.row(r), 2.0 * scale, p.grad_row(r));
}

bool Model::relation_frozen(RelationId r) const {
  const auto& f = spec_.frozen_relations;
  return std::find(f.begin(), f.end(), r) != f.end();
}

std::unique_ptr<Model> make_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::spikte: return std::make_unique<SpikteModel>(spec);
    case ModelKind::transe: return std::make_unique<TranseModel>(spec);
    case ModelKind::rescal: return std::make_unique<RescalModel>(spec);
    case ModelKind::neuron: return std::make_unique<NeuronModel>(spec);
  }
  throw ConfigError("unknown model kind");
}

// ---------------------------------------------------------------- SpikTE

SpikteModel::SpikteModel(ModelSpec spec) : Model(std::move(spec)) {
  require_dims(spec_);
  const auto n = spec_.dim;
  if (!spec_.lengths.empty()) {
    if (spec_.lengths.size() != spec_.num_entities)
      throw DimensionError("spike-count table does not cover every entity");
    for (auto len : spec_.lengths)
      if (len < 1 || len > n) throw DimensionError("spike counts must lie in [1, dim]");
    if (spec_.score_kind != ScoreKind::asym)
      throw ConfigError("variable-length spike trains support only the asymmetric score");
  }
  params_.emplace_back("isi", spec_.num_entities, n);
  params_.emplace_back("delta", spec_.num_relations, n);
  times_.assign(spec_.num_entities * n, 0.0);
  times_grad_.assign(spec_.num_entities * n, 0.0);
  touched_.assign(spec_.num_entities, 0);
}

std::size_t SpikteModel::length(EntityId e) const {
  return spec_.lengths.empty() ? spec_.dim : spec_.lengths[e];
}

void SpikteModel::init(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& p : params_)
    for (auto& v : p.value) v = u(rng);
  for (auto r : spec_.frozen_relations) std::ranges::fill(param("delta").row(r), 0.0);
  refresh();
}

void SpikteModel::refresh() {
  const auto& isi = param("isi");
  const auto n = spec_.dim;
  for (EntityId e = 0; e < num_entities(); ++e) {
    const auto len = length(e);
    std::vector<double> train;
    try {
      train = spike_train_from_params(isi.row(e).first(len), spec_.norm_mode, spec_.tau_ref);
    } catch (const DegenerateEmbeddingError&) {
      throw DegenerateEmbeddingError("entity " + std::to_string(e) +
                                     " has an all-zero ISI vector (Z = 0)");
    }
    if (!is_valid_spike_train(train, spec_.tau_ref, 1e-9))
      throw NumericalError("entity " + std::to_string(e) + " has an unordered spike train");
    std::copy(train.begin(), train.end(), times_.begin() + static_cast<std::ptrdiff_t>(e * n));
  }
}

std::span<const double> SpikteModel::times(EntityId e) const {
  return {times_.data() + e * spec_.dim, length(e)};
}

std::vector<double> SpikteModel::spike_train(EntityId e) const {
  auto t = times(e);
  return {t.begin(), t.end()};
}

double SpikteModel::score_from(std::span<const double> ts, std::span<const double> to,
                               RelationId p) const {
  const auto delta = param("delta").row(p);
  if (!spec_.lengths.empty()) return score_truncated(ts, to, delta);
  return score_spike(spec_.score_kind, ts, to, delta);
}

double SpikteModel::score(const Triple& t) const {
  return score_from(times(t.subject), times(t.object), t.predicate);
}

void SpikteModel::score_candidates(const Triple& t, Side side, std::span<double> out) const {
  if (side == Side::object) {
    const auto ts = times(t.subject);
    for (EntityId e = 0; e < num_entities(); ++e) out[e] = score_from(ts, times(e), t.predicate);
  } else {
    const auto to = times(t.object);
    for (EntityId e = 0; e < num_entities(); ++e) out[e] = score_from(times(e), to, t.predicate);
  }
}

void SpikteModel::backward_score(const Triple& t, double upstream) {
  const auto n = spec_.dim;
  std::span<double> g_ts(times_grad_.data() + t.subject * n, length(t.subject));
  std::span<double> g_to(times_grad_.data() + t.object * n, length(t.object));
  auto& delta = param("delta");
  std::span<double> g_delta =
      relation_frozen(t.predicate) ? std::span<double>{} : delta.grad_row(t.predicate);
  const auto ts = times(t.subject);
  const auto to = times(t.object);
  if (!spec_.lengths.empty())
    score_truncated_grad(ts, to, delta.row(t.predicate), upstream, g_ts, g_to, g_delta);
  else
    score_spike_grad(spec_.score_kind, ts, to, delta.row(t.predicate), upstream, g_ts, g_to,
                     g_delta);
  touched_[t.subject] = 1;
  touched_[t.object] = 1;
}

double SpikteModel::finish_backward() {
  auto& isi = param("isi");
  const auto n = spec_.dim;
  for (EntityId e = 0; e < num_entities(); ++e) {
    if (!touched_[e]) continue;
    const auto len = length(e);
    std::span<double> g(times_grad_.data() + e * n, len);
    spike_times_vjp(isi.row(e).first(len), spec_.norm_mode, g, isi.grad_row(e).first(len));
    std::ranges::fill(g, 0.0);
    touched_[e] = 0;
  }
  return 0.0;
}

// ---------------------------------------------------------------- TransE

TranseModel::TranseModel(ModelSpec spec) : Model(std::move(spec)) {
  require_dims(spec_);
  params_.emplace_back("entity", spec_.num_entities, spec_.dim);
  params_.emplace_back("relation", spec_.num_relations, spec_.dim);
}

namespace {

void normalize_rows(ParamTensor& p) {
  for (std::size_t r = 0; r < p.rows; ++r) {
    auto row = p.row(r);
    const double norm = std::sqrt(sq_norm(row));
    if (norm > 0.0)
      for (auto& v : row) v /= norm;
  }
}

}  // namespace

// Uniform(-6/sqrt(N), 6/sqrt(N)) with unit-norm rows.
void TranseModel::init(std::mt19937_64& rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(spec_.dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& p : params_)
    for (auto& v : p.value) v = u(rng);
  normalize_rows(param("relation"));
  normalize_rows(param("entity"));
  for (auto r : spec_.frozen_relations) std::ranges::fill(param("relation").row(r), 0.0);
}

void TranseModel::after_step() { normalize_rows(param("entity")); }

double TranseModel::score(const Triple& t) const {
  const auto& e = param("entity");
  return score_transe(e.row(t.subject), e.row(t.object), param("relation").row(t.predicate));
}

void TranseModel::score_candidates(const Triple& t, Side side, std::span<double> out) const {
  const auto& ent = param("entity");
  const auto rel = param("relation").row(t.predicate);
  const auto n = spec_.dim;
  // object side: e_s - r - e_o ; subject side: e_s - (e_o + r)
  std::vector<double> anchor(n);
  if (side == Side::object) {
    const auto es = ent.row(t.subject);
    for (std::size_t j = 0; j < n; ++j) anchor[j] = es[j] - rel[j];
  } else {
    const auto eo = ent.row(t.object);
    for (std::size_t j = 0; j < n; ++j) anchor[j] = eo[j] + rel[j];
  }
  for (EntityId e = 0; e < num_entities(); ++e) {
    const auto row = ent.row(e);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(anchor[j] - row[j]);
    out[e] = -s;
  }
}

void TranseModel::backward_score(const Triple& t, double upstream) {
  auto& ent = param("entity");
  auto& rel = param("relation");
  std::span<double> g_rel =
      relation_frozen(t.predicate) ? std::span<double>{} : rel.grad_row(t.predicate);
  if (t.subject == t.object) {
    // Both gradients land on the same row; accumulate through a scratch copy.
    std::vector<double> gs(spec_.dim, 0.0), go(spec_.dim, 0.0);
    score_transe_grad(ent.row(t.subject), ent.row(t.object), rel.row(t.predicate), upstream, gs,
                      go, g_rel);
    auto g = ent.grad_row(t.subject);
    for (std::size_t j = 0; j < spec_.dim; ++j) g[j] += gs[j] + go[j];
    return;
  }
  score_transe_grad(ent.row(t.subject), ent.row(t.object), rel.row(t.predicate), upstream,
                    ent.grad_row(t.subject), ent.grad_row(t.object), g_rel);
}

// ---------------------------------------------------------------- RESCAL

RescalModel::RescalModel(ModelSpec spec) : Model(std::move(spec)) {
  require_dims(spec_);
  params_.emplace_back("entity", spec_.num_entities, spec_.dim);
  params_.emplace_back("relation", spec_.num_relations, spec_.dim * spec_.dim);
}

// Entities ~ N(0, 1/N) per component so that ||e|| is about 1; relation
// matrices ~ N(0, 1/N).
void RescalModel::init(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(spec_.dim)));
  for (auto& p : params_)
    for (auto& v : p.value) v = g(rng);
  for (auto r : spec_.frozen_relations) std::ranges::fill(param("relation").row(r), 0.0);
}

double RescalModel::score(const Triple& t) const {
  const auto& e = param("entity");
  return score_rescal(e.row(t.subject), param("relation").row(t.predicate), e.row(t.object));
}

void RescalModel::score_candidates(const Triple& t, Side side, std::span<double> out) const {
  const auto& ent = param("entity");
  const auto r = param("relation").row(t.predicate);
  const auto n = spec_.dim;
  std::vector<double> v(n, 0.0);
  if (side == Side::object) {
    // v = R^T e_s
    const auto es = ent.row(t.subject);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v[j] += es[i] * r[i * n + j];
  } else {
    // v = R e_o
    const auto eo = ent.row(t.object);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v[i] += r[i * n + j] * eo[j];
  }
  for (EntityId e = 0; e < num_entities(); ++e) {
    const auto row = ent.row(e);
    out[e] = std::inner_product(row.begin(), row.end(), v.begin(), 0.0);
  }
}

void RescalModel::backward_score(const Triple& t, double upstream) {
  auto& ent = param("entity");
  auto& rel = param("relation");
  std::span<double> g_rel =
      relation_frozen(t.predicate) ? std::span<double>{} : rel.grad_row(t.predicate);
  std::vector<double> gs(spec_.dim, 0.0), go(spec_.dim, 0.0);
  score_rescal_grad(ent.row(t.subject), rel.row(t.predicate), ent.row(t.object), upstream, gs,
                    g_rel, go);
  auto g_s = ent.grad_row(t.subject);
  auto g_o = ent.grad_row(t.object);
  for (std::size_t j = 0; j < spec_.dim; ++j) {
    g_s[j] += gs[j];
    g_o[j] += go[j];
  }
}

// ---------------------------------------------------------------- neuronal SpikTE

NeuronModel::NeuronModel(ModelSpec spec) : Model(std::move(spec)) {
  require_dims(spec_);
  spec_.neuron.validate();
  if (!spec_.lengths.empty())
    throw ConfigError("variable-length spike trains are not supported by the neuron model");
  spec_.norm_mode = NormMode::unit;
  spec_.tau_ref = spec_.neuron.tau_ref;
  const auto n = spec_.dim;
  const auto is = spec_.neuron.input_size;
  params_.emplace_back("weights", spec_.num_entities, n * is);
  params_.emplace_back("delta", spec_.num_relations, n);
  if (!spec_.input_times.empty()) {
    if (spec_.input_times.size() != is)
      throw DimensionError("input population size does not match input_size");
    inputs_ = InputPopulation(spec_.input_times, spec_.neuron.tau_s);
  }
  const auto slots = spec_.num_entities * n;
  times_.assign(slots, 0.0);
  times_grad_.assign(slots, 0.0);
  solutions_.assign(slots, {});
  slot_ok_.assign(slots, 0);
  usable_.assign(spec_.num_entities, 0);
  touched_.assign(spec_.num_entities, 0);
}

void NeuronModel::init(std::mt19937_64& rng) {
  const auto& cfg = spec_.neuron;
  inputs_ = InputPopulation::uniform(cfg.input_size, cfg.window, cfg.tau_s, rng);
  spec_.input_times.assign(inputs_.times().begin(), inputs_.times().end());
  std::normal_distribution<double> w(0.2, 1.0);
  for (auto& v : param("weights").value) v = w(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : param("delta").value) v = u(rng);
  for (auto r : spec_.frozen_relations) std::ranges::fill(param("delta").row(r), 0.0);
  refresh();
}

std::span<const double> NeuronModel::weights(EntityId e) const { return param("weights").row(e); }

void NeuronModel::refresh() {
  const auto& w = param("weights");
  const auto n = spec_.dim;
  const auto is = spec_.neuron.input_size;
  const double tau = spec_.neuron.tau_s;
  for (EntityId e = 0; e < num_entities(); ++e) {
    bool ok_all = true;
    double t = 0.0;
    const auto row = w.row(e);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = e * n + i;
      auto sol = solve_interval(row.subspan(i * is, is), inputs_, spec_.neuron);
      // A grazing crossing has no usable gradient; treat it like a silent slot.
      const bool ok = sol && sol->excess / tau >= 1e-9;
      slot_ok_[idx] = ok ? 1 : 0;
      if (!ok) {
        ok_all = false;
        solutions_[idx] = {};
        times_[idx] = 0.0;
        continue;
      }
      solutions_[idx] = *sol;
      if (i > 0) t += spec_.neuron.tau_ref;
      t += sol->interval;
      times_[idx] = t;
    }
    usable_[e] = ok_all ? 1 : 0;
  }
}

std::size_t NeuronModel::silent_slots() const {
  return static_cast<std::size_t>(std::count(slot_ok_.begin(), slot_ok_.end(), 0));
}

std::span<const double> NeuronModel::times(EntityId e) const {
  return {times_.data() + e * spec_.dim, spec_.dim};
}

std::vector<double> NeuronModel::spike_train(EntityId e) const {
  if (!usable(e))
    throw SilentNeuronError("entity " + std::to_string(e) + " has a silent neuron slot");
  auto t = times(e);
  return {t.begin(), t.end()};
}

double NeuronModel::score(const Triple& t) const {
  if (!usable(t.subject) || !usable(t.object)) {
    const auto bad = usable(t.subject) ? t.object : t.subject;
    throw SilentNeuronError("entity " + std::to_string(bad) + " has a silent neuron slot");
  }
  return score_spike(spec_.score_kind, times(t.subject), times(t.object),
                     param("delta").row(t.predicate));
}

void NeuronModel::score_candidates(const Triple& t, Side side, std::span<double> out) const {
  require_usable();
  const auto delta = param("delta").row(t.predicate);
  for (EntityId e = 0; e < num_entities(); ++e) {
    out[e] = side == Side::object
                 ? score_spike(spec_.score_kind, times(t.subject), times(e), delta)
                 : score_spike(spec_.score_kind, times(e), times(t.object), delta);
  }
}

void NeuronModel::backward_score(const Triple& t, double upstream) {
  const auto n = spec_.dim;
  auto& delta = param("delta");
  std::span<double> g_delta =
      relation_frozen(t.predicate) ? std::span<double>{} : delta.grad_row(t.predicate);
  score_spike_grad(spec_.score_kind, times(t.subject), times(t.object), delta.row(t.predicate),
                   upstream, {times_grad_.data() + t.subject * n, n},
                   {times_grad_.data() + t.object * n, n}, g_delta);
  touched_[t.subject] = 1;
  touched_[t.object] = 1;
}

// t_i = sum_{j<=i} I_j + i*tau_ref, so dL/dI_j is the suffix sum of dL/dt.
double NeuronModel::finish_backward() {
  auto& w = param("weights");
  const auto n = spec_.dim;
  const auto is = spec_.neuron.input_size;
  for (EntityId e = 0; e < num_entities(); ++e) {
    if (!touched_[e]) continue;
    std::span<double> g(times_grad_.data() + e * n, n);
    auto grad_row = w.grad_row(e);
    double suffix = 0.0;
    for (std::size_t j = n; j-- > 0;) {
      suffix += g[j];
      const auto idx = e * n + j;
      if (slot_ok_[idx] && suffix != 0.0)
        accumulate_interval_grad(solutions_[idx], inputs_, suffix, grad_row.subspan(j * is, is));
    }
    std::ranges::fill(g, 0.0);
    touched_[e] = 0;
  }
  return spike_regularizer(w.value, is, spec_.neuron, spike_regularizer_strength, w.grad);
}

}  // namespace spikekg
