#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spikekg/error.hpp"
#include "spikekg/train.hpp"

using namespace spikekg;
using doctest::Approx;

namespace {

KnowledgeGraph small_graph() {
  KnowledgeGraph kg;
  for (int i = 0; i < 5; ++i) kg.entities.intern("e" + std::to_string(i));
  kg.relations.intern("a");
  kg.relations.intern("b");
  kg.train = {{0, 0, 1}, {1, 0, 2}, {2, 1, 3}, {3, 1, 4}, {4, 0, 0}, {1, 1, 1}};
  kg.filter = build_filter_index(kg);
  return kg;
}

TrainConfig base_config(ModelKind kind) {
  TrainConfig cfg;
  cfg.model = kind;
  cfg.dim = 4;
  cfg.num_negatives = 3;
  cfg.tau_ref = 0.03;
  cfg.neuron.input_size = 4;
  cfg.neuron.tau_ref = 0.03;
  return cfg;
}

// Analytic batch gradient vs central differences of the batch loss.
void check_batch_gradient(const TrainConfig& cfg, std::uint64_t seed) {
  const auto kg = small_graph();
  std::mt19937_64 rng(seed);
  auto model = init_model(kg, cfg, rng);
  if (cfg.model == ModelKind::neuron) {
    // keep every slot firing well above threshold
    std::normal_distribution<double> w(0.8, 0.3);
    for (auto& v : model->param("weights").value) v = w(rng);
    model->refresh();
  }
  std::vector<std::vector<Triple>> negs;
  for (const auto& t : kg.train) negs.push_back(sample_negatives(t, cfg.num_negatives, 5, rng));
  batch_loss_and_grad(*model, kg.train, negs, cfg);
  std::vector<std::vector<double>> analytic;
  for (const auto& p : model->params()) analytic.push_back(p.grad);

  auto loss_at = [&](std::size_t tensor, std::size_t idx, double v) {
    auto& x = model->params()[tensor].value[idx];
    const double saved = x;
    x = v;
    model->refresh();
    const double l = batch_loss_and_grad(*model, kg.train, negs, cfg).loss;
    x = saved;
    model->refresh();
    return l;
  };
  std::size_t checked = 0;
  for (std::size_t ti = 0; ti < model->params().size(); ++ti) {
    const auto& p = model->params()[ti];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double x0 = p.value[i], h = 1e-6;
      const double fd = (loss_at(ti, i, x0 + h) - loss_at(ti, i, x0 - h)) / (2 * h);
      const double an = analytic[ti][i];
      INFO(to_string(cfg.model), " ", p.name, "[", i, "] analytic ", an, " fd ", fd);
      CHECK(std::abs(an - fd) <= 1e-3 * std::max(std::abs(fd), 1e-3));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

}  // namespace

TEST_CASE("negative sampler corrupts one side uniformly") {
  std::mt19937_64 rng(31);
  const Triple t{3, 0, 7};
  std::size_t subject_side = 0;
  const std::size_t n = 100000;
  std::vector<std::size_t> hits(10, 0);
  for (const auto& c : sample_negatives(t, n, 10, rng)) {
    const bool s = c.subject != t.subject, o = c.object != t.object;
    REQUIRE(s != o);
    subject_side += s;
    ++hits[s ? c.subject : c.object];
    CHECK(c.predicate == t.predicate);
  }
  CHECK(std::abs(static_cast<double>(subject_side) / n - 0.5) < 0.01);
  // each side draws uniformly from the other nine entities
  for (std::size_t e = 0; e < 10; ++e) {
    const double expected = (e == 3 || e == 7) ? n / 18.0 : n / 9.0;
    CHECK(std::abs(static_cast<double>(hits[e]) - expected) < 0.1 * expected);
  }
  std::mt19937_64 rng2(32);
  for (const auto& c : sample_negatives({0, 0, 1}, 100, 2, rng2))
    CHECK(((c.subject == 1 && c.object == 1) || (c.subject == 0 && c.object == 0)));
  CHECK_THROWS_AS(sample_negatives(t, 1, 1, rng2), ConfigError);
}

TEST_CASE("assembled loss gradients match central differences") {
  std::uint64_t seed = 40;
  for (auto kind : {ModelKind::spikte, ModelKind::transe, ModelKind::rescal, ModelKind::neuron})
    for (auto loss : {LossKind::margin, LossKind::soft_margin, LossKind::bce, LossKind::mse})
      for (auto pairing : {NegativePairing::own, NegativePairing::batch}) {
        if (!is_pairwise(loss) && pairing == NegativePairing::batch) continue;
        auto cfg = base_config(kind);
        cfg.loss = loss;
        cfg.pairing = pairing;
        // a wide margin keeps every hinge active so the loss is smooth
        cfg.margin = loss == LossKind::margin ? 50.0 : 0.5;
        cfg.l2 = 1e-2;
        CAPTURE(to_string(loss));
        CAPTURE(to_string(pairing));
        check_batch_gradient(cfg, ++seed);
      }
  auto sym = base_config(ModelKind::spikte);
  sym.score_kind = ScoreKind::sym;
  sym.loss = LossKind::soft_margin;
  check_batch_gradient(sym, 99);
}

TEST_CASE("training a tiny graph drives the loss down") {
  KnowledgeGraph kg;
  for (int i = 0; i < 8; ++i) kg.entities.intern("e" + std::to_string(i));
  kg.relations.intern("r");
  kg.relations.intern("q");
  for (std::uint32_t i = 0; i < 5; ++i) {
    kg.train.push_back({i, 0, i + 1});
    kg.train.push_back({i + 2, 1, i});
  }
  kg.filter = build_filter_index(kg);
  auto cfg = base_config(ModelKind::spikte);
  cfg.dim = 8;
  cfg.margin = 1.0;
  cfg.batch_size = 10;
  cfg.learning_rate = 0.05;
  cfg.max_epochs = 200;
  const auto r = train(kg, cfg);
  REQUIRE(r.log.size() == 200);
  CHECK(r.log.back().train_loss <= 0.1 * r.log.front().train_loss);
}

TEST_CASE("a perfect fit has zero loss and zero gradient at zero margin") {
  KnowledgeGraph kg;
  for (int i = 0; i < 4; ++i) kg.entities.intern("e" + std::to_string(i));
  kg.relations.intern("r");
  kg.train = {{0, 0, 1}};
  auto cfg = base_config(ModelKind::spikte);
  cfg.margin = 0.0;
  std::mt19937_64 rng(50);
  auto model = init_model(kg, cfg, rng);
  const auto ts = model->spike_train(0), to = model->spike_train(1);
  auto delta = model->param("delta").row(0);
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = ts[i] - to[i];
  model->refresh();
  CHECK(std::abs(model->score(kg.train[0])) < 1e-14);
  std::vector<std::vector<Triple>> negs{sample_negatives(kg.train[0], 5, 4, rng)};
  const auto bl = batch_loss_and_grad(*model, kg.train, negs, cfg);
  CHECK(bl.loss == Approx(0.0).scale(1.0).epsilon(1e-14));
  for (const auto& p : model->params())
    for (double g : p.grad) CHECK(std::abs(g) < 1e-14);
}

TEST_CASE("spike trains stay ordered after many optimizer steps") {
  const auto kg = small_graph();
  auto cfg = base_config(ModelKind::spikte);
  cfg.dim = 16;
  std::mt19937_64 rng(51);
  auto model = init_model(kg, cfg, rng);
  auto states = make_adam_states(*model);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int step = 0; step < 1000; ++step) {
    for (auto& p : model->params())
      for (auto& x : p.grad) x = g(rng);
    optimizer_step(*model, states, 0.1);
  }
  for (EntityId e = 0; e < kg.num_entities(); ++e)
    CHECK(is_valid_spike_train(model->spike_train(e), cfg.tau_ref));
}

TEST_CASE("frozen relations stay at zero") {
  auto kg = small_graph();
  auto cfg = base_config(ModelKind::spikte);
  cfg.frozen_relations = {"b"};
  cfg.max_epochs = 20;
  const auto r = train(kg, cfg);
  for (double v : r.model->param("delta").row(1)) CHECK(v == 0.0);
  cfg.frozen_relations = {"nope"};
  CHECK_THROWS_AS(train(kg, cfg), ConfigError);
}

TEST_CASE("training is deterministic given the seed") {
  auto kg = resolve_dataset("umls");
  kg.valid.resize(50);
  auto cfg = base_config(ModelKind::spikte);
  cfg.max_epochs = 3;
  cfg.seed = 9;
  const auto a = train(kg, cfg), b = train(kg, cfg);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].valid_mrr == b.log[i].valid_mrr);
  }
  CHECK(a.model->param("isi").value == b.model->param("isi").value);
  cfg.seed = 10;
  CHECK(train(kg, cfg).log[0].train_loss != a.log[0].train_loss);
}

TEST_CASE("variable spike counts are clamped to [1, dim]") {
  std::mt19937_64 rng(52);
  const auto c = draw_spike_counts(1000, 16, 50.0, rng);
  bool low = false, high = false;
  for (auto n : c) {
    CHECK(n >= 1);
    CHECK(n <= 16);
    low |= n == 1;
    high |= n == 16;
  }
  CHECK((low && high));
  for (auto n : draw_spike_counts(10, 16, 0.0, rng)) CHECK(n == 16);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_negatives = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.length_std = 2.0;
  cfg.model = ModelKind::transe;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(parse_negative_pairing("batch") == NegativePairing::batch);
  CHECK_THROWS_AS(parse_negative_pairing("all"), ConfigError);
}
