#include "spikekg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "spikekg/error.hpp"
#include "spikekg/train.hpp"

namespace spikekg {

double rank_from_scores(std::span<const double> scores, EntityId target,
                        std::span<const EntityId> known_true) {
  const double own = scores[target];
  std::size_t greater = 0;
  std::size_t equal = 0;
  for (EntityId e = 0; e < scores.size(); ++e) {
    if (e == target) continue;
    if (scores[e] > own)
      ++greater;
    else if (scores[e] == own)
      ++equal;
  }
  // Undo the contribution of filtered candidates (known-true, other than target).
  for (EntityId e : known_true) {
    if (e == target) continue;
    if (scores[e] > own)
      --greater;
    else if (scores[e] == own)
      --equal;
  }
  // Mean of optimistic (1 + greater) and pessimistic (1 + greater + equal).
  return 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(equal);
}

namespace {

std::span<const EntityId> known_for(const FilterIndex& filter, const Triple& t, Side side) {
  return side == Side::object ? filter.objects(t.subject, t.predicate)
                              : filter.subjects(t.predicate, t.object);
}

}  // namespace

double rank_triple(const Model& model, const Triple& t, Side side, const FilterIndex& filter) {
  for (EntityId e : {t.subject, t.object})
    if (!model.usable(e))
      throw SilentNeuronError("entity " + std::to_string(e) + " has a silent neuron slot");
  std::vector<double> scores(model.num_entities());
  model.score_candidates(t, side, scores);
  return rank_from_scores(scores, side == Side::object ? t.object : t.subject,
                          known_for(filter, t, side));
}

void aggregate_ranks(RankReport& r) {
  double rr = 0.0, h1 = 0.0, h3 = 0.0, h10 = 0.0;
  for (const auto* ranks : {&r.subject_ranks, &r.object_ranks}) {
    for (double k : *ranks) {
      rr += 1.0 / k;
      h1 += k <= 1.0;
      h3 += k <= 3.0;
      h10 += k <= 10.0;
    }
  }
  const double n = static_cast<double>(r.subject_ranks.size() + r.object_ranks.size());
  if (n == 0.0) {
    r.mrr = r.hits1 = r.hits3 = r.hits10 = 0.0;
    return;
  }
  r.mrr = rr / n;
  r.hits1 = h1 / n;
  r.hits3 = h3 / n;
  r.hits10 = h10 / n;
}

RankReport evaluate(const Model& model, std::span<const Triple> triples, const FilterIndex& filter,
                    unsigned threads) {
  if (triples.empty()) throw ConfigError("evaluation set is empty");
  model.require_usable();
  RankReport report;
  report.triples.assign(triples.begin(), triples.end());
  report.subject_ranks.assign(triples.size(), 0.0);
  report.object_ranks.assign(triples.size(), 0.0);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores(model.num_entities());
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = triples[i];
      model.score_candidates(t, Side::subject, scores);
      report.subject_ranks[i] =
          rank_from_scores(scores, t.subject, known_for(filter, t, Side::subject));
      model.score_candidates(t, Side::object, scores);
      report.object_ranks[i] =
          rank_from_scores(scores, t.object, known_for(filter, t, Side::object));
    }
  };

  const std::size_t n = triples.size();
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  aggregate_ranks(report);
  return report;
}

CommunityResult predict_communities(const Model& model, std::span<const std::uint32_t> truth,
                                    RelationId relation, EntityId head_a, EntityId head_b,
                                    int group_a, int group_b) {
  CommunityResult out;
  const auto n = model.num_entities();
  out.assignment.resize(n);
  std::size_t correct = 0;
  for (EntityId s = 0; s < n; ++s) {
    std::optional<int> g;
    if (s == head_a) {
      g = group_a;
    } else if (s == head_b) {
      g = group_b;
    } else {
      const double sa = model.score({s, relation, head_a});
      const double sb = model.score({s, relation, head_b});
      if (sa > sb)
        g = group_a;
      else if (sb > sa)
        g = group_b;
    }
    out.assignment[s] = g;
    if (!g) {
      out.unresolved.push_back(s);
    } else if (s < truth.size()) {
      if (static_cast<int>(truth[s]) == *g)
        ++correct;
      else
        out.mismatches.push_back(s);
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return out;
}

IsiStats isi_statistics(std::span<const std::vector<double>> trains, double tau_ref) {
  IsiStats st;
  for (const auto& t : trains)
    for (std::size_t i = 1; i < t.size(); ++i) st.isis.push_back(t[i] - t[i - 1]);
  if (st.isis.empty()) throw UndefinedStatisticError("ISI statistics need spike trains with >= 2 spikes");
  const double n = static_cast<double>(st.isis.size());
  st.mean = std::accumulate(st.isis.begin(), st.isis.end(), 0.0) / n;
  double var = 0.0;
  for (double v : st.isis) var += (v - st.mean) * (v - st.mean);
  st.std_dev = std::sqrt(var / n);
  if (!(st.mean > tau_ref))
    throw UndefinedStatisticError("mean ISI does not exceed the refractory period; CV undefined");
  st.cv = st.std_dev / (st.mean - tau_ref);
  st.cv_uncorrected = st.std_dev / st.mean;
  return st;
}

IsiStats isi_statistics(const Model& model) {
  if (!model.is_spike_model()) throw ConfigError("ISI statistics need a spike-train model");
  std::vector<std::vector<double>> trains;
  trains.reserve(model.num_entities());
  for (EntityId e = 0; e < model.num_entities(); ++e) trains.push_back(model.spike_train(e));
  return isi_statistics(trains, model.spec().tau_ref);
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0 || values.empty()) return {};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double width = (*mx > lo) ? (*mx - lo) / static_cast<double>(bins) : 1.0;
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

std::vector<SweepRow> length_sweep(const KnowledgeGraph& kg, const TrainConfig& cfg,
                                   std::span<const double> std_devs, const std::string& split,
                                   unsigned threads) {
  if (cfg.model != ModelKind::spikte) throw ConfigError("length sweep needs model = spikte");
  std::vector<SweepRow> rows;
  for (double sd : std_devs) {
    TrainConfig c = cfg;
    c.length_std = sd;
    c.score_kind = ScoreKind::asym;
    auto result = train(kg, c);
    SweepRow row;
    row.std_dev = sd;
    const auto& lengths = result.model->spec().lengths;
    row.mean_length = lengths.empty()
                          ? static_cast<double>(c.dim)
                          : static_cast<double>(std::accumulate(lengths.begin(), lengths.end(),
                                                                std::size_t{0})) /
                                static_cast<double>(lengths.size());
    row.report = evaluate(*result.model, kg.split(split), kg.filter, threads);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spikekg
