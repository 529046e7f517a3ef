#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikekg/kg.hpp"
#include "spikekg/model.hpp"

namespace spikekg {

struct TrainConfig;

// Filtered link-prediction metrics over both corruption sides.
struct RankReport {
  std::vector<Triple> triples;
  std::vector<double> subject_ranks;
  std::vector<double> object_ranks;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;

  std::size_t size() const { return triples.size(); }
};

// Realistic rank (ties averaged) of `t` among all replacements on `side`,
// skipping replacements that form other known-true triples.
double rank_triple(const Model& model, const Triple& t, Side side, const FilterIndex& filter);

// Same, from precomputed candidate scores (scores[e] for replacement e).
double rank_from_scores(std::span<const double> scores, EntityId target,
                        std::span<const EntityId> known_true);

// `threads` <= 1 runs sequentially; results are identical either way.
RankReport evaluate(const Model& model, std::span<const Triple> triples, const FilterIndex& filter,
                    unsigned threads = 1);

// Aggregates MRR and hits@{1,3,10} from per-side ranks.
void aggregate_ranks(RankReport& report);

struct CommunityResult {
  // Predicted group per entity (1 or 34); nullopt when both heads score equal.
  std::vector<std::optional<int>> assignment;
  std::vector<EntityId> mismatches;  // wrong group vs ground truth
  std::vector<EntityId> unresolved;  // exact score ties
  double accuracy = 0.0;             // correct / all
};

// Member s joins head_a's group if score(s, rel, head_a) > score(s, rel, head_b).
CommunityResult predict_communities(const Model& model, std::span<const std::uint32_t> truth,
                                    RelationId relation = 0, EntityId head_a = 0,
                                    EntityId head_b = 33, int group_a = 1, int group_b = 34);

struct IsiStats {
  std::vector<double> isis;  // pooled interspike intervals
  double mean = 0.0;
  double std_dev = 0.0;      // population standard deviation
  double cv = 0.0;           // std / (mean - tau_ref)
  double cv_uncorrected = 0.0;
};

IsiStats isi_statistics(std::span<const std::vector<double>> trains, double tau_ref);
IsiStats isi_statistics(const Model& model);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

struct SweepRow {
  double std_dev = 0.0;
  double mean_length = 0.0;
  RankReport report;
};

// Retrains SpikTE once per std dev with per-entity spike counts drawn around
// cfg.dim, scoring with the truncated score, and evaluates on `split`.
std::vector<SweepRow> length_sweep(const KnowledgeGraph& kg, const TrainConfig& cfg,
                                   std::span<const double> std_devs,
                                   const std::string& split = "test", unsigned threads = 1);

}  // namespace spikekg
