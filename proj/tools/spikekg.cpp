// spikekg command-line front end.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikekg/checkpoint.hpp"
#include "spikekg/config.hpp"
#include "spikekg/error.hpp"
#include "spikekg/eval.hpp"
#include "spikekg/kg.hpp"
#include "spikekg/neuron.hpp"
#include "spikekg/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spikekg;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output;
};

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

ExperimentConfig resolved_config(const std::string& path, const Globals& g) {
  auto cfg = load_experiment_config(path);
  if (g.seed) cfg.train.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.output) cfg.output = *g.output;
  return cfg;
}

unsigned threads_or(const Globals& g, unsigned fallback) { return g.threads.value_or(fallback); }

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

json epoch_json(const EpochRecord& r) {
  json j = {{"epoch", r.epoch}, {"train_loss", r.train_loss}};
  if (r.validated) {
    j["valid_mrr"] = r.valid_mrr;
    j["valid_hits1"] = r.valid_hits1;
    j["valid_hits3"] = r.valid_hits3;
  } else {
    j["valid_mrr"] = nullptr;
    j["valid_hits1"] = nullptr;
    j["valid_hits3"] = nullptr;
  }
  if (r.skipped_pairs) j["skipped_pairs"] = r.skipped_pairs;
  return j;
}

json report_json(const RankReport& r, const KnowledgeGraph& kg, const std::string& split) {
  json ranks = json::array();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& t = r.triples[i];
    ranks.push_back({{"subject", kg.entities.label(t.subject)},
                     {"predicate", kg.relations.label(t.predicate)},
                     {"object", kg.entities.label(t.object)},
                     {"subject_rank", r.subject_ranks[i]},
                     {"object_rank", r.object_ranks[i]}});
  }
  return {{"dataset", kg.name}, {"split", split},      {"triples", r.size()},
          {"mrr", r.mrr},       {"hits1", r.hits1},    {"hits3", r.hits3},
          {"hits10", r.hits10}, {"ranks", ranks}};
}

json summary_json(const RankReport& r) {
  return {{"triples", r.size()}, {"mrr", r.mrr}, {"hits1", r.hits1}, {"hits3", r.hits3},
          {"hits10", r.hits10}};
}

// Spike trains as CSV, one row per spike with its refractory window.
void write_spike_csv(std::ostream& out, const Model& model, const Vocabulary& entities,
                     const std::vector<EntityId>& ids) {
  const double tau = model.spec().tau_ref;
  out << "entity,spike,time,refractory_start,refractory_end\n";
  for (EntityId e : ids) {
    const auto train = model.spike_train(e);
    for (std::size_t i = 0; i < train.size(); ++i)
      out << entities.label(e) << ',' << i << ',' << fmt(train[i]) << ',' << fmt(train[i]) << ','
          << fmt(train[i] + tau) << '\n';
  }
}

TrainResult run_training(const ExperimentConfig& cfg, const KnowledgeGraph& kg,
                         std::ostream* metrics) {
  return train(kg, cfg.train, [&](const EpochRecord& r) {
    if (metrics) *metrics << epoch_json(r).dump() << '\n' << std::flush;
  });
}

json training_meta(const ExperimentConfig& cfg, const TrainResult& res) {
  return {{"dataset", cfg.dataset},
          {"seed", cfg.train.seed},
          {"best_epoch", res.best_epoch},
          {"best_valid_mrr", res.best_valid_mrr},
          {"epochs_run", res.log.size()},
          {"config", to_config_text(cfg)}};
}

// ---------------------------------------------------------------- commands

int cmd_train(const std::string& config_path, const Globals& g) {
  const auto cfg = resolved_config(config_path, g);
  const auto kg = resolve_dataset(cfg.dataset);
  const auto dir = ensure_dir(cfg.output);
  open_out(dir / "config.txt") << to_config_text(cfg);
  auto metrics = open_out(dir / "metrics.jsonl");
  const auto res = run_training(cfg, kg, &metrics);
  save_checkpoint(dir / "checkpoint.json", *res.model, kg.entities, kg.relations,
                  training_meta(cfg, res));
  std::cerr << "trained " << to_string(cfg.train.model) << " on " << cfg.dataset << ": "
            << res.log.size() << " epochs, best epoch " << res.best_epoch << ", valid MRR "
            << res.best_valid_mrr << "\nwrote " << (dir / "checkpoint.json").string() << '\n';
  return 0;
}

KnowledgeGraph dataset_for(const Checkpoint& ck, const std::string& override_name) {
  std::string name = override_name;
  if (name.empty()) name = ck.meta.value("dataset", "");
  if (name.empty())
    throw ConfigError("checkpoint does not record its dataset; pass --dataset");
  auto kg = resolve_dataset(name);
  require_same_vocabulary(ck, kg);
  return kg;
}

int cmd_eval(const std::string& ckpt_path, const std::string& split, const std::string& dataset,
             const Globals& g) {
  if (split != "valid" && split != "test") throw ConfigError("--split must be valid or test");
  const auto ck = load_checkpoint(ckpt_path);
  const auto kg = dataset_for(ck, dataset);
  const auto report = evaluate(*ck.model, kg.split(split), kg.filter, threads_or(g, 1));
  std::cout << summary_json(report).dump(1) << '\n';
  if (g.output) {
    const auto dir = ensure_dir(*g.output);
    open_out(dir / ("report_" + split + ".json")) << report_json(report, kg, split).dump(1) << '\n';
  }
  return 0;
}

// Accepts "(s, p, ?)" or "(?, p, o)"; parentheses and spaces are optional.
struct Pattern {
  std::string subject, predicate, object;
};

Pattern parse_pattern(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != '(' && c != ')') s += c;
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (parts.size() != 3 || ((parts[0] == "?") == (parts[2] == "?")) || parts[1] == "?")
    throw ConfigError("pattern must be '(s, p, ?)' or '(?, p, o)', got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

int cmd_query(const std::string& ckpt_path, const std::string& pattern, std::size_t top_k,
              const std::string& dataset) {
  const auto ck = load_checkpoint(ckpt_path);
  const auto kg = dataset_for(ck, dataset);
  const auto pat = parse_pattern(pattern);
  const Side side = pat.object == "?" ? Side::object : Side::subject;
  Triple t;
  t.predicate = kg.relations.at(pat.predicate);
  if (side == Side::object)
    t.subject = kg.entities.at(pat.subject);
  else
    t.object = kg.entities.at(pat.object);
  ck.model->require_usable();
  std::vector<double> scores(kg.num_entities());
  ck.model->score_candidates(t, side, scores);
  std::vector<EntityId> order(kg.num_entities());
  std::iota(order.begin(), order.end(), EntityId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](EntityId a, EntityId b) { return scores[a] > scores[b]; });
  auto known = [&](EntityId e) {
    Triple c = t;
    (side == Side::object ? c.object : c.subject) = e;
    return kg.filter.contains(c);
  };
  const std::size_t n = order.size();
  const std::size_t k = std::min(top_k, n);
  auto print_row = [&](std::size_t pos) {
    const EntityId e = order[pos];
    std::cout << pos + 1 << '\t' << kg.entities.label(e) << '\t' << fmt(scores[e]) << '\t'
              << (known(e) ? "known" : "") << '\n';
  };
  std::cout << "# top " << k << " for " << pattern << "\nrank\tentity\tscore\tknown_true\n";
  for (std::size_t i = 0; i < k; ++i) print_row(i);
  const std::size_t bottom_start = std::max(k, n - std::min(top_k, n));
  if (bottom_start < n) {
    std::cout << "# bottom " << n - bottom_start << "\nrank\tentity\tscore\tknown_true\n";
    for (std::size_t i = bottom_start; i < n; ++i) print_row(i);
  }
  return 0;
}

struct ClusterRun {
  std::uint64_t seed;
  TrainResult result;
  CommunityResult community;
};

ClusterRun cluster_once(const ExperimentConfig& cfg, const KnowledgeGraph& kg, std::uint64_t seed) {
  auto c = cfg.train;
  c.seed = seed;
  ClusterRun run{seed, train(kg, c), {}};
  const auto rel = kg.relations.at("interact");
  run.community = predict_communities(*run.result.model, kg.groups, rel, kg.entities.at("1"),
                                      kg.entities.at("34"), 1, 34);
  return run;
}

int cmd_cluster(const std::string& config_path, std::size_t seeds, const Globals& g) {
  auto cfg = resolved_config(config_path, g);
  if (cfg.dataset != "zachary") throw ConfigError("cluster needs dataset = zachary");
  const auto kg = resolve_dataset(cfg.dataset);
  if (std::find(cfg.train.frozen_relations.begin(), cfg.train.frozen_relations.end(),
                "interact") == cfg.train.frozen_relations.end())
    cfg.train.frozen_relations.push_back("interact");

  std::vector<ClusterRun> runs;
  for (std::size_t i = 0; i < std::max<std::size_t>(seeds, 1); ++i)
    runs.push_back(cluster_once(cfg, kg, cfg.train.seed + i));
  const auto best = std::min_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return a.community.mismatches.size() + a.community.unresolved.size() <
           b.community.mismatches.size() + b.community.unresolved.size();
  });
  const auto& com = best->community;

  std::cout << "member\tpredicted\ttruth\n";
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    const auto& a = com.assignment[e];
    std::cout << kg.entities.label(e) << '\t' << (a ? std::to_string(*a) : "tie") << '\t'
              << kg.groups[e] << (a && static_cast<std::uint32_t>(*a) == kg.groups[e] ? "" : "\t*")
              << '\n';
  }
  std::cout << "mismatches\t" << com.mismatches.size() << "\nunresolved\t" << com.unresolved.size()
            << "\naccuracy\t" << com.accuracy << "\nseed\t" << best->seed << '\n';
  if (runs.size() > 1) {
    std::vector<std::size_t> counts;
    std::cout << "# seed sweep\nseed\tmismatches\n";
    for (const auto& r : runs) {
      counts.push_back(r.community.mismatches.size() + r.community.unresolved.size());
      std::cout << r.seed << '\t' << counts.back() << '\n';
    }
    std::sort(counts.begin(), counts.end());
    std::cout << "median\t" << counts[counts.size() / 2] << "\nbest\t" << counts.front() << '\n';
  }

  const auto dir = ensure_dir(cfg.output);
  std::vector<EntityId> all(kg.num_entities());
  std::iota(all.begin(), all.end(), EntityId{0});
  auto spikes = open_out(dir / "spikes.csv");
  write_spike_csv(spikes, *best->result.model, kg.entities, all);
  auto table = open_out(dir / "assignments.csv");
  table << "member,predicted,truth\n";
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    const auto& a = com.assignment[e];
    table << kg.entities.label(e) << ',' << (a ? std::to_string(*a) : "") << ',' << kg.groups[e]
          << '\n';
  }
  return 0;
}

int cmd_spikes(const std::string& ckpt_path, const std::vector<std::string>& labels, double dt,
               const Globals& g) {
  const auto ck = load_checkpoint(ckpt_path);
  if (!ck.model->is_spike_model())
    throw ConfigError(std::string(to_string(ck.model->kind())) + " checkpoints have no spike trains");
  std::vector<EntityId> ids;
  if (labels.empty()) {
    ids.resize(ck.entities.size());
    std::iota(ids.begin(), ids.end(), EntityId{0});
  }
  for (const auto& l : labels) ids.push_back(ck.entities.at(l));

  const auto* neuron = dynamic_cast<const NeuronModel*>(ck.model.get());
  if (!g.output) {
    write_spike_csv(std::cout, *ck.model, ck.entities, ids);
    return 0;
  }
  const auto dir = ensure_dir(*g.output);
  auto out = open_out(dir / "spikes.csv");
  write_spike_csv(out, *ck.model, ck.entities, ids);
  if (neuron) {
    auto tr = open_out(dir / "traces.csv");
    tr << "entity,t,u,refractory\n";
    const auto& cfg = ck.model->spec().neuron;
    for (EntityId e : ids) {
      const auto train = neuron->spike_train(e);
      for (const auto& [t, u] : membrane_trace(neuron->weights(e), neuron->inputs(), cfg, dt)) {
        bool refractory = false;
        for (double s : train) refractory |= (t > s && t < s + cfg.tau_ref);
        tr << ck.entities.label(e) << ',' << fmt(t) << ',' << fmt(u) << ',' << refractory << '\n';
      }
    }
  }
  return 0;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("--std: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--std: empty list");
  return out;
}

int cmd_sweep(const std::string& config_path, const std::string& std_list, const std::string& split,
              const Globals& g) {
  const auto cfg = resolved_config(config_path, g);
  const auto kg = resolve_dataset(cfg.dataset);
  const auto sds = parse_list(std_list);
  const auto rows = length_sweep(kg, cfg.train, sds, split, cfg.threads);
  const auto dir = ensure_dir(cfg.output);
  auto out = open_out(dir / "sweep.csv");
  std::ostringstream table;
  table << "std_dev,mean_length,mrr,hits1,hits3,hits10\n";
  for (const auto& r : rows)
    table << fmt(r.std_dev) << ',' << fmt(r.mean_length) << ',' << fmt(r.report.mrr) << ','
          << fmt(r.report.hits1) << ',' << fmt(r.report.hits3) << ',' << fmt(r.report.hits10)
          << '\n';
  out << table.str();
  std::cout << table.str();
  return 0;
}

int cmd_stats_isi(const std::string& ckpt_path, std::size_t bins, const Globals& g) {
  const auto ck = load_checkpoint(ckpt_path);
  const auto st = isi_statistics(*ck.model);
  json j = {{"intervals", st.isis.size()}, {"mean", st.mean},
            {"std_dev", st.std_dev},       {"tau_ref", ck.model->spec().tau_ref},
            {"cv", st.cv},                 {"cv_uncorrected", st.cv_uncorrected}};
  std::cout << j.dump(1) << '\n';
  if (g.output) {
    const auto dir = ensure_dir(*g.output);
    open_out(dir / "isi_stats.json") << j.dump(1) << '\n';
    auto out = open_out(dir / "isi_histogram.csv");
    out << "lo,hi,count\n";
    for (const auto& b : histogram(st.isis, bins))
      out << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike-train knowledge-graph embeddings"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "override the config's RNG seed");
  app.add_option("--threads", g.threads, "evaluation worker cap (1 = sequential)")
      ->check(CLI::PositiveNumber);
  app.add_option("--output", g.output, "output directory");

  std::string config, checkpoint, split = "test", dataset, pattern, std_list = "0,1,2,4,8,16";
  std::size_t top_k = 10, seeds = 1, bins = 30;
  double dt = 1e-3;
  std::vector<std::string> labels;

  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", config)->required();

  auto* eval_cmd = app.add_subcommand("eval", "filtered MRR / hits@k of a checkpoint");
  eval_cmd->add_option("checkpoint", checkpoint)->required();
  eval_cmd->add_option("--split", split, "valid or test");
  eval_cmd->add_option("--dataset", dataset, "override the dataset recorded in the checkpoint");

  auto* query_cmd = app.add_subcommand("query", "rank completions of '(s, p, ?)' or '(?, p, o)'");
  query_cmd->add_option("checkpoint", checkpoint)->required();
  query_cmd->add_option("pattern", pattern)->required();
  query_cmd->add_option("--top-k", top_k);
  query_cmd->add_option("--dataset", dataset);

  auto* cluster_cmd = app.add_subcommand("cluster", "community prediction on the karate club");
  cluster_cmd->add_option("--config", config)->required();
  cluster_cmd->add_option("--seeds", seeds, "train this many consecutive seeds, keep the best");

  auto* spikes_cmd = app.add_subcommand("spikes", "dump spike trains (and membrane traces)");
  spikes_cmd->add_option("checkpoint", checkpoint)->required();
  spikes_cmd->add_option("entities", labels, "entity labels (default: all)");
  spikes_cmd->add_option("--dt", dt, "membrane trace resolution");

  auto* sweep_cmd = app.add_subcommand("sweep-length", "retrain with variable-length trains");
  sweep_cmd->add_option("--config", config)->required();
  sweep_cmd->add_option("--std", std_list, "comma-separated std devs of the spike count");
  sweep_cmd->add_option("--split", split);

  auto* isi_cmd = app.add_subcommand("stats-isi", "interspike-interval statistics");
  isi_cmd->add_option("checkpoint", checkpoint)->required();
  isi_cmd->add_option("--bins", bins);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*train_cmd) return cmd_train(config, g);
    if (*eval_cmd) return cmd_eval(checkpoint, split, dataset, g);
    if (*query_cmd) return cmd_query(checkpoint, pattern, top_k, dataset);
    if (*cluster_cmd) return cmd_cluster(config, seeds, g);
    if (*spikes_cmd) return cmd_spikes(checkpoint, labels, dt, g);
    if (*sweep_cmd) return cmd_sweep(config, std_list, split, g);
    if (*isi_cmd) return cmd_stats_isi(checkpoint, bins, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::data);
  }
  return static_cast<int>(ExitCode::usage);
}
