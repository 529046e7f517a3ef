// Acceptance gates. `acceptance <criterion>` trains the shipped config for that
// criterion, evaluates it and prints one PASS/FAIL line. Exit status 0 = pass.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "spikekg/config.hpp"
#include "spikekg/error.hpp"
#include "spikekg/eval.hpp"
#include "spikekg/kg.hpp"
#include "spikekg/train.hpp"

using namespace spikekg;

namespace {

// Tolerances, pinned.
constexpr double kUmlsSpikteMrr = 0.75;
constexpr double kUmlsSpikteHits3 = 0.88;
constexpr double kUmlsTranseMrr = 0.75;
constexpr double kKinshipsSymMrr = 0.40;
constexpr double kKinshipsRescalMrr = 0.70;
constexpr double kNeuronMrr = 0.70;
constexpr double kNeuronCvLo = 0.5;
constexpr double kNeuronCvHi = 1.1;
constexpr std::size_t kZacharySeeds = 5;
constexpr std::size_t kZacharyMaxMismatches = 2;
constexpr double kSweepMinDrop = 0.02;
constexpr double kSweepSmallStdGap = 0.03;
constexpr double kSweepSmallStd = 1.0;
constexpr double kSweepLargestStd = 16.0;
constexpr double kPropertySeconds = 300.0;

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

ExperimentConfig config(const std::string& name) {
  return load_experiment_config(std::string(SPIKEKG_SOURCE_DIR) + "/configs/" + name + ".cfg");
}

std::string f3(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << v;
  return ss.str();
}

bool report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  return pass;
}

struct Run {
  TrainResult result;
  RankReport test;
};

Run train_and_test(const ExperimentConfig& cfg) {
  const auto kg = resolve_dataset(cfg.dataset);
  Run r{train(kg, cfg.train), {}};
  r.test = evaluate(*r.result.model, kg.test, kg.filter, threads());
  return r;
}

std::string summary(const Run& r) {
  return "test MRR " + f3(r.test.mrr) + ", hits@1 " + f3(r.test.hits1) + ", hits@3 " +
         f3(r.test.hits3) + " (best epoch " + std::to_string(r.result.best_epoch) + ")";
}

bool umls_spikte() {
  const auto r = train_and_test(config("umls_spikte"));
  return report("umls_spikte",
                r.test.mrr >= kUmlsSpikteMrr && r.test.hits3 >= kUmlsSpikteHits3,
                summary(r) + "; need MRR >= " + f3(kUmlsSpikteMrr) + " and hits@3 >= " +
                    f3(kUmlsSpikteHits3));
}

bool umls_transe() {
  auto cfg = config("umls_transe");
  const auto r = train_and_test(cfg);
  const bool pass = report("umls_transe", r.test.mrr >= kUmlsTranseMrr,
                           summary(r) + "; need MRR >= " + f3(kUmlsTranseMrr));
  // Not a gate: the same row with a unit margin, for comparison.
  cfg.train.margin = 1.0;
  const auto m1 = train_and_test(cfg);
  std::cout << "note umls_transe with margin 1: " << summary(m1) << std::endl;
  return pass;
}

bool kinships_spikte_sym() {
  auto cfg = config("kinships_spikte_sym");
  const auto r = train_and_test(cfg);
  const bool pass = report("kinships_spikte_sym", r.test.mrr >= kKinshipsSymMrr,
                           summary(r) + "; need MRR >= " + f3(kKinshipsSymMrr));
  cfg.train.margin = 1.0;
  std::cout << "note kinships_spikte_sym with margin 1: " << summary(train_and_test(cfg))
            << std::endl;
  return pass;
}

bool kinships_rescal() {
  const auto r = train_and_test(config("kinships_rescal"));
  return report("kinships_rescal", r.test.mrr >= kKinshipsRescalMrr,
                summary(r) + "; need MRR >= " + f3(kKinshipsRescalMrr));
}

bool umls_neuron() {
  auto cfg = config("umls_neuron");
  const auto r = train_and_test(cfg);
  const auto st = isi_statistics(*r.result.model);
  const bool cv_ok = st.cv >= kNeuronCvLo && st.cv <= kNeuronCvHi;
  // Not a gate: learning rate 0.1, as in the other neuron rows.
  cfg.train.learning_rate = 0.1;
  const auto lr = train_and_test(cfg);
  std::cout << "note umls_neuron with learning rate 0.1: " << summary(lr) << ", CV "
            << f3(isi_statistics(*lr.result.model).cv) << std::endl;
  return report("umls_neuron", r.test.mrr >= kNeuronMrr && cv_ok,
                summary(r) + ", CV " + f3(st.cv) + " (uncorrected " + f3(st.cv_uncorrected) +
                    "); need MRR >= " + f3(kNeuronMrr) + " and CV in [" + f3(kNeuronCvLo) + ", " +
                    f3(kNeuronCvHi) + "]");
}

bool zachary() {
  auto cfg = config("zachary_spikte");
  const auto kg = resolve_dataset("zachary");
  const auto rel = kg.relations.at("interact");
  std::size_t best = kg.num_entities();
  std::ostringstream per_seed;
  for (std::size_t i = 0; i < kZacharySeeds; ++i) {
    cfg.train.seed = i;
    const auto r = train(kg, cfg.train);
    const auto c = predict_communities(*r.model, kg.groups, rel, kg.entities.at("1"),
                                       kg.entities.at("34"), 1, 34);
    const auto wrong = c.mismatches.size() + c.unresolved.size();
    per_seed << (i ? " " : "") << wrong;
    best = std::min(best, wrong);
  }
  return report("zachary", best <= kZacharyMaxMismatches,
                "mismatches per seed [" + per_seed.str() + "], best " + std::to_string(best) +
                    "; need best <= " + std::to_string(kZacharyMaxMismatches));
}

bool length_sweep_check() {
  const auto cfg = config("umls_spikte");
  const auto kg = resolve_dataset(cfg.dataset);
  const auto fixed = train_and_test(cfg);
  const std::vector<double> stds{0.0, kSweepSmallStd, 2.0, 4.0, 8.0, kSweepLargestStd};
  const auto rows = length_sweep(kg, cfg.train, stds, "test", threads());
  std::map<double, double> mrr;
  std::ostringstream table;
  for (const auto& row : rows) {
    mrr[row.std_dev] = row.report.mrr;
    table << " std " << row.std_dev << ": " << f3(row.report.mrr);
  }
  const double drop = mrr[0.0] - mrr[kSweepLargestStd];
  const double gap = std::abs(mrr[kSweepSmallStd] - fixed.test.mrr);
  return report("length_sweep", drop >= kSweepMinDrop && gap <= kSweepSmallStdGap,
                "fixed " + f3(fixed.test.mrr) + ";" + table.str() + "; drop " + f3(drop) +
                    " (need >= " + f3(kSweepMinDrop) + "), small-std gap " + f3(gap) +
                    " (need <= " + f3(kSweepSmallStdGap) + ")");
}

// Runs the property test cases of the unit suite and times them.
bool properties() {
  const std::string cases =
      "*central differences*,*oracle*,*refractory offsets leave scores*,"
      "*stay ordered*,*closed form*,*bisection*";
  const std::string cmd = std::string(SPIKEKG_UNIT_TESTS) + " --test-case=\"" + cases + "\"";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report("properties", rc == 0 && secs < kPropertySeconds,
                std::string(rc == 0 ? "all property cases pass" : "property failures") + " in " +
                    f3(secs) + " s; need < " + f3(kPropertySeconds) + " s");
}

bool not_gated() {
  // Large-graph rows ship as configs so they can be run by hand; they are not
  // gates, and the private IAD data is unavailable.
  for (auto name : {"fb15k237_spikte", "fb15k237_transe", "fb15k237_rescal", "iad_spikte",
                    "iad_transe", "iad_rescal", "iad_neuron"})
    config(name);
  return report("not_gated", true,
                "FB15k-237 and CoDEx-S are not gates (configs parse, data not bundled); "
                "IAD is private and not reproducible");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<bool()>> criteria{
      {"umls_spikte", umls_spikte},
      {"umls_transe", umls_transe},
      {"kinships_spikte_sym", kinships_spikte_sym},
      {"kinships_rescal", kinships_rescal},
      {"umls_neuron", umls_neuron},
      {"zachary", zachary},
      {"length_sweep", length_sweep_check},
      {"properties", properties},
      {"not_gated", not_gated},
  };
  if (argc != 2 || !criteria.count(argv[1])) {
    std::cerr << "usage: acceptance <criterion>\ncriteria:";
    for (const auto& [name, fn] : criteria) std::cerr << ' ' << name;
    std::cerr << '\n';
    return 2;
  }
  try {
    return criteria.at(argv[1])() ? 0 : 1;
  } catch (const std::exception& e) {
    report(argv[1], false, std::string("error: ") + e.what());
    return 1;
  }
}
