#include "spikekg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "spikekg/error.hpp"

namespace spikekg {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(v) + "'");
  return out;
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    auto comma = v.find(',', start);
    if (comma == std::string_view::npos) comma = v.size();
    auto item = trim(v.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset", [](auto& c, auto, auto v) { c.dataset = std::string(v); }},
      {"output", [](auto& c, auto, auto v) { c.output = std::string(v); }},
      {"threads", [](auto& c, auto k, auto v) { c.threads = static_cast<unsigned>(to_uint(k, v)); }},
      {"model", [](auto& c, auto, auto v) { c.train.model = parse_model_kind(v); }},
      {"dim", [](auto& c, auto k, auto v) { c.train.dim = to_uint(k, v); }},
      {"learning_rate", [](auto& c, auto k, auto v) { c.train.learning_rate = to_double(k, v); }},
      {"batch_size", [](auto& c, auto k, auto v) { c.train.batch_size = to_uint(k, v); }},
      {"num_negatives", [](auto& c, auto k, auto v) { c.train.num_negatives = to_uint(k, v); }},
      {"margin", [](auto& c, auto k, auto v) { c.train.margin = to_double(k, v); }},
      {"l2", [](auto& c, auto k, auto v) { c.train.l2 = to_double(k, v); }},
      {"tau_ref", [](auto& c, auto k, auto v) { c.train.tau_ref = to_double(k, v); }},
      {"loss", [](auto& c, auto, auto v) { c.train.loss = parse_loss_kind(v); }},
      {"negative_pairing",
       [](auto& c, auto, auto v) { c.train.pairing = parse_negative_pairing(v); }},
      {"norm_mode", [](auto& c, auto, auto v) { c.train.norm_mode = parse_norm_mode(v); }},
      {"score_kind", [](auto& c, auto, auto v) { c.train.score_kind = parse_score_kind(v); }},
      {"max_epochs", [](auto& c, auto k, auto v) { c.train.max_epochs = to_uint(k, v); }},
      {"patience", [](auto& c, auto k, auto v) { c.train.patience = to_uint(k, v); }},
      {"valid_every", [](auto& c, auto k, auto v) { c.train.valid_every = to_uint(k, v); }},
      {"seed", [](auto& c, auto k, auto v) { c.train.seed = to_uint(k, v); }},
      {"frozen_relations", [](auto& c, auto, auto v) { c.train.frozen_relations = to_list(v); }},
      {"threshold", [](auto& c, auto k, auto v) { c.train.neuron.threshold = to_double(k, v); }},
      {"tau_s", [](auto& c, auto k, auto v) { c.train.neuron.tau_s = to_double(k, v); }},
      {"window", [](auto& c, auto k, auto v) { c.train.neuron.window = to_double(k, v); }},
      {"input_size", [](auto& c, auto k, auto v) { c.train.neuron.input_size = to_uint(k, v); }},
      {"spike_regularizer",
       [](auto& c, auto k, auto v) { c.train.spike_regularizer = to_double(k, v); }},
      {"length_std", [](auto& c, auto k, auto v) { c.train.length_std = to_double(k, v); }},
  };
  return table;
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = setters();
    auto it = table.find(key);
    if (it == table.end())
      throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    try {
      it->second(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + std::string(key) + ": " +
                        e.what());
    }
  }
  if (cfg.dataset.empty()) throw ConfigError(source + ": missing required key 'dataset'");
  try {
    cfg.train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.string());
}

std::string to_config_text(const ExperimentConfig& c) {
  const auto& t = c.train;
  std::ostringstream o;
  o << "dataset = " << c.dataset << '\n'
    << "output = " << c.output << '\n'
    << "threads = " << c.threads << '\n'
    << "model = " << to_string(t.model) << '\n'
    << "dim = " << t.dim << '\n'
    << "learning_rate = " << fmt_double(t.learning_rate) << '\n'
    << "batch_size = " << t.batch_size << '\n'
    << "num_negatives = " << t.num_negatives << '\n'
    << "margin = " << fmt_double(t.margin) << '\n'
    << "l2 = " << fmt_double(t.l2) << '\n'
    << "tau_ref = " << fmt_double(t.tau_ref) << '\n'
    << "loss = " << to_string(t.loss) << '\n'
    << "negative_pairing = " << to_string(t.pairing) << '\n'
    << "norm_mode = " << to_string(t.norm_mode) << '\n'
    << "score_kind = " << to_string(t.score_kind) << '\n'
    << "max_epochs = " << t.max_epochs << '\n'
    << "patience = " << t.patience << '\n'
    << "valid_every = " << t.valid_every << '\n'
    << "seed = " << t.seed << '\n'
    << "frozen_relations = ";
  for (std::size_t i = 0; i < t.frozen_relations.size(); ++i)
    o << (i ? "," : "") << t.frozen_relations[i];
  o << '\n'
    << "threshold = " << fmt_double(t.neuron.threshold) << '\n'
    << "tau_s = " << fmt_double(t.neuron.tau_s) << '\n'
    << "window = " << fmt_double(t.neuron.window) << '\n'
    << "input_size = " << t.neuron.input_size << '\n'
    << "spike_regularizer = " << fmt_double(t.spike_regularizer) << '\n'
    << "length_std = " << fmt_double(t.length_std) << '\n';
  return o.str();
}

}  // namespace spikekg
