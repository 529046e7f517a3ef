#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "spikekg/train.hpp"

namespace spikekg {

// One experiment: which data, which model, how to train it, where to write.
//
// File format is plain `key = value` lines; `#` starts a comment; blank lines
// are ignored; every key is optional except `dataset` and unknown keys are an
// error. See configs/ for one file per published hyperparameter row.
struct ExperimentConfig {
  std::string dataset;  // builtin name (zachary, umls, kinships) or directory
  TrainConfig train;
  std::string output = "out";
  unsigned threads = 1;
};

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::string& source = "<memory>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Canonical text with every key spelled out; parses back to the same config.
std::string to_config_text(const ExperimentConfig& cfg);

}  // namespace spikekg
