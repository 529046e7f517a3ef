#pragma once

#include <stdexcept>
#include <string>

namespace spikekg {

// Exit codes used by the command-line front end.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const { return ExitCode::data; }
};

// Malformed input file (line numbers are 1-based).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : Error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class VocabError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::usage; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::usage; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::numerical; }
};

// All-zero ISI vector under normalization (Z = 0).
class DegenerateEmbeddingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A neuron slot that never reaches threshold was asked for a spike time.
class SilentNeuronError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Threshold crossing with vanishing slope; the interval gradient blows up.
class IllConditionedGradientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedStatisticError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace spikekg
