#include "spikekg/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spikekg/error.hpp"

namespace spikekg {

void NeuronConfig::validate() const {
  if (!(threshold > 0.0)) throw ConfigError("threshold must be > 0");
  if (!(tau_s > 0.0)) throw ConfigError("tau_s must be > 0");
  if (!(tau_ref >= 0.0)) throw ConfigError("tau_ref must be >= 0");
  if (!(window > 0.0)) throw ConfigError("window must be > 0");
  if (input_size < 1) throw ConfigError("input_size must be >= 1");
}

InputPopulation::InputPopulation(std::vector<double> times, double tau_s)
    : times_(std::move(times)), tau_s_(tau_s) {
  if (!(tau_s > 0.0)) throw ConfigError("tau_s must be > 0");
  std::sort(times_.begin(), times_.end());
  growth_.reserve(times_.size());
  for (double t : times_) growth_.push_back(std::exp(t / tau_s_));
}

InputPopulation InputPopulation::uniform(std::size_t count, double window, double tau_s,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, window);
  std::vector<double> times(count);
  for (auto& t : times) t = dist(rng);
  return InputPopulation(std::move(times), tau_s);
}

double membrane_potential(double t, std::span<const double> weights,
                          const InputPopulation& inputs) {
  if (weights.size() != inputs.size())
    throw DimensionError("membrane_potential: weight count does not match input population");
  const auto times = inputs.times();
  double u = 0.0;
  for (std::size_t j = 0; j < times.size() && times[j] <= t; ++j)
    u += weights[j] * -std::expm1(-(t - times[j]) / inputs.tau_s());
  return u;
}

// Within the window [t_k, t_{k+1}) the causal set is the sorted prefix 0..k and
//   u(t) = A - exp(-t/tau_s) * B,  A = sum w_j,  B = sum w_j exp(t_j/tau_s),
// which is monotone in t, so each window holds at most one upward crossing
//   t* = tau_s * ln(B / (A - u_th)),  valid when A > u_th and B > 0.
std::optional<IntervalSolution> solve_interval(std::span<const double> weights,
                                               const InputPopulation& inputs,
                                               const NeuronConfig& cfg) {
  const std::size_t m = inputs.size();
  if (weights.size() != m)
    throw DimensionError("solve_interval: weight count does not match input population");
  const auto times = inputs.times();
  const auto growth = inputs.growth();
  const double tau = inputs.tau_s();
  double a = 0.0;
  double b = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    a += weights[k];
    b += weights[k] * growth[k];
    const double end = (k + 1 < m) ? times[k + 1] : std::numeric_limits<double>::infinity();
    const double excess = a - cfg.threshold;
    if (excess <= 0.0 || b <= 0.0) continue;
    double t = tau * (std::log(b) - std::log(excess));
    if (!(t < end)) continue;
    t = std::max(t, times[k]);
    return IntervalSolution{t, k + 1, excess, b};
  }
  return std::nullopt;
}

void accumulate_interval_grad(const IntervalSolution& sol, const InputPopulation& inputs,
                              double upstream, std::span<double> grad) {
  const double tau = inputs.tau_s();
  const double slope = sol.excess / tau;  // du/dt at the crossing
  if (slope < 1e-9)
    throw IllConditionedGradientError("grazing threshold crossing (du/dt = " +
                                      std::to_string(slope) + ")");
  const auto growth = inputs.growth();
  const double inv_b = 1.0 / sol.drive;
  const double inv_excess = 1.0 / sol.excess;
  for (std::size_t j = 0; j < sol.active; ++j)
    grad[j] += upstream * tau * (growth[j] * inv_b - inv_excess);
}

std::vector<double> d_interval_d_weights(std::span<const double> weights,
                                         const InputPopulation& inputs, const NeuronConfig& cfg) {
  auto sol = solve_interval(weights, inputs, cfg);
  if (!sol) throw SilentNeuronError("slot never reaches threshold; no interval to differentiate");
  std::vector<double> grad(weights.size(), 0.0);
  accumulate_interval_grad(*sol, inputs, 1.0, grad);
  return grad;
}

std::vector<double> neuron_spike_train(std::span<const double> weights,
                                       const InputPopulation& inputs, const NeuronConfig& cfg,
                                       std::int64_t entity) {
  const std::size_t slot = inputs.size();
  if (slot == 0 || weights.size() % slot != 0)
    throw DimensionError("neuron_spike_train: weights are not a whole number of slots");
  const std::size_t n = weights.size() / slot;
  std::vector<double> times(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto sol = solve_interval(weights.subspan(i * slot, slot), inputs, cfg);
    if (!sol) {
      std::string who = entity >= 0 ? "entity " + std::to_string(entity) : std::string("neuron");
      throw SilentNeuronError(who + " is silent in slot " + std::to_string(i));
    }
    if (i > 0) t += cfg.tau_ref;
    t += sol->interval;
    times[i] = t;
  }
  return times;
}

double spike_regularizer(std::span<const double> weights, std::size_t slot_size,
                         const NeuronConfig& cfg, double delta, std::span<double> grad) {
  if (slot_size == 0 || weights.size() % slot_size != 0)
    throw DimensionError("spike_regularizer: weights are not a whole number of slots");
  if (!grad.empty() && grad.size() != weights.size())
    throw DimensionError("spike_regularizer: gradient size mismatch");
  double total = 0.0;
  for (std::size_t start = 0; start < weights.size(); start += slot_size) {
    double w_sum = 0.0;
    for (std::size_t j = 0; j < slot_size; ++j) w_sum += weights[start + j];
    if (w_sum <= cfg.threshold) {
      total += delta * (cfg.threshold - w_sum);
      if (!grad.empty())
        for (std::size_t j = 0; j < slot_size; ++j) grad[start + j] -= delta;
    }
  }
  return total;
}

std::vector<std::pair<double, double>> membrane_trace(std::span<const double> weights,
                                                      const InputPopulation& inputs,
                                                      const NeuronConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw ConfigError("trace resolution must be > 0");
  const auto spikes = neuron_spike_train(weights, inputs, cfg);
  const std::size_t slot = inputs.size();
  std::vector<std::pair<double, double>> trace;
  double slot_start = 0.0;
  std::size_t i = 0;
  // Sample on a global grid; the slot changes once its spike has passed.
  for (std::size_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * dt;
    while (i < spikes.size() && t > spikes[i]) {
      // Emit the crossing itself so every spike appears in the trace.
      trace.emplace_back(spikes[i], membrane_potential(spikes[i] - slot_start,
                                                       weights.subspan(i * slot, slot), inputs));
      slot_start = spikes[i] + cfg.tau_ref;
      ++i;
    }
    if (i == spikes.size()) break;
    const double local = t - slot_start;
    const double u = local < 0.0
                         ? 0.0
                         : membrane_potential(local, weights.subspan(i * slot, slot), inputs);
    trace.emplace_back(t, u);
  }
  return trace;
}

}  // namespace spikekg
