#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace spikekg {

// Constants of the integrate-and-fire neuron with exponential synaptic kernel
//   du/dt = (1/tau_s) * sum_j w_j * H(t - t_j) * exp(-(t - t_j)/tau_s)
struct NeuronConfig {
  double threshold = 1.0;  // u_th
  double tau_s = 0.5;
  double tau_ref = 0.1;
  double window = 1.0;  // T, input spikes live in [0, T]
  std::size_t input_size = 50;

  void validate() const;
};

// Fixed presynaptic spike times shared by every embedding neuron. Sorted at
// construction; weight vectors index inputs in this sorted order.
class InputPopulation {
 public:
  InputPopulation() = default;
  InputPopulation(std::vector<double> times, double tau_s);

  static InputPopulation uniform(std::size_t count, double window, double tau_s,
                                 std::mt19937_64& rng);

  std::size_t size() const { return times_.size(); }
  std::span<const double> times() const { return times_; }
  double tau_s() const { return tau_s_; }
  // exp(t_j / tau_s), cached since every solve needs them.
  std::span<const double> growth() const { return growth_; }

 private:
  std::vector<double> times_;
  std::vector<double> growth_;
  double tau_s_ = 0.5;
};

// A threshold crossing found by solve_interval.
struct IntervalSolution {
  double interval = 0.0;     // time from slot start to spike
  std::size_t active = 0;    // number of causal inputs (sorted prefix length)
  double excess = 0.0;       // A - u_th, with A the summed causal weight
  double drive = 0.0;        // B = sum_causal w_j exp(t_j / tau_s)
};

// u(t) from u(0) = 0, in the slot's local time frame.
double membrane_potential(double t, std::span<const double> weights, const InputPopulation& inputs);

// First threshold crossing of a slot, or nullopt when the potential never
// reaches u_th.
std::optional<IntervalSolution> solve_interval(std::span<const double> weights,
                                               const InputPopulation& inputs,
                                               const NeuronConfig& cfg);

// d interval / d w_j; zero for inputs that arrive after the spike.
// Throws IllConditionedGradientError when du/dt at the crossing is < 1e-9.
std::vector<double> d_interval_d_weights(std::span<const double> weights,
                                         const InputPopulation& inputs, const NeuronConfig& cfg);
// Same, reusing a solution; accumulates `upstream * d interval / d w` into grad.
void accumulate_interval_grad(const IntervalSolution& sol, const InputPopulation& inputs,
                              double upstream, std::span<double> grad);

// Spike times of a neuron whose weights hold `slots` consecutive blocks of
// `inputs.size()` weights: t_i = sum_{j<=i} I_j + i * tau_ref.
// Throws SilentNeuronError naming `entity` and the slot that never spikes.
std::vector<double> neuron_spike_train(std::span<const double> weights,
                                       const InputPopulation& inputs, const NeuronConfig& cfg,
                                       std::int64_t entity = -1);

// L_delta = sum over slots with W <= u_th of delta * (u_th - W), W the summed
// slot weight. `weights` is any number of slots back to back; gradient (-delta
// for every weight of an offending slot) is accumulated into `grad` if given.
double spike_regularizer(std::span<const double> weights, std::size_t slot_size,
                         const NeuronConfig& cfg, double delta, std::span<double> grad = {});

inline constexpr double kDefaultSpikeRegularizer = 0.01;

// (time, potential) samples across all slots of one neuron, with the potential
// held at 0 during refractory windows. Stops after the last spike.
std::vector<std::pair<double, double>> membrane_trace(std::span<const double> weights,
                                                      const InputPopulation& inputs,
                                                      const NeuronConfig& cfg, double dt);

}  // namespace spikekg
