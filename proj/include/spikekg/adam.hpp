#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spikekg {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment accumulators for one parameter tensor.
struct AdamState {
  std::string name;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  AdamHyper hyper;

  AdamState() = default;
  AdamState(std::string tensor_name, std::size_t size, AdamHyper h = {})
      : name(std::move(tensor_name)), m(size, 0.0), v(size, 0.0), hyper(h) {}
};

// One bias-corrected Adam update of `params` in place. Throws NumericalError
// naming the tensor if any gradient is non-finite (params are left untouched).
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double lr);

}  // namespace spikekg
