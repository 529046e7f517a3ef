#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace spikekg {

// How cumulative ISIs are scaled into spike times.
//   normalized: divide by Z = ||I||_2 (abstract model)
//   unit:       Z = 1 (neuronal model, times bounded by the inputs)
enum class NormMode { normalized, unit };

NormMode parse_norm_mode(std::string_view s);
std::string_view to_string(NormMode m);

// Row-major dense matrix, used for Jacobians.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline double sign0(double x) { return (x > 0.0) - (x < 0.0); }

// Elementwise |x|; the unconstrained parameters become non-negative ISIs.
std::vector<double> rectify(std::span<const double> params);

// t_i = (1/Z) * sum_{j<=i} I_j. Throws DegenerateEmbeddingError if Z == 0.
std::vector<double> spike_times(std::span<const double> isis, NormMode mode);

// t_i + i * tau_ref with zero-based i.
std::vector<double> apply_refractory(std::span<const double> times, double tau_ref);

// Convenience: params -> rectify -> spike_times -> apply_refractory.
std::vector<double> spike_train_from_params(std::span<const double> params, NormMode mode,
                                            double tau_ref = 0.0);

// J(i,j) = d t_i / d params_j (refractory offsets are constant and drop out).
Matrix spike_times_jacobian(std::span<const double> params, NormMode mode);

// Vector-Jacobian product: grad_params_j = sum_i upstream_i * J(i,j), in O(N).
// Result is accumulated into `grad_params`.
void spike_times_vjp(std::span<const double> params, NormMode mode,
                     std::span<const double> upstream, std::span<double> grad_params);

bool is_valid_spike_train(std::span<const double> times, double tau_ref, double tol = 1e-12);

}  // namespace spikekg
