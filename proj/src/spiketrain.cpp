#include "spikekg/spiketrain.hpp"

#include <cmath>
#include <string>

#include "spikekg/error.hpp"

namespace spikekg {

NormMode parse_norm_mode(std::string_view s) {
  if (s == "normalized") return NormMode::normalized;
  if (s == "unit") return NormMode::unit;
  throw ConfigError("unknown norm_mode '" + std::string(s) + "' (expected normalized or unit)");
}

std::string_view to_string(NormMode m) {
  return m == NormMode::normalized ? "normalized" : "unit";
}

std::vector<double> rectify(std::span<const double> params) {
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = std::abs(params[i]);
  return out;
}

namespace {

double norm_of(std::span<const double> isis, NormMode mode) {
  if (mode == NormMode::unit) return 1.0;
  double sq = 0.0;
  for (double v : isis) sq += v * v;
  const double z = std::sqrt(sq);
  if (!(z > 0.0)) throw DegenerateEmbeddingError("all interspike intervals are zero (Z = 0)");
  return z;
}

}  // namespace

std::vector<double> spike_times(std::span<const double> isis, NormMode mode) {
  const double z = norm_of(isis, mode);
  std::vector<double> out(isis.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < isis.size(); ++i) {
    acc += isis[i];
    out[i] = acc / z;
  }
  return out;
}

std::vector<double> apply_refractory(std::span<const double> times, double tau_ref) {
  std::vector<double> out(times.begin(), times.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += static_cast<double>(i) * tau_ref;
  return out;
}

std::vector<double> spike_train_from_params(std::span<const double> params, NormMode mode,
                                            double tau_ref) {
  auto isis = rectify(params);
  return apply_refractory(spike_times(isis, mode), tau_ref);
}

// With c_i = sum_{k<=i} I_k and Z = ||I||:
//   d t_i / d I_j = [j <= i] / Z - c_i * I_j / Z^3   (second term only when normalized)
//   d I_j / d params_j = sign(params_j)
Matrix spike_times_jacobian(std::span<const double> params, NormMode mode) {
  const auto isis = rectify(params);
  const std::size_t n = isis.size();
  const double z = norm_of(isis, mode);
  Matrix jac(n, n);
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c += isis[i];
    for (std::size_t j = 0; j < n; ++j) {
      double d = (j <= i) ? 1.0 / z : 0.0;
      if (mode == NormMode::normalized) d -= c * isis[j] / (z * z * z);
      jac(i, j) = d * sign0(params[j]);
    }
  }
  return jac;
}

void spike_times_vjp(std::span<const double> params, NormMode mode,
                     std::span<const double> upstream, std::span<double> grad_params) {
  const std::size_t n = params.size();
  if (upstream.size() != n || grad_params.size() != n)
    throw DimensionError("spike_times_vjp: size mismatch");
  const auto isis = rectify(params);
  const double z = norm_of(isis, mode);

  // g.c = sum_i g_i c_i, needed for the quotient-rule term.
  double gc = 0.0;
  if (mode == NormMode::normalized) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c += isis[i];
      gc += upstream[i] * c;
    }
  }
  double suffix = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    suffix += upstream[j];
    double d = suffix / z;
    if (mode == NormMode::normalized) d -= gc * isis[j] / (z * z * z);
    grad_params[j] += d * sign0(params[j]);
  }
}

bool is_valid_spike_train(std::span<const double> times, double tau_ref, double tol) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double gap = times[i] - times[i - 1];
    if (tau_ref > 0.0) {
      if (gap < tau_ref - tol) return false;
    } else if (gap < -tol) {
      return false;
    }
  }
  return true;
}

}  // namespace spikekg
