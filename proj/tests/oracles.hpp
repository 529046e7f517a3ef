#pragma once

// Independent reference computations used by the tests. None of these call
// into the library code they are checking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <tuple>
#include <vector>

namespace oracle {

// Central difference of f at x along coordinate i.
inline double central_diff(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x, std::size_t i, double h = 1e-6) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Spike times by direct summation: t_i = sum_{j<=i} |p_j| / Z + i * tau_ref.
inline std::vector<double> spike_times(const std::vector<double>& p, bool normalized,
                                       double tau_ref = 0.0) {
  double z = 1.0;
  if (normalized) {
    z = 0.0;
    for (double v : p) z += v * v;
    z = std::sqrt(z);
  }
  std::vector<double> t(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += std::abs(p[j]);
    t[i] = s / z + static_cast<double>(i) * tau_ref;
  }
  return t;
}

// Membrane potential straight from the definition.
inline double potential(double t, const std::vector<double>& w, const std::vector<double>& tin,
                        double tau) {
  double u = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (tin[j] <= t) u += w[j] * (1.0 - std::exp(-(t - tin[j]) / tau));
  return u;
}

// du/dt = (1/tau) sum_j w_j H(t - t_j) exp(-(t - t_j)/tau), counting only the
// inputs that arrived by `arrived`.
inline double du_dt(double t, double arrived, const std::vector<double>& w,
                    const std::vector<double>& tin, double tau) {
  double d = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (tin[j] <= arrived) d += w[j] * std::exp(-(t - tin[j]) / tau);
  return d / tau;
}

// Integrates the potential ODE with classical RK4, splitting steps at input
// times so the right-hand side is smooth inside every step.
inline double integrate_potential(double t_end, const std::vector<double>& w,
                                  const std::vector<double>& tin, double tau, double h) {
  std::vector<double> cuts(tin.begin(), tin.end());
  cuts.push_back(t_end);
  std::sort(cuts.begin(), cuts.end());
  double t = 0.0, u = 0.0;
  for (double stop : cuts) {
    stop = std::min(stop, t_end);
    while (t < stop) {
      const double dt = std::min(h, stop - t);
      const double start = t;
      auto f = [&](double s) { return du_dt(s, start, w, tin, tau); };
      const double k1 = f(t);
      const double k2 = f(t + dt / 2);
      const double k3 = f(t + dt / 2);
      const double k4 = f(t + dt);
      u += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += dt;
    }
  }
  return u;
}

// First threshold crossing by scanning a grid of `potential` and bisecting.
inline std::optional<double> bisect_crossing(const std::vector<double>& w,
                                             const std::vector<double>& tin, double tau,
                                             double threshold, double horizon, double grid) {
  double prev = 0.0;
  for (double t = grid; t <= horizon; t += grid) {
    if (potential(t, w, tin, tau) >= threshold) {
      double lo = prev, hi = t;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (potential(mid, w, tin, tau) >= threshold ? hi : lo) = mid;
      }
      return hi;
    }
    prev = t;
  }
  return std::nullopt;
}

// Realistic filtered rank by sorting every candidate.
inline double brute_rank(const std::vector<double>& scores, std::size_t target,
                         const std::set<std::size_t>& filtered) {
  std::vector<std::pair<double, std::size_t>> kept;
  for (std::size_t e = 0; e < scores.size(); ++e)
    if (e == target || !filtered.count(e)) kept.emplace_back(scores[e], e);
  std::sort(kept.begin(), kept.end(), [](auto a, auto b) { return a.first > b.first; });
  // best and worst positions among tied scores
  std::size_t best = 0, worst = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].first == scores[target]) {
      if (best == 0) best = i + 1;
      worst = i + 1;
    }
  }
  return 0.5 * static_cast<double>(best + worst);
}

}  // namespace oracle
