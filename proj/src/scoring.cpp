#include "spikekg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikekg/error.hpp"
#include "spikekg/spiketrain.hpp"

namespace spikekg {

ScoreKind parse_score_kind(std::string_view s) {
  if (s == "asym") return ScoreKind::asym;
  if (s == "sym") return ScoreKind::sym;
  throw ConfigError("unknown score_kind '" + std::string(s) + "' (expected asym or sym)");
}

std::string_view to_string(ScoreKind k) { return k == ScoreKind::asym ? "asym" : "sym"; }

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

double asym_prefix(std::span<const double> ts, std::span<const double> to,
                   std::span<const double> delta, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::abs(ts[j] - to[j] - delta[j]);
  return -s;
}

void asym_prefix_grad(std::span<const double> ts, std::span<const double> to,
                      std::span<const double> delta, std::size_t n, double upstream,
                      std::span<double> g_ts, std::span<double> g_to, std::span<double> g_delta) {
  for (std::size_t j = 0; j < n; ++j) {
    const double g = -upstream * sign0(ts[j] - to[j] - delta[j]);
    if (!g_ts.empty()) g_ts[j] += g;
    if (!g_to.empty()) g_to[j] -= g;
    if (!g_delta.empty()) g_delta[j] -= g;
  }
}

}  // namespace

double score_asym(std::span<const double> ts, std::span<const double> to,
                  std::span<const double> delta) {
  require_same(ts.size(), to.size(), "score_asym");
  require_same(ts.size(), delta.size(), "score_asym");
  return asym_prefix(ts, to, delta, ts.size());
}

double score_sym(std::span<const double> ts, std::span<const double> to,
                 std::span<const double> delta) {
  require_same(ts.size(), to.size(), "score_sym");
  require_same(ts.size(), delta.size(), "score_sym");
  double s = 0.0;
  for (std::size_t j = 0; j < ts.size(); ++j)
    s += std::abs(std::abs(ts[j] - to[j]) - std::abs(delta[j]));
  return -s;
}

double score_truncated(std::span<const double> ts, std::span<const double> to,
                       std::span<const double> delta) {
  const std::size_t n = std::min(ts.size(), to.size());
  if (n == 0) throw DimensionError("score_truncated: spike trains must be non-empty");
  if (delta.size() < n) throw DimensionError("score_truncated: relation shorter than overlap");
  return asym_prefix(ts, to, delta, n);
}

double score_spike(ScoreKind kind, std::span<const double> ts, std::span<const double> to,
                   std::span<const double> delta) {
  return kind == ScoreKind::asym ? score_asym(ts, to, delta) : score_sym(ts, to, delta);
}

double score_transe(std::span<const double> es, std::span<const double> eo,
                    std::span<const double> rp) {
  require_same(es.size(), eo.size(), "score_transe");
  require_same(es.size(), rp.size(), "score_transe");
  return asym_prefix(es, eo, rp, es.size());
}

double score_rescal(std::span<const double> es, std::span<const double> r,
                    std::span<const double> eo) {
  const std::size_t n = es.size();
  require_same(n, eo.size(), "score_rescal");
  require_same(n * n, r.size(), "score_rescal");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += r[i * n + j] * eo[j];
    s += es[i] * row;
  }
  return s;
}

void score_asym_grad(std::span<const double> ts, std::span<const double> to,
                     std::span<const double> delta, double upstream, std::span<double> g_ts,
                     std::span<double> g_to, std::span<double> g_delta) {
  require_same(ts.size(), to.size(), "score_asym");
  require_same(ts.size(), delta.size(), "score_asym");
  asym_prefix_grad(ts, to, delta, ts.size(), upstream, g_ts, g_to, g_delta);
}

// d/dx -| |x| - |d| | = -sign(|x| - |d|) sign(x);  d/dd = sign(|x| - |d|) sign(d)
void score_sym_grad(std::span<const double> ts, std::span<const double> to,
                    std::span<const double> delta, double upstream, std::span<double> g_ts,
                    std::span<double> g_to, std::span<double> g_delta) {
  require_same(ts.size(), to.size(), "score_sym");
  require_same(ts.size(), delta.size(), "score_sym");
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double x = ts[j] - to[j];
    const double outer = sign0(std::abs(x) - std::abs(delta[j]));
    const double gx = -upstream * outer * sign0(x);
    if (!g_ts.empty()) g_ts[j] += gx;
    if (!g_to.empty()) g_to[j] -= gx;
    if (!g_delta.empty()) g_delta[j] += upstream * outer * sign0(delta[j]);
  }
}

void score_truncated_grad(std::span<const double> ts, std::span<const double> to,
                          std::span<const double> delta, double upstream, std::span<double> g_ts,
                          std::span<double> g_to, std::span<double> g_delta) {
  const std::size_t n = std::min(ts.size(), to.size());
  if (delta.size() < n) throw DimensionError("score_truncated: relation shorter than overlap");
  asym_prefix_grad(ts, to, delta, n, upstream, g_ts, g_to, g_delta);
}

void score_spike_grad(ScoreKind kind, std::span<const double> ts, std::span<const double> to,
                      std::span<const double> delta, double upstream, std::span<double> g_ts,
                      std::span<double> g_to, std::span<double> g_delta) {
  if (kind == ScoreKind::asym)
    score_asym_grad(ts, to, delta, upstream, g_ts, g_to, g_delta);
  else
    score_sym_grad(ts, to, delta, upstream, g_ts, g_to, g_delta);
}

void score_transe_grad(std::span<const double> es, std::span<const double> eo,
                       std::span<const double> rp, double upstream, std::span<double> g_es,
                       std::span<double> g_eo, std::span<double> g_rp) {
  require_same(es.size(), eo.size(), "score_transe");
  require_same(es.size(), rp.size(), "score_transe");
  asym_prefix_grad(es, eo, rp, es.size(), upstream, g_es, g_eo, g_rp);
}

void score_rescal_grad(std::span<const double> es, std::span<const double> r,
                       std::span<const double> eo, double upstream, std::span<double> g_es,
                       std::span<double> g_r, std::span<double> g_eo) {
  const std::size_t n = es.size();
  require_same(n, eo.size(), "score_rescal");
  require_same(n * n, r.size(), "score_rescal");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;  // (R e_o)_i
    for (std::size_t j = 0; j < n; ++j) {
      const double rij = r[i * n + j];
      row += rij * eo[j];
      if (!g_eo.empty()) g_eo[j] += upstream * es[i] * rij;
      if (!g_r.empty()) g_r[i * n + j] += upstream * es[i] * eo[j];
    }
    if (!g_es.empty()) g_es[i] += upstream * row;
  }
}

}  // namespace spikekg
