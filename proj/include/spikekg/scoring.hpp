#pragma once

#include <span>
#include <string_view>

namespace spikekg {

enum class ScoreKind { asym, sym };

ScoreKind parse_score_kind(std::string_view s);
std::string_view to_string(ScoreKind k);

// Spike-difference scores. All are <= 0 and reach 0 exactly on a pattern match.
//   asym:      -sum_j | t_s,j - t_o,j - delta_j |
//   sym:       -sum_j | |t_s,j - t_o,j| - |delta_j| |
//   truncated: asym over the first min(n, m) spikes only
double score_asym(std::span<const double> ts, std::span<const double> to,
                  std::span<const double> delta);
double score_sym(std::span<const double> ts, std::span<const double> to,
                 std::span<const double> delta);
double score_truncated(std::span<const double> ts, std::span<const double> to,
                       std::span<const double> delta);
double score_spike(ScoreKind kind, std::span<const double> ts, std::span<const double> to,
                   std::span<const double> delta);

// TransE: -||e_s - e_o - r_p||_1, the same functional form as score_asym.
double score_transe(std::span<const double> es, std::span<const double> eo,
                    std::span<const double> rp);

// RESCAL: e_s^T R e_o with R stored row-major (n x n).
double score_rescal(std::span<const double> es, std::span<const double> r,
                    std::span<const double> eo);

// Gradient accumulators: add `upstream * d score / d input` into the grad
// spans. Absolute-value kinks use the subgradient 0. Pass empty spans for
// inputs whose gradient is not needed.
void score_asym_grad(std::span<const double> ts, std::span<const double> to,
                     std::span<const double> delta, double upstream, std::span<double> g_ts,
                     std::span<double> g_to, std::span<double> g_delta);
void score_sym_grad(std::span<const double> ts, std::span<const double> to,
                    std::span<const double> delta, double upstream, std::span<double> g_ts,
                    std::span<double> g_to, std::span<double> g_delta);
void score_truncated_grad(std::span<const double> ts, std::span<const double> to,
                          std::span<const double> delta, double upstream, std::span<double> g_ts,
                          std::span<double> g_to, std::span<double> g_delta);
void score_spike_grad(ScoreKind kind, std::span<const double> ts, std::span<const double> to,
                      std::span<const double> delta, double upstream, std::span<double> g_ts,
                      std::span<double> g_to, std::span<double> g_delta);
void score_transe_grad(std::span<const double> es, std::span<const double> eo,
                       std::span<const double> rp, double upstream, std::span<double> g_es,
                       std::span<double> g_eo, std::span<double> g_rp);
void score_rescal_grad(std::span<const double> es, std::span<const double> r,
                       std::span<const double> eo, double upstream, std::span<double> g_es,
                       std::span<double> g_r, std::span<double> g_eo);

}  // namespace spikekg
