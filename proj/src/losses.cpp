#include "spikekg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikekg/error.hpp"

namespace spikekg {

LossKind parse_loss_kind(std::string_view s) {
  if (s == "margin") return LossKind::margin;
  if (s == "soft_margin") return LossKind::soft_margin;
  if (s == "bce") return LossKind::bce;
  if (s == "mse") return LossKind::mse;
  throw ConfigError("unknown loss_kind '" + std::string(s) +
                    "' (expected margin, soft_margin, bce or mse)");
}

std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::margin: return "margin";
    case LossKind::soft_margin: return "soft_margin";
    case LossKind::bce: return "bce";
    case LossKind::mse: return "mse";
  }
  return "?";
}

bool is_pairwise(LossKind k) { return k == LossKind::margin || k == LossKind::soft_margin; }

double softplus(double x) {
  // max(x, 0) + log1p(exp(-|x|))
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PairLoss margin_ranking_loss(double pos_score, double neg_score, double gamma) {
  const double x = gamma - pos_score + neg_score;
  if (x > 0.0) return {x, -1.0, 1.0};
  return {};
}

PairLoss soft_margin_loss(double pos_score, double neg_score, double gamma) {
  const double x = gamma - pos_score + neg_score;
  const double s = sigmoid(x);
  return {softplus(x), -s, s};
}

// -[y log sig(x) + (1-y) log(1 - sig(x))] = softplus(x) - y x
PointLoss bce_logit_loss(double score, double label) {
  return {softplus(score) - label * score, sigmoid(score) - label};
}

PointLoss mse_loss(double score, double target) {
  const double d = score - target;
  return {d * d, 2.0 * d};
}

PairLoss pair_loss(LossKind kind, double pos_score, double neg_score, double gamma) {
  switch (kind) {
    case LossKind::margin: return margin_ranking_loss(pos_score, neg_score, gamma);
    case LossKind::soft_margin: return soft_margin_loss(pos_score, neg_score, gamma);
    default: throw ConfigError("pair_loss: " + std::string(to_string(kind)) + " is pointwise");
  }
}

PointLoss point_loss(LossKind kind, double score, double label) {
  switch (kind) {
    case LossKind::bce: return bce_logit_loss(score, label);
    case LossKind::mse: return mse_loss(score, label);
    default: throw ConfigError("point_loss: " + std::string(to_string(kind)) + " is pairwise");
  }
}

}  // namespace spikekg
