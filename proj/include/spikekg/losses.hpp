#pragma once

#include <string_view>

namespace spikekg {

enum class LossKind { margin, soft_margin, bce, mse };

LossKind parse_loss_kind(std::string_view s);
std::string_view to_string(LossKind k);
// Pairwise losses compare a positive with a negative score; pointwise losses
// score each triple against a 0/1 label.
bool is_pairwise(LossKind k);

// Value and partial derivatives of a pairwise loss.
struct PairLoss {
  double value = 0.0;
  double d_pos = 0.0;
  double d_neg = 0.0;
};

// Value and derivative of a pointwise loss.
struct PointLoss {
  double value = 0.0;
  double d_score = 0.0;
};

// ln(1 + e^x), stable for large |x|.
double softplus(double x);
// 1 / (1 + e^-x), stable for large |x|.
double sigmoid(double x);

// [gamma - pos + neg]_+ ; subgradient 0 at the hinge.
PairLoss margin_ranking_loss(double pos_score, double neg_score, double gamma);
// softplus(gamma - pos + neg)
PairLoss soft_margin_loss(double pos_score, double neg_score, double gamma);
// Logistic cross-entropy with `score` as the logit.
PointLoss bce_logit_loss(double score, double label);
// (score - target)^2
PointLoss mse_loss(double score, double target);

PairLoss pair_loss(LossKind kind, double pos_score, double neg_score, double gamma);
PointLoss point_loss(LossKind kind, double score, double label);

}  // namespace spikekg
