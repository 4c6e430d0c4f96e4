#pragma once

#include "pointprop/mask.hpp"
#include "pointprop/retrieval.hpp"

namespace pointprop {

struct DiceConfig {
    double eps = 1e-6; // smoothing constant in numerator and denominator
};

struct LossWeights {
    double lambda_point = 0.5;
    double lambda_crf = 0.5;
    double lambda_mil = 10.0;
};

/// 1 - (2 sum(p*q) + eps) / (sum(p) + sum(q) + eps); in [0, 1).
double dice_loss(const ProbMask& p, const ProbMask& q, const DiceConfig& cfg = {});
double dice_loss(const ProbMask& p, const BinaryMask& q, const DiceConfig& cfg = {});

/// Analytic gradient of dice_loss with respect to p.
ProbMask dice_grad(const ProbMask& p, const ProbMask& q, const DiceConfig& cfg = {});

/// Per-column max of each column (length = width).
std::vector<double> project_columns(const ProbMask& m);
/// Per-row max of each row (length = height).
std::vector<double> project_rows(const ProbMask& m);

/// Dice loss between the row/column max-projections of a prediction and of
/// the box mask; blind to any mask with the same projections.
double mil_loss(const ProbMask& m, const BinaryMask& box, const DiceConfig& cfg = {});

/// Average pooling onto an n x n grid; dimensions must divide evenly.
ProbMask downsample_mask(const ProbMask& m, int n);

/// Dice over the supervised region plus the projection fallback when no
/// points were retrieved:
/// dice(m_down * K, y_hat) + [retrieved_empty] * lambda_mil * mil_loss(m, box).
double point_loss(const ProbMask& m_down, const SparseTarget& target, bool retrieved_empty,
                  const ProbMask& m, const BinaryMask& box, const LossWeights& weights,
                  const DiceConfig& cfg = {});

/// Entrywise (m_s + m_t) / 2.
ProbMask average_predictions(const ProbMask& m_s, const ProbMask& m_t);

/// Dice between a prediction and its refined pseudo ground truth.
double crf_loss(const ProbMask& m_s, const ProbMask& m_refined, const DiceConfig& cfg = {});

/// lambda_point * point + lambda_crf * crf. Throws NonFinite.
double overall_loss(double loss_point, double loss_crf, const LossWeights& weights);

} // namespace pointprop
