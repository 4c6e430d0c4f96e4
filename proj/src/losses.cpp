#include "pointprop/losses.hpp"

#include <algorithm>
#include <cmath>

namespace pointprop {

namespace {

double dice_impl(const std::vector<double>& p, const std::vector<double>& q, double eps) {
    double inter = 0.0;
    double sum_p = 0.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        inter += p[i] * q[i];
        sum_p += p[i];
        sum_q += q[i];
    }
    return 1.0 - (2.0 * inter + eps) / (sum_p + sum_q + eps);
}

} // namespace

double dice_loss(const ProbMask& p, const ProbMask& q, const DiceConfig& cfg) {
    require_same_size(p, q, "dice_loss");
    return dice_impl(p.values, q.values, cfg.eps);
}

double dice_loss(const ProbMask& p, const BinaryMask& q, const DiceConfig& cfg) {
    return dice_loss(p, to_prob(q), cfg);
}

ProbMask dice_grad(const ProbMask& p, const ProbMask& q, const DiceConfig& cfg) {
    require_same_size(p, q, "dice_grad");
    double inter = 0.0;
    double sum_p = 0.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        inter += p.values[i] * q.values[i];
        sum_p += p.values[i];
        sum_q += q.values[i];
    }
    const double num = 2.0 * inter + cfg.eps;
    const double den = sum_p + sum_q + cfg.eps;
    // d/dp_i [1 - num/den] = -(2 q_i den - num) / den^2
    ProbMask grad(p.width, p.height);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        grad.values[i] = -(2.0 * q.values[i] * den - num) / (den * den);
    }
    return grad;
}

std::vector<double> project_columns(const ProbMask& m) {
    std::vector<double> proj(static_cast<std::size_t>(m.width), 0.0);
    for (int x = 0; x < m.width; ++x) {
        double best = m.at(x, 0);
        for (int y = 1; y < m.height; ++y) {
            best = std::max(best, m.at(x, y));
        }
        proj[x] = best;
    }
    return proj;
}

std::vector<double> project_rows(const ProbMask& m) {
    std::vector<double> proj(static_cast<std::size_t>(m.height), 0.0);
    for (int y = 0; y < m.height; ++y) {
        double best = m.at(0, y);
        for (int x = 1; x < m.width; ++x) {
            best = std::max(best, m.at(x, y));
        }
        proj[y] = best;
    }
    return proj;
}

double mil_loss(const ProbMask& m, const BinaryMask& box, const DiceConfig& cfg) {
    if (m.width != box.width || m.height != box.height) {
        throw SizeMismatch("mil_loss: mask and box dimensions differ");
    }
    const ProbMask box_p = to_prob(box);
    return dice_impl(project_columns(m), project_columns(box_p), cfg.eps) +
           dice_impl(project_rows(m), project_rows(box_p), cfg.eps);
}

ProbMask downsample_mask(const ProbMask& m, int n) {
    if (n <= 0 || m.width % n != 0 || m.height % n != 0) {
        throw NotDivisible("downsample_mask: dimensions not divisible by the target grid");
    }
    const int cw = m.width / n;
    const int ch = m.height / n;
    ProbMask out(n, n);
    for (int cy = 0; cy < n; ++cy) {
        for (int cx = 0; cx < n; ++cx) {
            double acc = 0.0;
            for (int y = cy * ch; y < (cy + 1) * ch; ++y) {
                for (int x = cx * cw; x < (cx + 1) * cw; ++x) {
                    acc += m.at(x, y);
                }
            }
            out.set(cx, cy, acc / (static_cast<double>(cw) * ch));
        }
    }
    return out;
}

double point_loss(const ProbMask& m_down, const SparseTarget& target, bool retrieved_empty,
                  const ProbMask& m, const BinaryMask& box, const LossWeights& weights,
                  const DiceConfig& cfg) {
    if (m_down.width != target.y_hat.width || m_down.height != target.y_hat.height) {
        throw SizeMismatch("point_loss: downsampled mask does not match the target grid");
    }
    ProbMask masked(m_down.width, m_down.height);
    for (std::size_t i = 0; i < masked.values.size(); ++i) {
        masked.values[i] = m_down.values[i] * (target.k_mask.values[i] ? 1.0 : 0.0);
    }
    double loss = dice_loss(masked, target.y_hat, cfg);
    if (retrieved_empty) {
        loss += weights.lambda_mil * mil_loss(m, box, cfg);
    }
    return loss;
}

ProbMask average_predictions(const ProbMask& m_s, const ProbMask& m_t) {
    require_same_size(m_s, m_t, "average_predictions");
    ProbMask avg(m_s.width, m_s.height);
    for (std::size_t i = 0; i < avg.values.size(); ++i) {
        avg.values[i] = 0.5 * (m_s.values[i] + m_t.values[i]);
    }
    return avg;
}

double crf_loss(const ProbMask& m_s, const ProbMask& m_refined, const DiceConfig& cfg) {
    return dice_loss(m_s, m_refined, cfg);
}

double overall_loss(double loss_point, double loss_crf, const LossWeights& weights) {
    if (!std::isfinite(loss_point) || !std::isfinite(loss_crf)) {
        throw NonFinite("overall_loss: non-finite component");
    }
    const double total = weights.lambda_point * loss_point + weights.lambda_crf * loss_crf;
    if (!std::isfinite(total)) {
        throw NonFinite("overall_loss: non-finite result");
    }
    return total;
}

} // namespace pointprop
