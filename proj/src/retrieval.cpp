#include "pointprop/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pointprop/rng.hpp"

namespace pointprop {

std::size_t PseudoPointLabels::count(NodeLabel l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

std::vector<int> PseudoPointLabels::nodes_with(NodeLabel l) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == l) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

PropagationScores propagation_scores(const TransitionMatrix& t_alpha, const PointSet& fg,
                                     const PointSet& bg) {
    if (fg.empty() || bg.empty()) {
        throw EmptySeedSet("propagation_scores: seed sets must be nonempty");
    }
    const int n = t_alpha.n();
    auto mean_rows = [&](const PointSet& seeds) {
        Vec pi = Vec::Zero(n);
        for (int j : seeds.nodes) {
            if (j >= n) {
                throw InvalidArgument("propagation_scores: seed node out of range");
            }
            pi += t_alpha.values.row(j).transpose();
        }
        pi /= static_cast<double>(seeds.size());
        return pi;
    };
    return PropagationScores{mean_rows(fg), mean_rows(bg)};
}

PseudoPointLabels threshold_labels(const PropagationScores& scores, const PointSet& box_nodes,
                                   double tau_fg, double tau_bg, int alpha) {
    if (tau_bg >= tau_fg) {
        throw InvalidThresholds("threshold_labels: tau_bg must be < tau_fg");
    }
    PseudoPointLabels out;
    out.labels.assign(static_cast<std::size_t>(scores.n()), NodeLabel::Unlabeled);
    out.tau_fg = tau_fg;
    out.tau_bg = tau_bg;
    out.alpha = alpha;
    for (int i : box_nodes.nodes) {
        const double diff = scores.pi_fg(i) - scores.pi_bg(i);
        if (diff >= tau_fg) {
            out.labels[i] = NodeLabel::Foreground;
        } else if (diff <= tau_bg) {
            out.labels[i] = NodeLabel::Background;
        }
    }
    return out;
}

namespace {

// First `keep` entries of a seeded partial Fisher-Yates shuffle.
std::vector<int> sample_subset(const std::vector<int>& pool, std::size_t keep, Rng& rng) {
    std::vector<int> items = pool;
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(items.size() - i));
        std::swap(items[i], items[j]);
    }
    items.resize(keep);
    return items;
}

} // namespace

PseudoPointLabels point_dropout(const PseudoPointLabels& labels, const DropoutConfig& cfg) {
    if (cfg.rate < 0.0 || cfg.rate >= 1.0) {
        throw InvalidArgument("point_dropout: rate must be in [0, 1)");
    }
    if (cfg.keep_floor < 1) {
        throw InvalidArgument("point_dropout: keep_floor must be >= 1");
    }
    PseudoPointLabels out = labels;
    // Disjoint RNG streams per label set, so resizing one set never perturbs
    // the other set's draw.
    const NodeLabel kinds[2] = {NodeLabel::Foreground, NodeLabel::Background};
    const std::uint64_t tags[2] = {0x66672d73656564ull, 0x62672d73656564ull};
    for (int k = 0; k < 2; ++k) {
        const std::vector<int> pool = labels.nodes_with(kinds[k]);
        if (pool.empty()) {
            continue;
        }
        std::size_t keep = static_cast<std::size_t>(
            std::llround((1.0 - cfg.rate) * static_cast<double>(pool.size())));
        keep = std::max(keep, static_cast<std::size_t>(cfg.keep_floor));
        keep = std::min(keep, pool.size());
        Rng rng(mix_seed(cfg.seed, tags[k]));
        const std::vector<int> survivors = sample_subset(pool, keep, rng);
        for (int node : pool) {
            out.labels[node] = NodeLabel::Unlabeled;
        }
        for (int node : survivors) {
            out.labels[node] = kinds[k];
        }
    }
    return out;
}

SparseTarget assemble_targets(const PointSet& fg, const PointSet& bg,
                              const PseudoPointLabels& labels, int patch_side) {
    const int n = patch_side * patch_side;
    if (static_cast<int>(labels.labels.size()) != n) {
        throw SizeMismatch("assemble_targets: label vector does not match the patch grid");
    }
    std::vector<std::uint8_t> is_fg(n, 0);
    std::vector<std::uint8_t> is_bg(n, 0);
    for (int node : fg.nodes) {
        is_fg[node] = 1;
    }
    for (int node : bg.nodes) {
        is_bg[node] = 1;
    }
    for (int i = 0; i < n; ++i) {
        if (labels.labels[i] == NodeLabel::Foreground) {
            is_fg[i] = 1;
        } else if (labels.labels[i] == NodeLabel::Background) {
            is_bg[i] = 1;
        }
    }
    SparseTarget target{BinaryMask(patch_side, patch_side), BinaryMask(patch_side, patch_side)};
    for (int i = 0; i < n; ++i) {
        if (is_fg[i] && is_bg[i]) {
            throw OverlapError("assemble_targets: node " + std::to_string(i) +
                               " claimed as both foreground and background");
        }
        const int x = i % patch_side;
        const int y = i / patch_side;
        target.y_hat.set(x, y, is_fg[i]);
        target.k_mask.set(x, y, is_fg[i] || is_bg[i] ? 1 : 0);
    }
    return target;
}

} // namespace pointprop
