#pragma once

#include <cstdint>
#include <vector>

#include "pointprop/geometry.hpp"
#include "pointprop/linalg.hpp"
#include "pointprop/mask.hpp"
#include "pointprop/transition.hpp"

namespace pointprop {

/// Per-node average propagation probability to the seed sets.
struct PropagationScores {
    Vec pi_fg;
    Vec pi_bg;

    int n() const { return static_cast<int>(pi_fg.size()); }
};

enum class NodeLabel : std::uint8_t {
    Unlabeled = 0,
    Foreground = 1,
    Background = 2,
};

struct PseudoPointLabels {
    std::vector<NodeLabel> labels;
    double tau_fg = 0.0;
    double tau_bg = 0.0;
    int alpha = 0;

    std::size_t count(NodeLabel l) const;
    std::vector<int> nodes_with(NodeLabel l) const;

    bool operator==(const PseudoPointLabels& other) const = default;
};

/// Sparse binary target and the mask marking which nodes carry supervision.
struct SparseTarget {
    BinaryMask y_hat;  // 1 on foreground-supervised nodes
    BinaryMask k_mask; // 1 on every supervised node
};

struct DropoutConfig {
    double rate = 0.9;          // fraction dropped
    std::uint64_t seed = 0;
    int keep_floor = 1;         // minimum kept per nonempty label set
};

/// pi^(f)_i = mean over foreground seeds j of T(j, i), and likewise for the
/// background seeds. Throws EmptySeedSet.
PropagationScores propagation_scores(const TransitionMatrix& t_alpha, const PointSet& fg,
                                     const PointSet& bg);

/// Label nodes of `box_nodes` by the score difference pi^(f) - pi^(b):
/// foreground at >= tau_fg, background at <= tau_bg, otherwise unlabeled.
/// Nodes outside `box_nodes` stay unlabeled. Throws InvalidThresholds.
PseudoPointLabels threshold_labels(const PropagationScores& scores, const PointSet& box_nodes,
                                   double tau_fg, double tau_bg, int alpha);

/// Independently keep a uniform random subset of the foreground- and
/// background-labeled sets (size max(keep_floor, round((1-rate)*|set|)));
/// dropped nodes become unlabeled. Deterministic given the seed.
PseudoPointLabels point_dropout(const PseudoPointLabels& labels, const DropoutConfig& cfg);

/// Assemble the sparse target: y_hat marks seed-or-retrieved foreground, k_mask
/// marks all supervised nodes. Throws OverlapError when a node is claimed as
/// both foreground and background.
SparseTarget assemble_targets(const PointSet& fg, const PointSet& bg,
                              const PseudoPointLabels& labels, int patch_side);

} // namespace pointprop
