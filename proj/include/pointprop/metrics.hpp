#pragma once

#include <optional>
#include <vector>

#include "pointprop/mask.hpp"
#include "pointprop/retrieval.hpp"

namespace pointprop {

/// Intersection over union; 1 when both masks are empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);

/// Precision/recall of point labels against patch-level ground truth.
/// Empty-denominator metrics are left unset rather than forced to 0.
struct PointPr {
    std::optional<double> precision_fg;
    std::optional<double> recall_fg;
    std::optional<double> precision_bg;
    std::optional<double> recall_bg;
};

/// `node_is_object[i]` says whether node i belongs to the object at patch
/// granularity (everything else counts as background).
PointPr point_label_pr(const PseudoPointLabels& labels,
                       const std::vector<std::uint8_t>& node_is_object);

/// Weakly-supervised score divided by the fully-supervised counterpart.
double retention(double ap_weak, double ap_full);

struct EvalReport {
    std::vector<double> per_object_iou;
    double mean_iou = 0.0;
    std::optional<double> point_precision_fg;
    std::optional<double> point_recall_fg;
    std::optional<double> point_precision_bg;
    std::optional<double> point_recall_bg;
    int n_objects = 0;
};

/// Aggregate per-object IoUs and pooled point-label counts into one report.
EvalReport make_report(const std::vector<double>& ious,
                       const std::vector<PointPr>& prs);

} // namespace pointprop
