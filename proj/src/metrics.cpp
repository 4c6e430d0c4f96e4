#include "pointprop/metrics.hpp"

#include <numeric>

namespace pointprop {

double iou(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.width != gt.width || pred.height != gt.height) {
        throw SizeMismatch("iou: mask dimensions differ");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const bool p = pred.values[i] != 0;
        const bool g = gt.values[i] != 0;
        inter += (p && g);
        uni += (p || g);
    }
    if (uni == 0) {
        return 1.0; // both empty: full agreement
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

PointPr point_label_pr(const PseudoPointLabels& labels,
                       const std::vector<std::uint8_t>& node_is_object) {
    if (labels.labels.size() != node_is_object.size()) {
        throw SizeMismatch("point_label_pr: label and ground-truth sizes differ");
    }
    std::size_t tp_fg = 0, fp_fg = 0, tp_bg = 0, fp_bg = 0;
    std::size_t gt_obj = 0, gt_bg = 0;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const bool is_obj = node_is_object[i] != 0;
        gt_obj += is_obj;
        gt_bg += !is_obj;
        if (labels.labels[i] == NodeLabel::Foreground) {
            (is_obj ? tp_fg : fp_fg) += 1;
        } else if (labels.labels[i] == NodeLabel::Background) {
            (!is_obj ? tp_bg : fp_bg) += 1;
        }
    }
    PointPr pr;
    if (tp_fg + fp_fg > 0) {
        pr.precision_fg = static_cast<double>(tp_fg) / static_cast<double>(tp_fg + fp_fg);
    }
    if (gt_obj > 0) {
        pr.recall_fg = static_cast<double>(tp_fg) / static_cast<double>(gt_obj);
    }
    if (tp_bg + fp_bg > 0) {
        pr.precision_bg = static_cast<double>(tp_bg) / static_cast<double>(tp_bg + fp_bg);
    }
    if (gt_bg > 0) {
        pr.recall_bg = static_cast<double>(tp_bg) / static_cast<double>(gt_bg);
    }
    return pr;
}

double retention(double ap_weak, double ap_full) {
    if (ap_full <= 0.0) {
        throw DivisionByZero("retention: fully-supervised score must be positive");
    }
    return ap_weak / ap_full;
}

namespace {

std::optional<double> mean_defined(const std::vector<PointPr>& prs,
                                   std::optional<double> PointPr::* field) {
    double sum = 0.0;
    int count = 0;
    for (const PointPr& pr : prs) {
        if (pr.*field) {
            sum += *(pr.*field);
            count += 1;
        }
    }
    if (count == 0) {
        return std::nullopt;
    }
    return sum / count;
}

} // namespace

EvalReport make_report(const std::vector<double>& ious, const std::vector<PointPr>& prs) {
    EvalReport report;
    report.per_object_iou = ious;
    report.n_objects = static_cast<int>(ious.size());
    if (!ious.empty()) {
        report.mean_iou =
            std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());
    }
    report.point_precision_fg = mean_defined(prs, &PointPr::precision_fg);
    report.point_recall_fg = mean_defined(prs, &PointPr::recall_fg);
    report.point_precision_bg = mean_defined(prs, &PointPr::precision_bg);
    report.point_recall_bg = mean_defined(prs, &PointPr::recall_bg);
    return report;
}

} // namespace pointprop
