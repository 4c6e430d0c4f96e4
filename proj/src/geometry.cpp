#include "pointprop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace pointprop {

void CropWindow::validate() const {
    if (target_side <= 0 || patch_side <= 0) {
        throw InvalidArgument("CropWindow: sides must be positive");
    }
    if (target_side % patch_side != 0) {
        throw InvalidArgument("CropWindow: target_side must be divisible by patch_side");
    }
    if (rect.x_min > rect.x_max || rect.y_min > rect.y_max) {
        throw InvalidArgument("CropWindow: degenerate rect");
    }
}

CropWindow CropWindow::identity(int target_side, int patch_side) {
    CropWindow w{BBox{0, 0, target_side - 1, target_side - 1}, target_side, patch_side};
    w.validate();
    return w;
}

PointSet PointSet::from_nodes(PointRole role, std::vector<int> nodes, int node_count) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (int n : nodes) {
        if (n < 0 || n >= node_count) {
            throw InvalidArgument("PointSet: node index out of range");
        }
    }
    return PointSet{role, std::move(nodes)};
}

bool PointSet::contains(int node) const {
    return std::binary_search(nodes.begin(), nodes.end(), node);
}

BBox bbox_from_extremes(const ExtremePoints& ep) {
    return BBox{ep.left.x, ep.top.y, ep.right.x, ep.bottom.y};
}

ExtremePoints extract_extreme_points(const BinaryMask& mask) {
    bool found = false;
    ExtremePoints ep;
    // Row-major scan; visiting order makes the min-secondary tie-break fall out
    // of strict comparisons.
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            const Pixel p{x, y};
            if (!found) {
                ep.top = ep.left = ep.bottom = ep.right = p;
                found = true;
                continue;
            }
            if (p.y < ep.top.y || (p.y == ep.top.y && p.x < ep.top.x)) {
                ep.top = p;
            }
            if (p.x < ep.left.x || (p.x == ep.left.x && p.y < ep.left.y)) {
                ep.left = p;
            }
            if (p.y > ep.bottom.y || (p.y == ep.bottom.y && p.x < ep.bottom.x)) {
                ep.bottom = p;
            }
            if (p.x > ep.right.x || (p.x == ep.right.x && p.y < ep.right.y)) {
                ep.right = p;
            }
        }
    }
    if (!found) {
        throw EmptyMask("extract_extreme_points: mask has no foreground pixel");
    }
    return ep;
}

CropWindow make_crop_window(const BBox& box, int image_width, int image_height, double pad,
                            int target_side, int patch_side) {
    if (pad < 0.0) {
        throw InvalidArgument("make_crop_window: pad must be nonnegative");
    }
    const int px = static_cast<int>(std::lround(pad * box.width()));
    const int py = static_cast<int>(std::lround(pad * box.height()));
    BBox rect{box.x_min - px, box.y_min - py, box.x_max + px, box.y_max + py};
    rect.x_min = std::max(rect.x_min, 0);
    rect.y_min = std::max(rect.y_min, 0);
    rect.x_max = std::min(rect.x_max, image_width - 1);
    rect.y_max = std::min(rect.y_max, image_height - 1);
    CropWindow window{rect, target_side, patch_side};
    window.validate();
    if (!rect.contains(box)) {
        throw InvalidArgument("make_crop_window: object box exceeds image bounds");
    }
    return window;
}

Pixel to_target(Pixel p, const CropWindow& window) {
    if (!window.rect.contains(p)) {
        throw OutOfWindow("to_target: pixel outside crop window");
    }
    const std::int64_t qx = p.x - window.rect.x_min;
    const std::int64_t qy = p.y - window.rect.y_min;
    const int tx = static_cast<int>(qx * window.target_side / window.rect.width());
    const int ty = static_cast<int>(qy * window.target_side / window.rect.height());
    return Pixel{tx, ty};
}

BBox target_rect(const BBox& box, const CropWindow& window) {
    // Clip to the window first; the index mapping is monotone, so corners
    // suffice.
    BBox clipped{std::max(box.x_min, window.rect.x_min), std::max(box.y_min, window.rect.y_min),
                 std::min(box.x_max, window.rect.x_max), std::min(box.y_max, window.rect.y_max)};
    if (clipped.x_min > clipped.x_max || clipped.y_min > clipped.y_max) {
        throw InvalidArgument("target_rect: box does not intersect the window");
    }
    const Pixel lo = to_target(Pixel{clipped.x_min, clipped.y_min}, window);
    const Pixel hi = to_target(Pixel{clipped.x_max, clipped.y_max}, window);
    return BBox{lo.x, lo.y, hi.x, hi.y};
}

int pixel_to_patch(Pixel p, const CropWindow& window) {
    const Pixel t = to_target(p, window);
    const int pp = window.patch_pixels();
    const int col = t.x / pp;
    const int row = t.y / pp;
    return row * window.patch_side + col;
}

BBox patch_rect(int node, const CropWindow& window) {
    const int pp = window.patch_pixels();
    const int row = node / window.patch_side;
    const int col = node % window.patch_side;
    return BBox{col * pp, row * pp, (col + 1) * pp - 1, (row + 1) * pp - 1};
}

std::array<Pixel, 4> push_inward(const ExtremePoints& ep, int delta, const BBox& box) {
    if (delta < 0) {
        throw InvalidArgument("push_inward: delta must be nonnegative");
    }
    auto clamp_into = [&box](Pixel p) {
        return Pixel{std::clamp(p.x, box.x_min, box.x_max), std::clamp(p.y, box.y_min, box.y_max)};
    };
    return {
        clamp_into(Pixel{ep.top.x, ep.top.y + delta}),
        clamp_into(Pixel{ep.left.x + delta, ep.left.y}),
        clamp_into(Pixel{ep.bottom.x, ep.bottom.y - delta}),
        clamp_into(Pixel{ep.right.x - delta, ep.right.y}),
    };
}

PointSet initial_foreground(const ExtremePoints& ep, int delta, const BBox& box,
                            const CropWindow& window) {
    const auto pushed = push_inward(ep, delta, box);
    std::vector<int> nodes;
    nodes.reserve(4);
    for (const Pixel& p : pushed) {
        nodes.push_back(pixel_to_patch(p, window));
    }
    return PointSet::from_nodes(PointRole::InitialForeground, std::move(nodes),
                                window.node_count());
}

PointSet initial_background(const BBox& box, const CropWindow& window) {
    window.validate();
    const BBox tbox = target_rect(box, window);
    std::vector<int> nodes;
    for (int node = 0; node < window.node_count(); ++node) {
        if (!patch_rect(node, window).intersects(tbox)) {
            nodes.push_back(node);
        }
    }
    if (nodes.empty()) {
        throw EmptyBackground("initial_background: box covers the whole crop window");
    }
    return PointSet::from_nodes(PointRole::InitialBackground, std::move(nodes),
                                window.node_count());
}

PointSet box_interior(const BBox& box, const CropWindow& window, const PointSet& fg) {
    window.validate();
    const BBox tbox = target_rect(box, window);
    std::vector<int> nodes;
    for (int node = 0; node < window.node_count(); ++node) {
        const BBox pr = patch_rect(node, window);
        const double cx = 0.5 * (pr.x_min + pr.x_max);
        const double cy = 0.5 * (pr.y_min + pr.y_max);
        const bool inside = cx >= tbox.x_min && cx <= tbox.x_max && cy >= tbox.y_min &&
                            cy <= tbox.y_max;
        if (inside && !fg.contains(node)) {
            nodes.push_back(node);
        }
    }
    return PointSet::from_nodes(PointRole::BoxInterior, std::move(nodes), window.node_count());
}

} // namespace pointprop
