#pragma once

#include <array>
#include <compare>
#include <vector>

#include "pointprop/errors.hpp"
#include "pointprop/mask.hpp"

namespace pointprop {

/// Integer pixel coordinate, origin top-left, y grows downward.
struct Pixel {
    int x = 0;
    int y = 0;

    auto operator<=>(const Pixel&) const = default;
};

/// Axis-aligned box with inclusive bounds.
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }

    bool contains(Pixel p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    bool contains(const BBox& other) const {
        return other.x_min >= x_min && other.x_max <= x_max && other.y_min >= y_min &&
               other.y_max <= y_max;
    }
    bool intersects(const BBox& other) const {
        return !(other.x_max < x_min || other.x_min > x_max || other.y_max < y_min ||
                 other.y_min > y_max);
    }

    bool operator==(const BBox&) const = default;
};

/// The four outermost pixels of an object along the cardinal directions.
struct ExtremePoints {
    Pixel top;    // minimal y
    Pixel left;   // minimal x
    Pixel bottom; // maximal y
    Pixel right;  // maximal x

    /// Ordering invariants (top.y <= bottom.y, left.x <= right.x).
    bool ordered() const { return top.y <= bottom.y && left.x <= right.x; }

    bool operator==(const ExtremePoints&) const = default;
};

/// Crop-and-resize window: `rect` in source-image coordinates is resized to a
/// target_side x target_side square carrying a patch_side x patch_side node grid.
struct CropWindow {
    BBox rect;
    int target_side = 0;
    int patch_side = 0;

    int node_count() const { return patch_side * patch_side; }
    int patch_pixels() const { return target_side / patch_side; }

    void validate() const;

    /// Window whose source rect is the target square itself (no resampling).
    static CropWindow identity(int target_side, int patch_side);
};

enum class PointRole {
    InitialForeground,
    InitialBackground,
    BoxInterior,
};

/// Duplicate-free, strictly increasing set of patch-grid node indices.
struct PointSet {
    PointRole role = PointRole::InitialForeground;
    std::vector<int> nodes;

    static PointSet from_nodes(PointRole role, std::vector<int> nodes, int node_count);

    bool contains(int node) const;
    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
};

/// The tight box implied by extreme points.
BBox bbox_from_extremes(const ExtremePoints& ep);

/// Extreme points of a nonempty mask; ties broken by the minimal secondary
/// coordinate. Throws EmptyMask.
ExtremePoints extract_extreme_points(const BinaryMask& mask);

/// Object box dilated by `pad` of its side length per side, clamped to the
/// image, carrying the target/patch grid.
CropWindow make_crop_window(const BBox& box, int image_width, int image_height, double pad,
                            int target_side, int patch_side);

/// Map a source pixel into target coordinates of the window (crop then resize).
Pixel to_target(Pixel p, const CropWindow& window);

/// Map a source box into target coordinates (corner-wise; the mapping is monotone).
BBox target_rect(const BBox& box, const CropWindow& window);

/// Row-major node index of the patch containing `p`. Throws OutOfWindow.
int pixel_to_patch(Pixel p, const CropWindow& window);

/// Target-space pixel rect covered by a node.
BBox patch_rect(int node, const CropWindow& window);

/// The four extreme points pushed inward by `delta` pixels (top moves down,
/// bottom up, left right, right left), clamped into `box`.
std::array<Pixel, 4> push_inward(const ExtremePoints& ep, int delta, const BBox& box);

/// Initial foreground seed nodes: pushed extreme points mapped to the patch
/// grid, deduplicated.
PointSet initial_foreground(const ExtremePoints& ep, int delta, const BBox& box,
                            const CropWindow& window);

/// Nodes whose patch area lies entirely outside `box`; patches straddling the
/// box edge are excluded. Throws EmptyBackground when no such patch exists.
PointSet initial_background(const BBox& box, const CropWindow& window);

/// Nodes whose patch center lies inside `box`, minus the foreground seeds.
PointSet box_interior(const BBox& box, const CropWindow& window, const PointSet& fg);

} // namespace pointprop
