#include "pointprop/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pointprop {

namespace {

constexpr std::uint64_t kTagPlacement = 0x706c6163656d656eull;
constexpr std::uint64_t kTagOccluder = 0x6f63636c75646572ull;
constexpr std::uint64_t kTagPixels = 0x706978656c734e6full;
constexpr std::uint64_t kTagSimilarity = 0x73696d696c617269ull;

struct Rgb {
    std::uint8_t r, g, b;
};

// Hue-spaced palette; class 0 (background) stays a neutral gray so shapes are
// visible regardless of seed.
Rgb class_color(int class_id, std::uint64_t seed) {
    if (class_id == 0) {
        return Rgb{96, 96, 96};
    }
    std::uint64_t s = mix_seed(seed, 0x70616c65747465ull);
    const double offset = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    double h = std::fmod(offset + class_id * 0.61803398874989484820, 1.0);
    const double sat = 0.65;
    const double val = 0.85;
    const double c = val * sat;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0, g = 0.0, b = 0.0;
    switch (static_cast<int>(hp)) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    const double m = val - c;
    auto to8 = [m](double v) { return static_cast<std::uint8_t>(std::lround((v + m) * 255.0)); };
    return Rgb{to8(r), to8(g), to8(b)};
}

BinaryMask draw_rect(int side, const BBox& r) {
    BinaryMask m(side, side);
    for (int y = r.y_min; y <= r.y_max; ++y) {
        for (int x = r.x_min; x <= r.x_max; ++x) {
            m.set(x, y, 1);
        }
    }
    return m;
}

BinaryMask draw_ellipse(int side, double cx, double cy, double ax, double ay) {
    BinaryMask m(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double dx = (x - cx) / ax;
            const double dy = (y - cy) / ay;
            if (dx * dx + dy * dy <= 1.0) {
                m.set(x, y, 1);
            }
        }
    }
    return m;
}

bool masks_overlap(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] && b.values[i]) {
            return true;
        }
    }
    return false;
}

BinaryMask random_shape(Rng& rng, const SceneSpec& spec) {
    const int side = spec.image_side;
    const int lo = std::max(8, static_cast<int>(std::lround(side * 0.28)));
    const int hi = std::max(lo + 1, static_cast<int>(std::lround(side * 0.45)));
    switch (spec.shape_family) {
        case ShapeFamily::Rect: {
            const int w = rng.range(lo, hi);
            const int h = rng.range(lo, hi);
            const int x0 = rng.range(2, side - w - 2);
            const int y0 = rng.range(2, side - h - 2);
            return draw_rect(side, BBox{x0, y0, x0 + w - 1, y0 + h - 1});
        }
        case ShapeFamily::Ellipse: {
            const double ax = rng.range(lo, hi) / 2.0;
            const double ay = rng.range(lo, hi) / 2.0;
            const double cx = rng.range(static_cast<int>(ax) + 2,
                                        side - static_cast<int>(ax) - 3);
            const double cy = rng.range(static_cast<int>(ay) + 2,
                                        side - static_cast<int>(ay) - 3);
            return draw_ellipse(side, cx, cy, ax, ay);
        }
        case ShapeFamily::Polyomino: {
            const int cell = std::max(4, side / 16);
            const int cells = rng.range(10, 20);
            return random_polyomino(rng, side, side, cells, cell);
        }
    }
    throw InvalidArgument("random_shape: unknown shape family");
}

} // namespace

void SceneSpec::validate() const {
    if (image_side <= 0 || patch_side <= 0 || image_side % patch_side != 0) {
        throw InvalidArgument("SceneSpec: image_side must be a positive multiple of patch_side");
    }
    if (n_objects < 1) {
        throw InvalidArgument("SceneSpec: n_objects must be >= 1");
    }
    if (occluder != OccluderKind::None &&
        (occluder_min_width < 1 || occluder_max_width < occluder_min_width)) {
        throw InvalidArgument("SceneSpec: bad occluder width range");
    }
    if (noise_sigma < 0.0) {
        throw InvalidArgument("SceneSpec: noise_sigma must be nonnegative");
    }
}

int Scene::class_count() const {
    return (occluder_class > 0 ? occluder_class : n_objects()) + 1;
}

BinaryMask random_polyomino(Rng& rng, int width, int height, int n_cells, int cell_px) {
    const int gw = std::max(1, width / cell_px);
    const int gh = std::max(1, height / cell_px);
    std::set<std::pair<int, int>> cells;
    std::pair<int, int> cur{rng.range(gw / 4, gw - 1 - gw / 4), rng.range(gh / 4, gh - 1 - gh / 4)};
    cells.insert(cur);
    const int steps = std::max(1, n_cells) * 8;
    for (int s = 0; s < steps && static_cast<int>(cells.size()) < n_cells; ++s) {
        // Random walk on the cell grid; revisits keep the set connected.
        const int dir = rng.range(0, 3);
        auto next = cur;
        if (dir == 0) next.first += 1;
        if (dir == 1) next.first -= 1;
        if (dir == 2) next.second += 1;
        if (dir == 3) next.second -= 1;
        if (next.first < 0 || next.first >= gw || next.second < 0 || next.second >= gh) {
            continue;
        }
        cur = next;
        cells.insert(cur);
    }
    BinaryMask m(width, height);
    for (const auto& [cx, cy] : cells) {
        for (int y = cy * cell_px; y < std::min(height, (cy + 1) * cell_px); ++y) {
            for (int x = cx * cell_px; x < std::min(width, (cx + 1) * cell_px); ++x) {
                m.set(x, y, 1);
            }
        }
    }
    return m;
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    const int side = spec.image_side;

    Rng place_rng(mix_seed(spec.seed, kTagPlacement));
    std::vector<BinaryMask> shapes; // pre-occlusion object masks
    int attempts = 0;
    while (static_cast<int>(shapes.size()) < spec.n_objects) {
        if (++attempts > 1000) {
            throw PlacementFailure("generate_scene: could not place " +
                                   std::to_string(spec.n_objects) + " disjoint objects");
        }
        BinaryMask candidate = random_shape(place_rng, spec);
        if (candidate.count() == 0) {
            continue;
        }
        bool ok = true;
        for (const BinaryMask& placed : shapes) {
            if (masks_overlap(candidate, placed)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            shapes.push_back(std::move(candidate));
        }
    }

    Scene scene;
    scene.seed = spec.seed;
    scene.noise_sigma = spec.noise_sigma;
    scene.semantic = Image(side, side, 1, 0);
    for (int i = 0; i < spec.n_objects; ++i) {
        scene.class_ids.push_back(i + 1);
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                if (shapes[i].at(x, y)) {
                    scene.semantic.set(x, y, 0, static_cast<std::uint8_t>(i + 1));
                }
            }
        }
    }

    // The occluder sits in front of everything it covers.
    BinaryMask occluder(side, side);
    if (spec.occluder != OccluderKind::None) {
        scene.occluder_class = spec.n_objects + 1;
        Rng occ_rng(mix_seed(spec.seed, kTagOccluder));
        for (int i = 0; i < spec.n_objects; ++i) {
            const ExtremePoints ep = extract_extreme_points(shapes[i]);
            const BBox box = bbox_from_extremes(ep);
            if (spec.occluder == OccluderKind::Bar) {
                const bool vertical = occ_rng.range(0, 1) == 0;
                const int extent = vertical ? box.width() : box.height();
                const int margin = std::max(3, extent / 5);
                int width = occ_rng.range(spec.occluder_min_width, spec.occluder_max_width);
                width = std::min(width, std::max(1, extent - 2 * margin));
                const int center = vertical ? (box.x_min + box.x_max) / 2
                                            : (box.y_min + box.y_max) / 2;
                const int jitter = occ_rng.range(-extent / 8, extent / 8);
                const int lo = std::clamp(center + jitter - width / 2,
                                          (vertical ? box.x_min : box.y_min) + margin,
                                          (vertical ? box.x_max : box.y_max) - margin - width + 1);
                for (int k = lo; k < lo + width; ++k) {
                    for (int t = 0; t < side; ++t) {
                        if (vertical) {
                            occluder.set(k, t, 1);
                        } else {
                            occluder.set(t, k, 1);
                        }
                    }
                }
            } else { // Blob
                const int radius = occ_rng.range(spec.occluder_min_width, spec.occluder_max_width);
                const int cx = (box.x_min + box.x_max) / 2 + occ_rng.range(-box.width() / 6,
                                                                           box.width() / 6);
                const int cy = (box.y_min + box.y_max) / 2 + occ_rng.range(-box.height() / 6,
                                                                           box.height() / 6);
                const BinaryMask blob = draw_ellipse(side, cx, cy, radius, radius * 0.7);
                for (std::size_t p = 0; p < occluder.values.size(); ++p) {
                    occluder.values[p] |= blob.values[p];
                }
            }
        }
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                if (occluder.at(x, y)) {
                    scene.semantic.set(x, y, 0, static_cast<std::uint8_t>(scene.occluder_class));
                }
            }
        }
    }

    // Visible object masks and their annotations.
    for (int i = 0; i < spec.n_objects; ++i) {
        BinaryMask visible = shapes[i];
        for (std::size_t p = 0; p < visible.values.size(); ++p) {
            if (occluder.values.size() == visible.values.size() && occluder.values[p]) {
                visible.values[p] = 0;
            }
        }
        if (visible.count() == 0) {
            throw PlacementFailure("generate_scene: occluder swallowed object " +
                                   std::to_string(i));
        }
        scene.annotations.push_back(extract_extreme_points(visible));
        scene.gt_masks.push_back(std::move(visible));
    }

    // Appearance: class color plus mild pixel noise.
    Rng pix_rng(mix_seed(spec.seed, kTagPixels));
    scene.image = Image(side, side, 3);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const Rgb c = class_color(scene.semantic.at(x, y, 0), spec.seed);
            const std::uint8_t ch[3] = {c.r, c.g, c.b};
            for (int k = 0; k < 3; ++k) {
                const double v = ch[k] + 2.5 * pix_rng.gauss();
                scene.image.set(x, y, k,
                                static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return scene;
}

std::vector<int> node_majority_class(const Scene& scene, const CropWindow& window) {
    const int n = window.node_count();
    const int n_classes = scene.class_count();
    std::vector<int> counts(static_cast<std::size_t>(n) * n_classes, 0);
    for (int y = window.rect.y_min; y <= window.rect.y_max; ++y) {
        for (int x = window.rect.x_min; x <= window.rect.x_max; ++x) {
            const int node = pixel_to_patch(Pixel{x, y}, window);
            const int cls = scene.semantic.at(x, y, 0);
            counts[static_cast<std::size_t>(node) * n_classes + cls] += 1;
        }
    }
    std::vector<int> majority(n, 0);
    for (int node = 0; node < n; ++node) {
        int best = 0;
        for (int cls = 1; cls < n_classes; ++cls) {
            if (counts[static_cast<std::size_t>(node) * n_classes + cls] >
                counts[static_cast<std::size_t>(node) * n_classes + best]) {
                best = cls;
            }
        }
        majority[node] = best;
    }
    return majority;
}

SimilarityMatrix similarity_from_scene(const Scene& scene, int object_index,
                                       const CropWindow& window, double sigma,
                                       const SimilarityParams& params) {
    window.validate();
    if (object_index < 0 || object_index >= scene.n_objects()) {
        throw InvalidArgument("similarity_from_scene: object index out of range");
    }
    const int n = window.node_count();
    const int n_classes = scene.class_count();

    // Mean color per node.
    std::vector<double> color_sum(static_cast<std::size_t>(n) * 3, 0.0);
    std::vector<int> pixel_count(n, 0);
    for (int y = window.rect.y_min; y <= window.rect.y_max; ++y) {
        for (int x = window.rect.x_min; x <= window.rect.x_max; ++x) {
            const int node = pixel_to_patch(Pixel{x, y}, window);
            for (int c = 0; c < 3; ++c) {
                color_sum[static_cast<std::size_t>(node) * 3 + c] += scene.image.at(x, y, c);
            }
            pixel_count[node] += 1;
        }
    }
    const std::vector<int> majority = node_majority_class(scene, window);

    const int dim = 3 + n_classes;
    Mat features = Mat::Zero(n, dim);
    Rng noise_rng(mix_seed(scene.seed, static_cast<std::uint64_t>(object_index) + 1,
                           kTagSimilarity));
    for (int node = 0; node < n; ++node) {
        const double inv = pixel_count[node] > 0 ? 1.0 / pixel_count[node] : 0.0;
        for (int c = 0; c < 3; ++c) {
            features(node, c) = params.color_weight *
                                (color_sum[static_cast<std::size_t>(node) * 3 + c] * inv / 255.0);
        }
        features(node, 3 + majority[node]) = params.embed_weight;
        if (sigma > 0.0) {
            for (int d = 0; d < dim; ++d) {
                features(node, d) += sigma * noise_rng.gauss();
            }
        }
    }

    const Mat logits = features * features.transpose() / params.temperature;
    Mat s(n, n);
    for (int i = 0; i < n; ++i) {
        const double row_max = logits.row(i).maxCoeff();
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            s(i, j) = std::exp(logits(i, j) - row_max);
            denom += s(i, j);
        }
        s.row(i) /= denom;
    }
    return SimilarityMatrix{std::move(s)};
}

PseudoPointLabels tightness_baseline_labels(const CropWindow& window, const BBox& box,
                                            const SimilarityMatrix& similarity,
                                            const PointSet& fg) {
    window.validate();
    const int n = window.node_count();
    if (similarity.n() != n) {
        throw SizeMismatch("tightness_baseline_labels: similarity size != node count");
    }
    const BBox tbox = target_rect(box, window);

    std::vector<bool> in_box(n, false);
    for (int node = 0; node < n; ++node) {
        const BBox pr = patch_rect(node, window);
        const double cx = 0.5 * (pr.x_min + pr.x_max);
        const double cy = 0.5 * (pr.y_min + pr.y_max);
        in_box[node] = cx >= tbox.x_min && cx <= tbox.x_max && cy >= tbox.y_min && cy <= tbox.y_max;
    }

    Vec affinity = Vec::Zero(n);
    for (int j : fg.nodes) {
        affinity += similarity.values.row(j).transpose();
    }
    if (!fg.empty()) {
        affinity /= static_cast<double>(fg.size());
    }

    PseudoPointLabels out;
    out.labels.assign(n, NodeLabel::Unlabeled);
    out.tau_fg = 0.0;
    out.tau_bg = 0.0;
    out.alpha = 0;
    for (int node = 0; node < n; ++node) {
        if (!in_box[node]) {
            out.labels[node] = NodeLabel::Background;
        }
    }
    const int ps = window.patch_side;
    // Every grid line crossing the box must claim one node: the MIL-argmax
    // reading of the tightness prior.
    auto claim_best = [&](bool by_row, int index) {
        int best = -1;
        for (int k = 0; k < ps; ++k) {
            const int node = by_row ? index * ps + k : k * ps + index;
            if (!in_box[node]) {
                continue;
            }
            if (best < 0 || affinity(node) > affinity(best)) {
                best = node;
            }
        }
        if (best >= 0) {
            out.labels[best] = NodeLabel::Foreground;
        }
    };
    for (int r = 0; r < ps; ++r) {
        claim_best(true, r);
    }
    for (int c = 0; c < ps; ++c) {
        claim_best(false, c);
    }
    return out;
}

} // namespace pointprop
