#pragma once

#include <cstdint>
#include <vector>

#include "pointprop/geometry.hpp"
#include "pointprop/mask.hpp"
#include "pointprop/retrieval.hpp"
#include "pointprop/rng.hpp"
#include "pointprop/transition.hpp"

namespace pointprop {

enum class ShapeFamily {
    Rect,
    Ellipse,
    Polyomino,
};

enum class OccluderKind {
    None,
    Bar,
    Blob,
};

struct SceneSpec {
    int image_side = 128;
    int patch_side = 16;
    int n_objects = 1;
    ShapeFamily shape_family = ShapeFamily::Ellipse;
    OccluderKind occluder = OccluderKind::None;
    int occluder_min_width = 12;
    int occluder_max_width = 20;
    double noise_sigma = 0.0; // similarity feature noise
    std::uint64_t seed = 0;

    void validate() const;
};

/// Synthetic ground truth: class-colored image, per-object masks (with the
/// occluder cut out), a per-pixel class-id field, and the derived extreme
/// point annotations.
struct Scene {
    Image image;                 // 3-channel appearance
    Image semantic;              // 1-channel class ids: 0 background, 1..n objects
    std::vector<BinaryMask> gt_masks;
    std::vector<ExtremePoints> annotations;
    std::vector<int> class_ids;  // per object
    int occluder_class = 0;      // 0 when no occluder was drawn
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    int n_objects() const { return static_cast<int>(gt_masks.size()); }
    int class_count() const; // background + objects + occluder (if any)
};

/// Feature construction behind the synthetic similarity matrix.
struct SimilarityParams {
    double temperature = 0.2;
    double color_weight = 0.2; // weight of the mean-color feature block
    double embed_weight = 2.0; // weight of the one-hot class embedding
};

/// Deterministically generate a scene; throws PlacementFailure when the
/// objects cannot be placed disjointly within the attempt budget.
Scene generate_scene(const SceneSpec& spec);

/// Majority semantic class per patch node of the window (ties to the lower
/// class id).
std::vector<int> node_majority_class(const Scene& scene, const CropWindow& window);

/// Row-stochastic similarity over patch nodes: softmax of feature dot
/// products, features = mean patch color + majority-class embedding +
/// Gaussian noise. Deterministic given (scene seed, object index, sigma).
SimilarityMatrix similarity_from_scene(const Scene& scene, int object_index,
                                       const CropWindow& window, double sigma,
                                       const SimilarityParams& params = {});

/// Box-tightness reading of the annotation: per patch row and column crossing
/// the box, label foreground the in-box node most similar to the seeds;
/// out-of-box nodes are background, the rest unlabeled.
PseudoPointLabels tightness_baseline_labels(const CropWindow& window, const BBox& box,
                                            const SimilarityMatrix& similarity,
                                            const PointSet& fg);

/// Random connected polyomino on a width x height grid (at least one cell).
BinaryMask random_polyomino(Rng& rng, int width, int height, int n_cells, int cell_px);

} // namespace pointprop
