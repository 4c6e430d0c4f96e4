#pragma once

#include "pointprop/config.hpp"
#include "pointprop/geometry.hpp"
#include "pointprop/retrieval.hpp"
#include "pointprop/scene.hpp"
#include "pointprop/transition.hpp"

namespace pointprop {

/// Everything the per-object first-stage pipeline produces for one annotation.
struct ObjectPipelineResult {
    BBox box;               // object box, source coordinates
    CropWindow window;      // crop-and-resize geometry
    BBox target_box;        // object box in resized-crop coordinates
    PointSet fg;            // initial foreground seeds (patch nodes)
    PointSet bg;            // initial background seeds
    PointSet box_nodes;     // candidate nodes inside the box
    SimilarityMatrix similarity;
    TransitionMatrix propagated;
    PropagationScores scores;
    PseudoPointLabels labels; // thresholded, before dropout
    bool mil_fallback = false;
};

/// Seed geometry alone (no propagation); used wherever only the point sets
/// are needed.
struct SeedGeometry {
    BBox box;
    CropWindow window;
    BBox target_box;
    PointSet fg;
    PointSet bg;
    PointSet box_nodes;
};

SeedGeometry derive_seeds(const ExtremePoints& ep, int image_width, int image_height,
                          const RunConfig& config);

/// Extreme points -> seeds -> similarity -> doubly-stochastic transition ->
/// propagation -> thresholded labels, per the run config (alpha hops, or the
/// absorbing closed form when config.absorbing is set).
ObjectPipelineResult run_object_pipeline(const Scene& scene, int object_index,
                                         const RunConfig& config);

/// Paint foreground-labeled patches back onto the source image grid.
BinaryMask labels_to_mask(const PseudoPointLabels& labels, const CropWindow& window,
                          int image_width, int image_height);

/// Same painting as probabilities (1 on foreground patches), for refinement.
ProbMask labels_to_prob(const PseudoPointLabels& labels, const CropWindow& window,
                        int image_width, int image_height);

/// Per-object dropout seed: run seed, object id and epoch index mixed into
/// one stream so objects and epochs draw independently.
std::uint64_t derive_dropout_seed(std::uint64_t run_seed, int object_id, int epoch);

} // namespace pointprop
