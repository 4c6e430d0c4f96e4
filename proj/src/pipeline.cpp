#include "pointprop/pipeline.hpp"

#include "pointprop/rng.hpp"

namespace pointprop {

SeedGeometry derive_seeds(const ExtremePoints& ep, int image_width, int image_height,
                          const RunConfig& config) {
    SeedGeometry geom;
    geom.box = bbox_from_extremes(ep);
    geom.window = make_crop_window(geom.box, image_width, image_height, config.crop_pad,
                                   config.target_side, config.patch_side);
    geom.target_box = target_rect(geom.box, geom.window);

    // Seed geometry lives in resized-crop coordinates: the push-in margin is
    // defined at the crop scale, not the source scale.
    const ExtremePoints ep_target{
        to_target(ep.top, geom.window), to_target(ep.left, geom.window),
        to_target(ep.bottom, geom.window), to_target(ep.right, geom.window)};
    const CropWindow identity =
        CropWindow::identity(config.target_side, config.patch_side);
    geom.fg = initial_foreground(ep_target, config.delta, geom.target_box, identity);
    geom.bg = initial_background(geom.target_box, identity);
    geom.box_nodes = box_interior(geom.target_box, identity, geom.fg);
    return geom;
}

ObjectPipelineResult run_object_pipeline(const Scene& scene, int object_index,
                                         const RunConfig& config) {
    config.validate();
    ObjectPipelineResult result;
    SeedGeometry geom = derive_seeds(scene.annotations[object_index], scene.image.width,
                                     scene.image.height, config);
    result.box = geom.box;
    result.window = geom.window;
    result.target_box = geom.target_box;
    result.fg = std::move(geom.fg);
    result.bg = std::move(geom.bg);
    result.box_nodes = std::move(geom.box_nodes);

    result.similarity = similarity_from_scene(scene, object_index, result.window,
                                              config.sim_noise, config.similarity());
    const Mat scaled = sinkhorn(result.similarity, config.sinkhorn());
    const TransitionMatrix tpm = symmetrize(scaled);
    result.propagated = config.absorbing ? propagate_absorbing(tpm, config.beta)
                                         : propagate_power(tpm, config.alpha);
    result.scores = propagation_scores(result.propagated, result.fg, result.bg);
    result.labels = threshold_labels(result.scores, result.box_nodes, config.tau_fg,
                                     config.tau_bg, config.alpha);
    result.mil_fallback = result.labels.count(NodeLabel::Foreground) == 0 &&
                          result.labels.count(NodeLabel::Background) == 0;
    return result;
}

BinaryMask labels_to_mask(const PseudoPointLabels& labels, const CropWindow& window,
                          int image_width, int image_height) {
    BinaryMask mask(image_width, image_height);
    for (int y = window.rect.y_min; y <= window.rect.y_max; ++y) {
        for (int x = window.rect.x_min; x <= window.rect.x_max; ++x) {
            const int node = pixel_to_patch(Pixel{x, y}, window);
            if (labels.labels[node] == NodeLabel::Foreground) {
                mask.set(x, y, 1);
            }
        }
    }
    return mask;
}

ProbMask labels_to_prob(const PseudoPointLabels& labels, const CropWindow& window,
                        int image_width, int image_height) {
    ProbMask mask(image_width, image_height, 0.0);
    for (int y = window.rect.y_min; y <= window.rect.y_max; ++y) {
        for (int x = window.rect.x_min; x <= window.rect.x_max; ++x) {
            const int node = pixel_to_patch(Pixel{x, y}, window);
            if (labels.labels[node] == NodeLabel::Foreground) {
                mask.set(x, y, 1.0);
            }
        }
    }
    return mask;
}

std::uint64_t derive_dropout_seed(std::uint64_t run_seed, int object_id, int epoch) {
    return mix_seed(run_seed, static_cast<std::uint64_t>(object_id),
                    static_cast<std::uint64_t>(epoch));
}

} // namespace pointprop
