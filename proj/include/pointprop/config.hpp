#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pointprop/crf.hpp"
#include "pointprop/losses.hpp"
#include "pointprop/scene.hpp"
#include "pointprop/transition.hpp"

namespace pointprop {

/// Every tunable of the pipeline in one place. Defaults follow the reference
/// operating point: alpha 3, dropout 0.9, tau_fg 1e-3, tau_bg -1e-4, delta 12
/// at the 512-pixel crop scale, loss weights (0.5 point, 0.5 crf, 10 mil).
struct RunConfig {
    // crop geometry
    int target_side = 512;
    int patch_side = 32;
    double crop_pad = 0.2;
    int delta = 12; // seed push-in margin, in resized-crop pixels

    // propagation
    int alpha = 3;
    bool absorbing = false;
    double beta = 0.25;

    // pseudo-label thresholds
    double tau_fg = 1e-3;
    double tau_bg = -1e-4;

    // point dropout
    double dropout_rate = 0.9;
    int keep_floor = 1;

    // losses
    double lambda_point = 0.5;
    double lambda_crf = 0.5;
    double lambda_mil = 10.0;
    double dice_eps = 1e-6;

    // sinkhorn
    double sinkhorn_tolerance = 1e-8;
    int sinkhorn_max_iterations = 200;

    // mean-field CRF
    int crf_iterations = 5;
    double crf_w_spatial = 3.0;
    double crf_w_bilateral = 5.0;
    double crf_theta_gamma = 3.0;
    double crf_theta_alpha = 30.0;
    double crf_theta_beta = 13.0;
    double crf_compat = 1.0;

    // synthetic similarity generator
    double sim_noise = 0.0;
    double sim_temperature = 0.2;
    double sim_color_weight = 0.2;
    double sim_embed_weight = 2.0;

    double mask_threshold = 0.5;
    std::uint64_t seed = 0;

    SinkhornConfig sinkhorn() const { return {sinkhorn_tolerance, sinkhorn_max_iterations}; }
    CrfParams crf() const {
        return {crf_iterations, crf_w_spatial, crf_w_bilateral,
                crf_theta_gamma, crf_theta_alpha, crf_theta_beta, crf_compat};
    }
    LossWeights weights() const { return {lambda_point, lambda_crf, lambda_mil}; }
    SimilarityParams similarity() const {
        return {sim_temperature, sim_color_weight, sim_embed_weight};
    }

    void validate() const;

    std::string to_json_string() const;
    static RunConfig from_json_string(const std::string& text);
};

/// Load a config from `key = value` text (# comments) or from a .json file
/// (the run.json a previous run wrote). Unknown keys are an error.
RunConfig load_run_config(const std::filesystem::path& path);

/// Write the resolved config as run.json into a run directory.
void write_run_json(const std::filesystem::path& dir, const RunConfig& config);

/// Scene spec from the same `key = value` format.
SceneSpec load_scene_spec(const std::filesystem::path& path);

} // namespace pointprop
