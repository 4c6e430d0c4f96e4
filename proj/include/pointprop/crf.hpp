#pragma once

#include <utility>

#include "pointprop/mask.hpp"

namespace pointprop {

/// Binary dense-CRF mean-field settings. Stddevs are in pixels (spatial) and
/// 0..255 intensity units (color); compat is the Potts penalty for differing
/// labels.
struct CrfParams {
    int iterations = 5;
    double w_spatial = 3.0;
    double w_bilateral = 5.0;
    double theta_gamma = 3.0;  // spatial kernel stddev
    double theta_alpha = 30.0; // bilateral spatial stddev
    double theta_beta = 13.0;  // bilateral color stddev
    double compat = 1.0;

    void validate() const;
};

/// Mean-field refinement of a foreground probability mask guided by image
/// appearance. Unaries are -log of the clamped {M, 1-M} pair; updates are
/// synchronous. Images up to 128 pixels a side use exact dense pairwise sums;
/// larger ones a window truncated at radius 3 * max(theta_gamma, theta_alpha).
ProbMask meanfield_refine(const ProbMask& m, const Image& img, const CrfParams& params);

/// Same computation, returning both per-pixel marginals (foreground first).
std::pair<ProbMask, ProbMask> meanfield_refine_marginals(const ProbMask& m, const Image& img,
                                                         const CrfParams& params);

} // namespace pointprop
