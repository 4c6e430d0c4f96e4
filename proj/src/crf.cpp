#include "pointprop/crf.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pointprop {

namespace {

constexpr double kProbClamp = 1e-6;
constexpr int kExactSideLimit = 128;

double clamp_prob(double p) {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

} // namespace

void CrfParams::validate() const {
    if (iterations < 0) {
        throw InvalidArgument("CrfParams: iterations must be >= 0");
    }
    if (w_spatial < 0.0 || w_bilateral < 0.0) {
        throw InvalidArgument("CrfParams: kernel weights must be nonnegative");
    }
    if (theta_gamma <= 0.0 || theta_alpha <= 0.0 || theta_beta <= 0.0) {
        throw InvalidArgument("CrfParams: kernel stddevs must be positive");
    }
}

std::pair<ProbMask, ProbMask> meanfield_refine_marginals(const ProbMask& m, const Image& img,
                                                         const CrfParams& params) {
    params.validate();
    if (m.width != img.width || m.height != img.height) {
        throw SizeMismatch("meanfield_refine: mask and guide image dimensions differ");
    }
    const int w = m.width;
    const int h = m.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;

    std::vector<double> unary_fg(n);
    std::vector<double> unary_bg(n);
    std::vector<double> q_fg(n);
    std::vector<double> q_bg(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pf = clamp_prob(m.values[i]);
        const double pb = clamp_prob(1.0 - m.values[i]);
        unary_fg[i] = -std::log(pf);
        unary_bg[i] = -std::log(pb);
        const double norm = pf + pb;
        q_fg[i] = pf / norm;
        q_bg[i] = pb / norm;
    }

    const double inv2_gamma = 1.0 / (2.0 * params.theta_gamma * params.theta_gamma);
    const double inv2_alpha = 1.0 / (2.0 * params.theta_alpha * params.theta_alpha);
    const double inv2_beta = 1.0 / (2.0 * params.theta_beta * params.theta_beta);

    const bool exact = w <= kExactSideLimit && h <= kExactSideLimit;
    const int radius = exact ? std::max(w, h)
                             : static_cast<int>(std::ceil(
                                   3.0 * std::max(params.theta_gamma, params.theta_alpha)));

    auto color_dist2 = [&](std::size_t i, std::size_t j) {
        double d2 = 0.0;
        for (int c = 0; c < img.channels; ++c) {
            const double d = static_cast<double>(img.values[i * img.channels + c]) -
                             static_cast<double>(img.values[j * img.channels + c]);
            d2 += d * d;
        }
        return d2;
    };

    std::vector<double> next_fg(n);
    std::vector<double> next_bg(n);
    for (int iter = 0; iter < params.iterations; ++iter) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                double msg_fg = 0.0;
                double msg_bg = 0.0;
                const int y0 = std::max(0, y - radius);
                const int y1 = std::min(h - 1, y + radius);
                const int x0 = std::max(0, x - radius);
                const int x1 = std::min(w - 1, x + radius);
                for (int yy = y0; yy <= y1; ++yy) {
                    for (int xx = x0; xx <= x1; ++xx) {
                        if (xx == x && yy == y) {
                            continue;
                        }
                        const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
                        const double dx = xx - x;
                        const double dy = yy - y;
                        const double d2 = dx * dx + dy * dy;
                        double k = params.w_spatial * std::exp(-d2 * inv2_gamma);
                        if (params.w_bilateral > 0.0) {
                            k += params.w_bilateral *
                                 std::exp(-d2 * inv2_alpha - color_dist2(i, j) * inv2_beta);
                        }
                        msg_fg += k * q_fg[j];
                        msg_bg += k * q_bg[j];
                    }
                }
                // Potts compatibility: each label is penalized by the mass of
                // the opposite one.
                const double e_fg = unary_fg[i] + params.compat * msg_bg;
                const double e_bg = unary_bg[i] + params.compat * msg_fg;
                const double shift = std::min(e_fg, e_bg);
                const double exp_fg = std::exp(-(e_fg - shift));
                const double exp_bg = std::exp(-(e_bg - shift));
                const double norm = exp_fg + exp_bg;
                next_fg[i] = exp_fg / norm;
                next_bg[i] = exp_bg / norm;
            }
        }
        q_fg.swap(next_fg);
        q_bg.swap(next_bg);
    }

    ProbMask fg(w, h);
    ProbMask bg(w, h);
    fg.values = std::move(q_fg);
    bg.values = std::move(q_bg);
    return {std::move(fg), std::move(bg)};
}

ProbMask meanfield_refine(const ProbMask& m, const Image& img, const CrfParams& params) {
    return meanfield_refine_marginals(m, img, params).first;
}

} // namespace pointprop
