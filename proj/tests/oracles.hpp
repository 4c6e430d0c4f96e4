#pragma once

// Brute-force reference implementations used to pin expected values. These are
// written independently of the library code paths they check: plain loops,
// no shared helpers beyond the data types.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pointprop/geometry.hpp"
#include "pointprop/linalg.hpp"
#include "pointprop/mask.hpp"

namespace oracles {

using pointprop::BBox;
using pointprop::BinaryMask;
using pointprop::Image;
using pointprop::Mat;
using pointprop::ProbMask;

/// Tight bounding box by exhaustive scan.
inline BBox tight_bbox(const BinaryMask& m) {
    int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (m.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
        }
    }
    return BBox{x0, y0, x1, y1};
}

/// Extreme points by collecting all foreground pixels and selecting with the
/// min-secondary tie rule.
inline pointprop::ExtremePoints extremes_scan(const BinaryMask& m) {
    std::vector<pointprop::Pixel> fg;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (m.at(x, y)) {
                fg.push_back({x, y});
            }
        }
    }
    auto pick = [&](auto better) {
        pointprop::Pixel best = fg.front();
        for (const auto& p : fg) {
            if (better(p, best)) {
                best = p;
            }
        }
        return best;
    };
    pointprop::ExtremePoints ep;
    ep.top = pick([](auto a, auto b) { return a.y < b.y || (a.y == b.y && a.x < b.x); });
    ep.left = pick([](auto a, auto b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    ep.bottom = pick([](auto a, auto b) { return a.y > b.y || (a.y == b.y && a.x < b.x); });
    ep.right = pick([](auto a, auto b) { return a.x > b.x || (a.x == b.x && a.y < b.y); });
    return ep;
}

/// T^alpha(i,j) as the sum over all length-alpha node paths of edge products.
inline double path_sum(const Mat& t, int i, int j, int alpha) {
    if (alpha == 1) {
        return t(i, j);
    }
    const int n = static_cast<int>(t.rows());
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        total += t(i, k) * path_sum(t, k, j, alpha - 1);
    }
    return total;
}

inline Mat power_by_paths(const Mat& t, int alpha) {
    const int n = static_cast<int>(t.rows());
    Mat out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(i, j) = path_sum(t, i, j, alpha);
        }
    }
    return out;
}

/// Truncated Neumann series sum_{k=0..K} (1-beta) beta^k T^k.
inline Mat neumann_series(const Mat& t, double beta, int terms) {
    const int n = static_cast<int>(t.rows());
    Mat acc = Mat::Zero(n, n);
    Mat power = Mat::Identity(n, n);
    double coeff = 1.0 - beta;
    for (int k = 0; k <= terms; ++k) {
        acc += coeff * power;
        power = (power * t).eval();
        coeff *= beta;
    }
    return acc;
}

/// The doubly-stochastic scaling of [[1,3],[2,2]] has the form
/// [[a,1-a],[1-a,a]]; eliminating the scalings gives a/(1-a) = (1-a)/(3a).
/// Solve that relation by bisection.
inline double sinkhorn_2x2_oracle() {
    auto f = [](double a) { return a / (1.0 - a) - (1.0 - a) / (3.0 * a); };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo < 1e-13) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

/// Central finite difference of a scalar function of one mask entry.
template <typename F>
double finite_difference(F&& f, ProbMask& p, std::size_t idx, double h = 1e-5) {
    const double saved = p.values[idx];
    p.values[idx] = saved + h;
    const double up = f(p);
    p.values[idx] = saved - h;
    const double down = f(p);
    p.values[idx] = saved;
    return (up - down) / (2.0 * h);
}

/// Number of 4-connected components of a mask, by flood fill.
inline int connected_components(const BinaryMask& m) {
    std::vector<char> seen(m.values.size(), 0);
    int components = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
            if (!m.at(x, y) || seen[idx]) {
                continue;
            }
            ++components;
            stack.push_back({x, y});
            seen[idx] = 1;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                const int dx[4] = {1, -1, 0, 0};
                const int dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    const int nx = cx + dx[d];
                    const int ny = cy + dy[d];
                    if (nx < 0 || nx >= m.width || ny < 0 || ny >= m.height) {
                        continue;
                    }
                    const std::size_t nidx = static_cast<std::size_t>(ny) * m.width + nx;
                    if (m.at(nx, ny) && !seen[nidx]) {
                        seen[nidx] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
        }
    }
    return components;
}

/// Straightforward dense binary mean field: full pairwise sums, synchronous
/// updates, written from the update equations with no shared code.
inline ProbMask dense_meanfield(const ProbMask& m, const Image& img, int iterations,
                                double w_spatial, double w_bilateral, double theta_gamma,
                                double theta_alpha, double theta_beta, double compat) {
    const int w = m.width;
    const int h = m.height;
    const std::size_t n = m.values.size();
    std::vector<double> uf(n), ub(n), qf(n), qb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pf = std::clamp(m.values[i], 1e-6, 1.0 - 1e-6);
        const double pb = std::clamp(1.0 - m.values[i], 1e-6, 1.0 - 1e-6);
        uf[i] = -std::log(pf);
        ub[i] = -std::log(pb);
        qf[i] = pf / (pf + pb);
        qb[i] = pb / (pf + pb);
    }
    std::vector<double> nf(n), nb(n);
    for (int it = 0; it < iterations; ++it) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                double mf = 0.0, mb = 0.0;
                for (int yy = 0; yy < h; ++yy) {
                    for (int xx = 0; xx < w; ++xx) {
                        if (xx == x && yy == y) {
                            continue;
                        }
                        const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
                        const double d2 = double(xx - x) * (xx - x) + double(yy - y) * (yy - y);
                        double color2 = 0.0;
                        for (int c = 0; c < img.channels; ++c) {
                            const double dc =
                                double(img.values[i * img.channels + c]) -
                                double(img.values[j * img.channels + c]);
                            color2 += dc * dc;
                        }
                        double k = w_spatial * std::exp(-d2 / (2.0 * theta_gamma * theta_gamma));
                        if (w_bilateral > 0.0) {
                            k += w_bilateral *
                                 std::exp(-d2 / (2.0 * theta_alpha * theta_alpha) -
                                          color2 / (2.0 * theta_beta * theta_beta));
                        }
                        mf += k * qf[j];
                        mb += k * qb[j];
                    }
                }
                const double ef = uf[i] + compat * mb;
                const double eb = ub[i] + compat * mf;
                const double shift = std::min(ef, eb);
                const double zf = std::exp(-(ef - shift));
                const double zb = std::exp(-(eb - shift));
                nf[i] = zf / (zf + zb);
                nb[i] = zb / (zf + zb);
            }
        }
        qf.swap(nf);
        qb.swap(nb);
    }
    ProbMask out(w, h);
    out.values = qf;
    return out;
}

} // namespace oracles
