#include "pointprop/mask.hpp"

#include <numeric>

namespace pointprop {

BinaryMask::BinaryMask(int w, int h, std::uint8_t fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) {
        throw BadDimensions("BinaryMask: dimensions must be positive");
    }
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : values) {
        n += (v != 0);
    }
    return n;
}

ProbMask::ProbMask(int w, int h, double fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) {
        throw BadDimensions("ProbMask: dimensions must be positive");
    }
}

double ProbMask::sum() const {
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    return s;
}

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c), values(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3)) {
        throw BadDimensions("Image: bad dimensions or channel count");
    }
}

ProbMask to_prob(const BinaryMask& m) {
    ProbMask p(m.width, m.height);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        p.values[i] = m.values[i] ? 1.0 : 0.0;
    }
    return p;
}

BinaryMask threshold_mask(const ProbMask& m, double threshold) {
    BinaryMask b(m.width, m.height);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        b.values[i] = m.values[i] >= threshold ? 1 : 0;
    }
    return b;
}

} // namespace pointprop
