#pragma once

#include <cstdint>
#include <vector>

#include "pointprop/errors.hpp"

namespace pointprop {

// All grids are row-major with origin at the top-left corner; x grows to the
// right, y grows downward. Coordinates address pixel centers.

/// Binary {0,1} grid.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { values[static_cast<std::size_t>(y) * width + x] = v; }

    std::size_t count() const;

    bool operator==(const BinaryMask& other) const = default;
};

/// Probability grid with values in [0,1].
struct ProbMask {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ProbMask() = default;
    ProbMask(int w, int h, double fill = 0.0);

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, double v) { values[static_cast<std::size_t>(y) * width + x] = v; }

    double sum() const;

    bool operator==(const ProbMask& other) const = default;
};

/// Interleaved 8-bit image with 1 or 3 channels; the appearance signal a CRF
/// refinement conditions on.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> values;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y, int c) const {
        return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    void set(int x, int y, int c, std::uint8_t v) {
        values[(static_cast<std::size_t>(y) * width + x) * channels + c] = v;
    }

    bool operator==(const Image& other) const = default;
};

/// View a binary mask as probabilities (0.0 / 1.0).
ProbMask to_prob(const BinaryMask& m);

/// Threshold a probability mask at `threshold` (>= maps to 1).
BinaryMask threshold_mask(const ProbMask& m, double threshold);

inline void require_same_size(const ProbMask& a, const ProbMask& b, const char* what) {
    if (a.width != b.width || a.height != b.height) {
        throw SizeMismatch(std::string(what) + ": grid dimensions differ");
    }
}

} // namespace pointprop
