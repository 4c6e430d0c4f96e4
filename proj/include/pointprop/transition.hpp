#pragma once

#include "pointprop/errors.hpp"
#include "pointprop/linalg.hpp"

#include <vector>

namespace pointprop {

/// Stopping rule for the alternating row/column normalization.
struct SinkhornConfig {
    double tolerance = 1e-8;
    int max_iterations = 200;
};

/// Nonnegative affinity matrix over patch-grid nodes; every row must contain
/// at least one strictly positive entry.
struct SimilarityMatrix {
    Mat values;

    int n() const { return static_cast<int>(values.rows()); }

    /// Validating constructor for programmatic inputs.
    static SimilarityMatrix from(Mat values);
};

/// Symmetric doubly-stochastic transition matrix. Symmetry is exact by
/// construction; row/column sums hold to within kStochasticEps.
struct TransitionMatrix {
    Mat values;

    int n() const { return static_cast<int>(values.rows()); }

    static constexpr double kStochasticEps = 1e-6;
};

/// Entrywise mean of same-sized similarity matrices (one per attention head).
SimilarityMatrix average_heads(const std::vector<SimilarityMatrix>& heads);

/// Doubly-stochastic scaling A = D_r S D_c by alternating row-then-column
/// normalization. Zero entries are preserved exactly. Throws NoConvergence
/// when the iteration budget runs out (zero pattern without support, or a
/// tolerance the input cannot meet).
Mat sinkhorn(const SimilarityMatrix& s, const SinkhornConfig& cfg = {});

/// T = (A + A^T) / 2 for doubly-stochastic A; closed under this average.
TransitionMatrix symmetrize(const Mat& a);

/// T^alpha by repeated multiplication, alpha >= 1.
TransitionMatrix propagate_power(const TransitionMatrix& t, int alpha);

/// Converged random walk blended with the initial distribution:
/// (1 - beta) * (I - beta T)^-1, solved column-wise with partial pivoting.
TransitionMatrix propagate_absorbing(const TransitionMatrix& t, double beta);

/// Max deviation of any row or column sum from 1.
double stochastic_deviation(const Mat& m);

inline bool is_doubly_stochastic(const Mat& m, double eps) {
    return stochastic_deviation(m) <= eps;
}

} // namespace pointprop
