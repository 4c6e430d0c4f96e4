#include "pointprop/transition.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/LU>

namespace pointprop {

namespace {

void mirror_upper(Mat& m) {
    // Copy the upper triangle onto the lower one; keeps mathematically
    // symmetric results exactly symmetric in floating point.
    const Eigen::Index n = m.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            m(j, i) = m(i, j);
        }
    }
}

} // namespace

SimilarityMatrix SimilarityMatrix::from(Mat values) {
    if (values.rows() == 0 || values.rows() != values.cols()) {
        throw BadDimensions("SimilarityMatrix: must be square and nonempty");
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        bool positive = false;
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double v = values(i, j);
            if (v < 0.0 || !std::isfinite(v)) {
                throw NegativeEntry("SimilarityMatrix: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") is negative or non-finite");
            }
            positive = positive || v > 0.0;
        }
        if (!positive) {
            throw InvalidArgument("SimilarityMatrix: row " + std::to_string(i) +
                                  " has no positive entry");
        }
    }
    return SimilarityMatrix{std::move(values)};
}

SimilarityMatrix average_heads(const std::vector<SimilarityMatrix>& heads) {
    if (heads.empty()) {
        throw EmptyInput("average_heads: no matrices given");
    }
    const Eigen::Index n = heads.front().values.rows();
    Mat mean = Mat::Zero(n, n);
    for (const SimilarityMatrix& h : heads) {
        if (h.values.rows() != n || h.values.cols() != n) {
            throw SizeMismatch("average_heads: head sizes differ");
        }
        mean += h.values;
    }
    mean /= static_cast<double>(heads.size());
    return SimilarityMatrix{std::move(mean)};
}

double stochastic_deviation(const Mat& m) {
    const Vec row = m.rowwise().sum();
    const Vec col = m.colwise().sum().transpose();
    const double row_dev = (row.array() - 1.0).abs().maxCoeff();
    const double col_dev = (col.array() - 1.0).abs().maxCoeff();
    return std::max(row_dev, col_dev);
}

Mat sinkhorn(const SimilarityMatrix& s, const SinkhornConfig& cfg) {
    if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1) {
        throw InvalidArgument("sinkhorn: bad config");
    }
    Mat a = s.values;
    const Eigen::Index n = a.rows();
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (stochastic_deviation(a) <= cfg.tolerance) {
            return a;
        }
        Vec row = a.rowwise().sum();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (row(i) <= 0.0) {
                throw NoConvergence("sinkhorn: row " + std::to_string(i) + " summed to zero");
            }
            a.row(i) /= row(i);
        }
        Vec col = a.colwise().sum().transpose();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (col(j) <= 0.0) {
                throw NoConvergence("sinkhorn: column " + std::to_string(j) + " summed to zero");
            }
            a.col(j) /= col(j);
        }
    }
    if (stochastic_deviation(a) <= cfg.tolerance) {
        return a;
    }
    char tol[32];
    std::snprintf(tol, sizeof(tol), "%g", cfg.tolerance);
    throw NoConvergence("sinkhorn: did not reach tolerance " + std::string(tol) + " in " +
                        std::to_string(cfg.max_iterations) + " iterations");
}

TransitionMatrix symmetrize(const Mat& a) {
    if (a.rows() != a.cols()) {
        throw BadDimensions("symmetrize: matrix must be square");
    }
    const Eigen::Index n = a.rows();
    Mat t(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i, i) = a(i, i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            t(i, j) = v;
            t(j, i) = v;
        }
    }
    return TransitionMatrix{std::move(t)};
}

TransitionMatrix propagate_power(const TransitionMatrix& t, int alpha) {
    if (alpha < 1) {
        throw InvalidArgument("propagate_power: alpha must be >= 1");
    }
    Mat result = t.values;
    for (int k = 1; k < alpha; ++k) {
        Mat next = result * t.values;
        mirror_upper(next);
        result = std::move(next);
    }
    return TransitionMatrix{std::move(result)};
}

TransitionMatrix propagate_absorbing(const TransitionMatrix& t, double beta) {
    if (beta < 0.0 || beta >= 1.0) {
        throw InvalidArgument("propagate_absorbing: beta must be in [0, 1)");
    }
    const Eigen::Index n = t.values.rows();
    const Mat system = Mat::Identity(n, n) - beta * t.values;
    Eigen::PartialPivLU<Mat> lu(system);
    // (I - beta T) is strictly diagonally dominant for beta < 1; a vanishing
    // pivot can only mean a broken input, so report it rather than divide.
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot < 1e-300 || !std::isfinite(min_pivot)) {
        throw SingularSystem("propagate_absorbing: singular system");
    }
    Mat rhs = Mat::Identity(n, n) * (1.0 - beta);
    Mat result = lu.solve(rhs);
    mirror_upper(result);
    // Entries are sums of nonnegative path products; roundoff can push exact
    // zeros a hair below zero, which the nonnegative-matrix contract (and the
    // on-disk format) would reject.
    for (Eigen::Index i = 0; i < result.size(); ++i) {
        double& v = result.data()[i];
        if (v < 0.0) {
            if (v < -1e-12) {
                throw SingularSystem("propagate_absorbing: negative entry beyond roundoff");
            }
            v = 0.0;
        }
    }
    return TransitionMatrix{std::move(result)};
}

} // namespace pointprop
