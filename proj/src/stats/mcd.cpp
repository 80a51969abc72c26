#include "emoperf/stats/mcd.hpp"

#include "emoperf/error.hpp"

#include <cmath>
#include <limits>

namespace emoperf::stats {

std::size_t mcd_subset_size(std::size_t n) { return (n + 3) / 2 + 1; }

namespace {

struct Moments {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
};

Moments moments(std::span<const Eigen::Vector2d> points, const std::vector<std::size_t>& subset) {
    Moments m;
    m.mean.setZero();
    for (std::size_t i : subset) m.mean += points[i];
    m.mean /= static_cast<double>(subset.size());
    m.cov.setZero();
    for (std::size_t i : subset) {
        const Eigen::Vector2d d = points[i] - m.mean;
        m.cov += d * d.transpose();
    }
    m.cov /= static_cast<double>(subset.size() - 1);
    return m;
}

}  // namespace

McdResult mcd_outlier(std::span<const Eigen::Vector2d> points) {
    const std::size_t n = points.size();
    if (n < kMcdMinPoints || n > kMcdMaxPoints) {
        throw InputError("MCD needs between 5 and 12 points, got " + std::to_string(n));
    }
    bool distinct = false;
    for (std::size_t i = 1; i < n; ++i) distinct = distinct || points[i] != points[0];
    if (!distinct) throw NumericalError("MCD: all points coincide, covariance is degenerate");

    const std::size_t h = mcd_subset_size(n);
    std::vector<std::size_t> subset(h);
    for (std::size_t i = 0; i < h; ++i) subset[i] = i;

    McdResult out;
    double best_det = std::numeric_limits<double>::infinity();
    while (true) {
        const Moments m = moments(points, subset);
        const double det = m.cov.determinant();
        if (det < best_det) {
            best_det = det;
            out.support = subset;
            out.location = m.mean;
            out.covariance = m.cov;
        }
        // Next combination in lexicographic order.
        std::size_t i = h;
        while (i > 0 && subset[i - 1] == n - h + i - 1) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t j = i; j < h; ++j) subset[j] = subset[j - 1] + 1;
    }

    out.covariance += kMcdRegularization * Eigen::Matrix2d::Identity();
    const Eigen::LDLT<Eigen::Matrix2d> ldlt(out.covariance);
    if (ldlt.info() != Eigen::Success || !(out.covariance.determinant() > 0.0)) {
        throw NumericalError("MCD: covariance is singular after regularization");
    }
    double farthest = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d d = points[i] - out.location;
        const double dist = std::sqrt(d.dot(ldlt.solve(d)));
        out.mahalanobis.push_back(dist);
        if (dist > farthest) {
            farthest = dist;
            out.outlier = i;
        }
    }
    return out;
}

}  // namespace emoperf::stats
