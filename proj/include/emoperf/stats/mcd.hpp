#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace emoperf::stats {

struct McdResult {
    std::size_t outlier = 0;
    /// Indices of the minimum-determinant subset, ascending.
    std::vector<std::size_t> support;
    Eigen::Vector2d location;
    /// Sample covariance of the support plus 1e-9 I.
    Eigen::Matrix2d covariance;
    std::vector<double> mahalanobis;
};

inline constexpr std::size_t kMcdMinPoints = 5;
inline constexpr std::size_t kMcdMaxPoints = 12;
inline constexpr double kMcdRegularization = 1e-9;

/// floor((n + 3) / 2) + 1.
std::size_t mcd_subset_size(std::size_t n);

/// Exact minimum covariance determinant over all subsets of mcd_subset_size(n) points; the outlier
/// is the point farthest from the robust fit in Mahalanobis distance. Ties go to the lowest index
/// (subsets compare lexicographically). Throws when all points coincide.
McdResult mcd_outlier(std::span<const Eigen::Vector2d> points);

}  // namespace emoperf::stats
