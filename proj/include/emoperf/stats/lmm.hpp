#pragma once

#include "emoperf/stats/design.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace emoperf::stats {

/// Random-intercept linear mixed model, maximum likelihood.
struct MixedModelReport {
    enum class Boundary { interior, lower, upper };

    /// Intercept first.
    Eigen::VectorXd fixed_coefficients;
    double var_random = 0.0;
    double var_residual = 0.0;
    double e_random = 0.0;
    double log_likelihood = 0.0;
    /// var_random / var_residual at the optimum.
    double ratio = 0.0;
    Boundary boundary = Boundary::interior;
    std::size_t groups = 0;
};

inline constexpr double kLogRatioMin = -12.0;
inline constexpr double kLogRatioMax = 12.0;
inline constexpr double kLogRatioTolerance = 1e-6;

/// Profiled maximum likelihood at a fixed ratio var_random / var_residual; ratio 0 is OLS.
MixedModelReport lmm_fit_at_ratio(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  std::span<const std::string> groups, double ratio);

/// Golden-section search over log ratio in [-12, 12]; var_random = 0 is taken when it scores at least as well.
MixedModelReport lmm_random_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      std::span<const std::string> groups);

/// z-scores the design's predictors, groups by piece.
MixedModelReport lmm_random_intercept(const Design& design);

}  // namespace emoperf::stats
