#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace emoperf::stats {

struct Metrics {
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double rmse = 0.0;
    /// NaN when the predictions are constant.
    double corr = 0.0;
    std::size_t n = 0;
    std::size_t p = 0;
};

/// 1 - (1 - R^2)(n - 1)/(n - p - 1).
double adjusted_r2(double r2, std::size_t n, std::size_t p);

/// Requires n > p + 1 and a non-constant y_true.
Metrics regression_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, std::size_t p);

/// NaN when either input is constant.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Two-sided p-value of a Student t statistic.
double t_pvalue(double t, double dof);

/// Two-sided p-value of a Pearson correlation over n pairs (t-test with n - 2 dof). Requires n >= 3.
double corr_pvalue(double r, std::size_t n);

}  // namespace emoperf::stats
