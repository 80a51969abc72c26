#pragma once

#include "emoperf/stats/design.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace emoperf::stats {

/// Least-squares fit with intercept. Index 0 of coefficients / standard_errors is the intercept.
struct OlsModel {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd residuals;
    std::size_t n = 0;
    std::size_t p = 0;
    double rss = 0.0;
    double sigma2 = 0.0;

    double dof() const { return static_cast<double>(n - p - 1); }
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    /// coefficient / standard error, intercept included.
    Eigen::VectorXd t_statistics() const;
};

/// Column-pivoted QR on [1 X]. Requires n > p + 1. A rank-deficient design throws NumericalError
/// naming the columns the pivoting could not place.
OlsModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::string> names = {});

/// OLS on z-scored predictors; predictions apply the same scaling.
struct LinearModel {
    Standardizer scaler;
    OlsModel ols;

    static LinearModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::string> names = {});
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct Importance {
    std::string name;
    double t = 0.0;
    double abs_t = 0.0;
    double p_value = 1.0;
};

/// Slopes only, ranked by |t| descending (stable on ties).
std::vector<Importance> t_importance(const OlsModel& model, std::span<const std::string> names);
std::vector<Importance> significant(std::span<const Importance> ranked, double alpha = 0.05);

}  // namespace emoperf::stats
