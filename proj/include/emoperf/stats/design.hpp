#pragma once

#include "emoperf/corpus.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace emoperf::stats {

/// Rows are the dataset's usable clips in manifest order.
struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    std::vector<std::string> clip_ids;
    std::vector<std::string> piece_ids;
    std::vector<std::string> pianist_ids;

    std::size_t rows() const { return clip_ids.size(); }
    std::size_t predictors() const { return names.size(); }
    Design subset(std::span<const std::size_t> rows) const;
};

/// Concatenates the listed feature sets; the response is the standardized target.
Design make_design(const Dataset& dataset, std::span<const FeatureSet> sets, Target target);
Design make_design(const Dataset& dataset, FeatureSet set, Target target);

/// Column z-scoring with statistics from the data it was fitted on.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    /// Throws NumericalError naming any constant column.
    static Standardizer fit(const Eigen::MatrixXd& X, std::span<const std::string> names = {});
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

}  // namespace emoperf::stats
