#pragma once

#include "emoperf/stats/design.hpp"
#include "emoperf/stats/folds.hpp"
#include "emoperf/stats/metrics.hpp"

#include <vector>

namespace emoperf::stats {

struct FoldResult {
    std::string label;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    /// NaN when the test fold is too small (n <= p + 1) or its targets are constant.
    double adj_r2 = 0.0;
    double rmse = 0.0;
};

struct CvResult {
    FoldKind kind = FoldKind::custom;
    /// Metrics over the pooled out-of-fold predictions.
    Metrics pooled;
    /// Mean of the per-fold adjusted R^2 over folds where it is defined (NaN if none).
    double mean_fold_adj_r2 = 0.0;
    std::size_t folds_with_adj_r2 = 0;
    std::vector<FoldResult> folds;
    Eigen::VectorXd predictions;
};

/// Train-fold z-scoring, OLS per fold. Clips of the scheme absent from the design are skipped.
CvResult cross_validate(const Design& design, const FoldScheme& scheme);
CvResult cross_validate(const Dataset& dataset, FeatureSet set, Target target, const FoldScheme& scheme);

}  // namespace emoperf::stats
