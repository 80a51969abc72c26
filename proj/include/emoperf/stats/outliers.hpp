#pragma once

#include "emoperf/corpus.hpp"
#include "emoperf/stats/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace emoperf::stats {

struct OutlierSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
    /// piece_id -> outlier clip_id
    std::map<std::string, std::string> outlier_of_piece;
    std::map<std::string, std::size_t> pianist_counts;
};

/// One outlier per piece from the rated (arousal_z, valence_z) pairs.
OutlierSplit outlier_split(const Dataset& dataset);

struct OutlierReport {
    FeatureSet set = FeatureSet::lowlevel;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    Metrics arousal;
    Metrics valence;
};

/// Train on the inliers, score adjusted R^2 on the outliers, per target.
OutlierReport outlier_experiment(const Dataset& dataset, FeatureSet set, const OutlierSplit& split);
OutlierReport outlier_experiment(const Dataset& dataset, FeatureSet set);

}  // namespace emoperf::stats
