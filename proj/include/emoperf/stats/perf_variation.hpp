#pragma once

#include "emoperf/corpus.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emoperf::stats {

struct PieceVariation {
    std::string piece_id;
    std::size_t n = 0;
    double fvu = 0.0;
    std::optional<double> corr;
    std::optional<double> p_value;
    bool significant = false;
};

struct PerfVariationReport {
    double fvu_mean = 0.0;
    /// Mean over pieces with a defined correlation.
    double corr_mean = 0.0;
    double fraction_significant = 0.0;
    double alpha = 0.1;
    std::vector<PieceVariation> pieces;
    std::vector<std::string> excluded;
    std::vector<std::string> warnings;
};

inline constexpr double kPerfVariationAlpha = 0.1;

/// Per-piece FVU (about the piece's own mean) and correlation of given predictions.
/// Pieces with constant targets or fewer than 3 performances are excluded.
PerfVariationReport performance_variation(std::span<const std::string> pieces, const Eigen::VectorXd& y_true,
                                          const Eigen::VectorXd& y_pred, double alpha = kPerfVariationAlpha);

/// Leave-one-piece-out predictions, then performance_variation.
PerfVariationReport performance_variation_eval(const Dataset& dataset, FeatureSet set, Target target,
                                               double alpha = kPerfVariationAlpha);

}  // namespace emoperf::stats
