#pragma once

#include "emoperf/corpus.hpp"
#include "emoperf/stats/design.hpp"

#include <Eigen/Dense>

#include <array>
#include <string_view>
#include <vector>

namespace emoperf::stats {

/// Clockwise from upper right in (valence, arousal) space.
enum class Quadrant { happy = 0, relaxed = 1, sad = 2, angry = 3 };

std::string_view to_string(Quadrant q);

/// Zero counts as the non-negative side on both axes.
Quadrant quadrantize(double arousal_z, double valence_z);

inline constexpr double kSoftmaxRidge = 1e-4;
inline constexpr double kSoftmaxGradientTolerance = 1e-8;
inline constexpr int kSoftmaxMaxIterations = 500;
inline constexpr double kChanceAccuracy = 0.25;

/// Multinomial logistic regression on z-scored features with class-balanced row weights, ridge on every
/// weight, damped Newton.
class SoftmaxClassifier {
public:
    static SoftmaxClassifier fit(const Eigen::MatrixXd& X, std::span<const int> labels, double ridge = kSoftmaxRidge,
                                 const SoftmaxClassifier* warm_start = nullptr);

    int predict(const Eigen::RowVectorXd& x) const;
    const std::vector<int>& classes() const { return classes_; }
    int iterations() const { return iterations_; }
    double gradient_norm() const { return gradient_norm_; }

private:
    Standardizer scaler_;
    std::vector<int> classes_;
    Eigen::MatrixXd weights_;  // (p + 1) x classes, intercept row first
    int iterations_ = 0;
    double gradient_norm_ = 0.0;
};

struct ClassificationReport {
    double loo_accuracy = 0.0;
    double baseline = kChanceAccuracy;
    std::size_t n = 0;
    std::array<std::size_t, 4> class_counts{};
};

/// Leave-one-out accuracy. Throws InputError with fewer than two classes.
ClassificationReport loo_accuracy(const Eigen::MatrixXd& X, std::span<const int> labels);
ClassificationReport classify_quadrants(const Dataset& dataset, FeatureSet set);

}  // namespace emoperf::stats
