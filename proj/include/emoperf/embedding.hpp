#pragma once

#include "emoperf/corpus.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emoperf::embedding {

/// Mid-level perceptual feature names, in table order.
inline constexpr std::array<std::string_view, 7> kMidLevelNames = {
    "melodiousness",  "articulation",    "rhythmic_stability", "rhythmic_complexity",
    "dissonance",     "tonal_stability", "minorness",
};
inline constexpr std::size_t kDeamEmbeddingDim = 512;

/// Rows in file order.
struct EmbeddingTable {
    std::vector<std::string> names;
    std::vector<std::string> clip_ids;
    Eigen::MatrixXd values;  // clips x dim
};

/// Reads clip_id + `expected_dim` numeric columns. When `expected_dim` is 7 the header must carry the
/// mid-level names (case and spaces are normalised, so "Rhythmic Stability" is accepted).
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim);

FeatureTable midlevel_features(const EmbeddingTable& table);

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // k x dim, orthonormal rows
    Eigen::VectorXd explained_variance;
    Eigen::VectorXd explained_variance_ratio_cumulative;
    double total_variance = 0.0;
    std::size_t k = 0;
};

inline constexpr double kDefaultVarianceTarget = 0.98;

/// Centre-only PCA through the SVD of the centred data. k is the smallest count reaching
/// `variance_target`; each component's largest-magnitude entry is made positive.
PcaModel pca_fit(const Eigen::MatrixXd& data, double variance_target = kDefaultVarianceTarget);

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& vector);
Eigen::VectorXd pca_inverse(const PcaModel& model, const Eigen::VectorXd& scores);

/// "pca_1".."pca_k".
std::vector<std::string> pca_names(std::size_t k);

/// Fits on the table itself and projects every row (feature_set deam_pca).
FeatureTable deam_pca_features(const EmbeddingTable& table, double variance_target = kDefaultVarianceTarget,
                               PcaModel* model_out = nullptr);

}  // namespace emoperf::embedding
