#include "emoperf/embedding.hpp"

#include "emoperf/csv.hpp"
#include "emoperf/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace emoperf::embedding {

namespace {

std::string normalise_name(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == ' ' || c == '-') {
            out.push_back('_');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim) {
    const csv::Table table = csv::read(path);
    if (table.header.empty() || table.header.front() != "clip_id") {
        throw InputError(path.string() + ": first column must be clip_id");
    }
    const std::size_t dim = table.header.size() - 1;
    if (dim != expected_dim) {
        throw InputError(path.string() + ": expected " + std::to_string(expected_dim) + " value columns, header has " +
                         std::to_string(dim));
    }
    EmbeddingTable out;
    for (std::size_t c = 1; c < table.header.size(); ++c) out.names.push_back(table.header[c]);
    if (expected_dim == kMidLevelNames.size()) {
        for (std::size_t i = 0; i < dim; ++i) {
            if (normalise_name(out.names[i]) != kMidLevelNames[i]) {
                throw InputError(path.string() + ": mid-level column " + std::to_string(i + 1) + " must be '" +
                                 std::string(kMidLevelNames[i]) + "', found '" + out.names[i] + "'");
            }
            out.names[i] = std::string(kMidLevelNames[i]);
        }
    }

    out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(dim));
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + ": clip '" + row[0] + "' (row " + std::to_string(table.line_numbers[r]) + ")";
        if (!seen.insert(row[0]).second) throw InputError(where + ": duplicate clip");
        for (std::size_t c = 0; c < dim; ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = csv::parse_real(row[c + 1], where);
        }
        out.clip_ids.push_back(row[0]);
    }
    return out;
}

FeatureTable midlevel_features(const EmbeddingTable& table) {
    FeatureTable out;
    out.set = FeatureSet::midlevel;
    out.names = table.names;
    out.clip_ids = table.clip_ids;
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        const Eigen::VectorXd row = table.values.row(r).transpose();
        out.rows.emplace_back(row.data(), row.data() + row.size());
    }
    return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& data, double variance_target) {
    if (data.rows() < 2) throw InputError("PCA needs at least two rows");
    if (!(variance_target > 0.0 && variance_target <= 1.0)) throw InputError("variance target must lie in (0, 1]");
    PcaModel model;
    model.mean = data.colwise().mean().transpose();
    const Eigen::MatrixXd centred = data.rowwise() - model.mean.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double dof = static_cast<double>(data.rows() - 1);
    const Eigen::VectorXd variance = sv.array().square() / dof;
    model.total_variance = variance.sum();
    if (!(model.total_variance > 0.0)) throw NumericalError("PCA input has zero total variance");

    const Eigen::Index max_k = variance.size();
    Eigen::VectorXd cumulative(max_k);
    double running = 0.0;
    for (Eigen::Index i = 0; i < max_k; ++i) {
        running += variance(i);
        cumulative(i) = running / model.total_variance;
    }
    // A relative slack of 1e-12 lets a target of 1.0 stop at the numerical rank.
    Eigen::Index k = max_k;
    for (Eigen::Index i = 0; i < max_k; ++i) {
        if (cumulative(i) >= variance_target - 1e-12) {
            k = i + 1;
            break;
        }
    }
    model.k = static_cast<std::size_t>(k);
    model.explained_variance = variance.head(k);
    model.explained_variance_ratio_cumulative = cumulative.head(k);
    model.components = svd.matrixV().leftCols(k).transpose();
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index arg = 0;
        model.components.row(i).cwiseAbs().maxCoeff(&arg);
        if (model.components(i, arg) < 0.0) model.components.row(i) *= -1.0;
    }
    return model;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& vector) {
    if (vector.size() != model.mean.size()) {
        throw InputError("PCA transform: expected dimension " + std::to_string(model.mean.size()) + ", got " +
                         std::to_string(vector.size()));
    }
    return model.components * (vector - model.mean);
}

Eigen::VectorXd pca_inverse(const PcaModel& model, const Eigen::VectorXd& scores) {
    if (scores.size() != static_cast<Eigen::Index>(model.k)) throw InputError("PCA inverse: wrong score count");
    return model.mean + model.components.transpose() * scores;
}

std::vector<std::string> pca_names(std::size_t k) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= k; ++i) names.push_back("pca_" + std::to_string(i));
    return names;
}

FeatureTable deam_pca_features(const EmbeddingTable& table, double variance_target, PcaModel* model_out) {
    PcaModel model = pca_fit(table.values, variance_target);
    FeatureTable out;
    out.set = FeatureSet::deam_pca;
    out.names = pca_names(model.k);
    out.clip_ids = table.clip_ids;
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        const Eigen::VectorXd scores = pca_transform(model, table.values.row(r).transpose());
        out.rows.emplace_back(scores.data(), scores.data() + scores.size());
    }
    if (model_out) *model_out = std::move(model);
    return out;
}

}  // namespace emoperf::embedding
