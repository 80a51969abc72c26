#include "emoperf/stats/design.hpp"

#include "emoperf/error.hpp"

#include <cmath>

namespace emoperf::stats {

Design Design::subset(std::span<const std::size_t> rows) const {
    Design out;
    out.names = names;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
        out.y(static_cast<Eigen::Index>(i)) = y(r);
        out.clip_ids.push_back(clip_ids[rows[i]]);
        out.piece_ids.push_back(piece_ids[rows[i]]);
        out.pianist_ids.push_back(pianist_ids[rows[i]]);
    }
    return out;
}

Design make_design(const Dataset& dataset, std::span<const FeatureSet> sets, Target target) {
    Design d;
    for (FeatureSet s : sets) {
        const auto& names = dataset.feature_names(s);
        d.names.insert(d.names.end(), names.begin(), names.end());
    }
    const auto clips = dataset.usable_clips(sets);
    d.X.resize(static_cast<Eigen::Index>(clips.size()), static_cast<Eigen::Index>(d.names.size()));
    d.y.resize(static_cast<Eigen::Index>(clips.size()));
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        Eigen::Index c = 0;
        for (FeatureSet s : sets) {
            for (double v : dataset.features(clips[i]->clip_id, s)->values) d.X(r, c++) = v;
        }
        d.y(r) = dataset.target(clips[i]->clip_id)->standardized(target);
        d.clip_ids.push_back(clips[i]->clip_id);
        d.piece_ids.push_back(clips[i]->piece_id);
        d.pianist_ids.push_back(clips[i]->pianist_id);
    }
    return d;
}

Design make_design(const Dataset& dataset, FeatureSet set, Target target) {
    const FeatureSet sets[] = {set};
    return make_design(dataset, sets, target);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X, std::span<const std::string> names) {
    Standardizer s;
    const double n = static_cast<double>(X.rows());
    if (X.rows() == 0) throw NumericalError("cannot standardize an empty design");
    s.mean = X.colwise().mean();
    s.scale.resize(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double var = (X.col(c).array() - s.mean(c)).square().sum() / n;
        const double sd = std::sqrt(var);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(s.mean(c))))) {
            const std::string name = static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)]
                                                                                : "column " + std::to_string(c + 1);
            throw NumericalError("rank-deficient design: predictor '" + name + "' is constant");
        }
        s.scale(c) = sd;
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean).array().rowwise() / scale.array();
}

}  // namespace emoperf::stats
