#include "emoperf/stats/outliers.hpp"

#include "emoperf/error.hpp"
#include "emoperf/stats/design.hpp"
#include "emoperf/stats/mcd.hpp"
#include "emoperf/stats/ols.hpp"

#include <set>

namespace emoperf::stats {

OutlierSplit outlier_split(const Dataset& dataset) {
    const auto clips = dataset.usable_clips({});
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ClipRecord*>> by_piece;
    for (const ClipRecord* c : clips) {
        auto [it, inserted] = by_piece.try_emplace(c->piece_id);
        if (inserted) order.push_back(c->piece_id);
        it->second.push_back(c);
    }
    OutlierSplit split;
    std::set<std::string> outliers;
    for (const auto& piece : order) {
        const auto& members = by_piece[piece];
        std::vector<Eigen::Vector2d> points;
        for (const ClipRecord* c : members) {
            const EmotionTarget* t = dataset.target(c->clip_id);
            points.emplace_back(t->arousal_z, t->valence_z);
        }
        std::size_t pick = 0;
        try {
            pick = mcd_outlier(points).outlier;
        } catch (const Error& e) {
            throw InputError("outlier detection for piece '" + piece + "': " + e.what());
        }
        const ClipRecord* o = members[pick];
        split.outlier_of_piece[piece] = o->clip_id;
        ++split.pianist_counts[o->pianist_id];
        outliers.insert(o->clip_id);
    }
    for (const ClipRecord* c : clips) {
        (outliers.contains(c->clip_id) ? split.test : split.train).push_back(c->clip_id);
    }
    return split;
}

OutlierReport outlier_experiment(const Dataset& dataset, FeatureSet set, const OutlierSplit& split) {
    OutlierReport report;
    report.set = set;
    for (Target target : kAllTargets) {
        const Design design = make_design(dataset, set, target);
        std::map<std::string, std::size_t> row_of;
        for (std::size_t i = 0; i < design.clip_ids.size(); ++i) row_of.emplace(design.clip_ids[i], i);
        std::vector<std::size_t> train, test;
        for (const auto& id : split.train) {
            if (auto it = row_of.find(id); it != row_of.end()) train.push_back(it->second);
        }
        for (const auto& id : split.test) {
            if (auto it = row_of.find(id); it != row_of.end()) test.push_back(it->second);
        }
        const Design tr = design.subset(train);
        const Design te = design.subset(test);
        const LinearModel model = LinearModel::fit(tr.X, tr.y, tr.names);
        const Metrics m = regression_metrics(te.y, model.predict(te.X), design.predictors());
        (target == Target::arousal ? report.arousal : report.valence) = m;
        report.n_train = tr.rows();
        report.n_test = te.rows();
    }
    return report;
}

OutlierReport outlier_experiment(const Dataset& dataset, FeatureSet set) {
    return outlier_experiment(dataset, set, outlier_split(dataset));
}

}  // namespace emoperf::stats
