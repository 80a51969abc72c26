#include "emoperf/stats/perf_variation.hpp"

#include "emoperf/error.hpp"
#include "emoperf/stats/design.hpp"
#include "emoperf/stats/folds.hpp"
#include "emoperf/stats/metrics.hpp"
#include "emoperf/stats/ols.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace emoperf::stats {

PerfVariationReport performance_variation(std::span<const std::string> pieces, const Eigen::VectorXd& y_true,
                                          const Eigen::VectorXd& y_pred, double alpha) {
    if (pieces.size() != static_cast<std::size_t>(y_true.size()) || y_true.size() != y_pred.size()) {
        throw InputError("performance variation: pieces, targets and predictions differ in length");
    }
    std::vector<std::string> order;
    std::map<std::string, std::vector<Eigen::Index>> rows;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        auto [it, inserted] = rows.try_emplace(pieces[i]);
        if (inserted) order.push_back(pieces[i]);
        it->second.push_back(static_cast<Eigen::Index>(i));
    }

    PerfVariationReport report;
    report.alpha = alpha;
    double fvu_sum = 0.0, corr_sum = 0.0;
    std::size_t corr_count = 0, significant = 0;
    for (const auto& piece : order) {
        const auto& idx = rows[piece];
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::VectorXd t(m), p(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            t(i) = y_true(idx[static_cast<std::size_t>(i)]);
            p(i) = y_pred(idx[static_cast<std::size_t>(i)]);
        }
        if (m < 3) {
            report.excluded.push_back(piece);
            report.warnings.push_back("piece '" + piece + "' has fewer than 3 performances; excluded");
            continue;
        }
        const double tss = (t.array() - t.mean()).square().sum();
        if (!(tss > 1e-12 * static_cast<double>(m))) {
            report.excluded.push_back(piece);
            report.warnings.push_back("piece '" + piece + "' has constant targets; FVU undefined, excluded");
            continue;
        }
        PieceVariation pv;
        pv.piece_id = piece;
        pv.n = idx.size();
        pv.fvu = (t - p).squaredNorm() / tss;
        const double r = pearson(t, p);
        if (!std::isnan(r)) {
            pv.corr = r;
            pv.p_value = corr_pvalue(r, pv.n);
            pv.significant = *pv.p_value < alpha;
            corr_sum += r;
            ++corr_count;
        }
        fvu_sum += pv.fvu;
        if (pv.significant) ++significant;
        report.pieces.push_back(std::move(pv));
    }
    const auto used = static_cast<double>(report.pieces.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.fvu_mean = used > 0 ? fvu_sum / used : nan;
    report.corr_mean = corr_count ? corr_sum / static_cast<double>(corr_count) : nan;
    report.fraction_significant = used > 0 ? static_cast<double>(significant) / used : nan;
    return report;
}

PerfVariationReport performance_variation_eval(const Dataset& dataset, FeatureSet set, Target target, double alpha) {
    const Design design = make_design(dataset, set, target);
    const auto clips = dataset.usable_clips(std::span<const FeatureSet>(&set, 1));
    const FoldScheme scheme = make_folds(std::span<const ClipRecord* const>(clips), FoldKind::piecewise);

    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < design.clip_ids.size(); ++i) row_of.emplace(design.clip_ids[i], i);
    Eigen::VectorXd pred(static_cast<Eigen::Index>(design.rows()));
    for (const auto& fold : scheme.folds) {
        std::vector<std::size_t> train, test;
        for (const auto& id : fold.train) train.push_back(row_of.at(id));
        for (const auto& id : fold.test) test.push_back(row_of.at(id));
        const Design tr = design.subset(train);
        LinearModel model;
        try {
            model = LinearModel::fit(tr.X, tr.y, tr.names);
        } catch (const Error& e) {
            throw NumericalError("piece '" + fold.label + "' held out: " + e.what());
        }
        const Eigen::VectorXd yhat = model.predict(design.subset(test).X);
        for (std::size_t i = 0; i < test.size(); ++i) pred(static_cast<Eigen::Index>(test[i])) = yhat(static_cast<Eigen::Index>(i));
    }
    return performance_variation(design.piece_ids, design.y, pred, alpha);
}

}  // namespace emoperf::stats
