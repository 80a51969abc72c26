#include "emoperf/stats/cv.hpp"

#include "emoperf/error.hpp"
#include "emoperf/stats/ols.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace emoperf::stats {

CvResult cross_validate(const Design& design, const FoldScheme& scheme) {
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < design.clip_ids.size(); ++i) row_of.emplace(design.clip_ids[i], i);
    auto rows_for = [&](const std::vector<std::string>& ids) {
        std::vector<std::size_t> rows;
        for (const auto& id : ids) {
            if (auto it = row_of.find(id); it != row_of.end()) rows.push_back(it->second);
        }
        return rows;
    };

    const std::size_t p = design.predictors();
    CvResult result;
    result.kind = scheme.kind;
    std::vector<double> truth, pred;
    double fold_sum = 0.0;
    for (const auto& fold : scheme.folds) {
        const auto test_rows = rows_for(fold.test);
        if (test_rows.empty()) continue;
        const Design train = design.subset(rows_for(fold.train));
        const Design test = design.subset(test_rows);
        LinearModel model;
        try {
            model = LinearModel::fit(train.X, train.y, train.names);
        } catch (const Error& e) {
            throw NumericalError("fold '" + fold.label + "': " + e.what());
        }
        const Eigen::VectorXd yhat = model.predict(test.X);

        FoldResult fr;
        fr.label = fold.label;
        fr.n_train = train.rows();
        fr.n_test = test.rows();
        fr.rmse = std::sqrt((test.y - yhat).squaredNorm() / static_cast<double>(test.rows()));
        fr.adj_r2 = std::numeric_limits<double>::quiet_NaN();
        const double tss = (test.y.array() - test.y.mean()).square().sum();
        if (test.rows() > p + 1 && tss > 0.0) {
            fr.adj_r2 = adjusted_r2(1.0 - (test.y - yhat).squaredNorm() / tss, test.rows(), p);
            fold_sum += fr.adj_r2;
            ++result.folds_with_adj_r2;
        }
        result.folds.push_back(fr);
        for (Eigen::Index i = 0; i < yhat.size(); ++i) {
            truth.push_back(test.y(i));
            pred.push_back(yhat(i));
        }
    }
    const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(truth.data(), static_cast<Eigen::Index>(truth.size()));
    result.predictions = Eigen::Map<const Eigen::VectorXd>(pred.data(), static_cast<Eigen::Index>(pred.size()));
    result.pooled = regression_metrics(t, result.predictions, p);
    result.mean_fold_adj_r2 = result.folds_with_adj_r2
                                  ? fold_sum / static_cast<double>(result.folds_with_adj_r2)
                                  : std::numeric_limits<double>::quiet_NaN();
    return result;
}

CvResult cross_validate(const Dataset& dataset, FeatureSet set, Target target, const FoldScheme& scheme) {
    return cross_validate(make_design(dataset, set, target), scheme);
}

}  // namespace emoperf::stats
