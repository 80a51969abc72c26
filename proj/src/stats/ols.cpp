#include "emoperf/stats/ols.hpp"

#include "emoperf/error.hpp"
#include "emoperf/stats/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace emoperf::stats {

namespace {

constexpr double kRankThreshold = 1e-10;

std::string column_name(Eigen::Index c, std::span<const std::string> names) {
    if (c == 0) return "(intercept)";
    const auto i = static_cast<std::size_t>(c - 1);
    return i < names.size() ? names[i] : "x" + std::to_string(c);
}

}  // namespace

Eigen::VectorXd OlsModel::predict(const Eigen::MatrixXd& X) const {
    return (X * coefficients.tail(static_cast<Eigen::Index>(p))).array() + coefficients(0);
}

Eigen::VectorXd OlsModel::t_statistics() const { return coefficients.cwiseQuotient(standard_errors); }

OlsModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::string> names) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto p = static_cast<std::size_t>(X.cols());
    if (static_cast<std::size_t>(y.size()) != n) throw InputError("ols_fit: X and y row counts differ");
    if (n <= p + 1) {
        throw InputError("ols_fit: need n > p + 1 observations (n = " + std::to_string(n) + ", p = " +
                         std::to_string(p) + ")");
    }
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(kRankThreshold);
    const auto cols = A.cols();
    if (qr.rank() < cols) {
        std::string dropped;
        for (Eigen::Index i = qr.rank(); i < cols; ++i) {
            if (!dropped.empty()) dropped += ", ";
            dropped += column_name(qr.colsPermutation().indices()(i), names);
        }
        throw NumericalError("rank-deficient design: collinear column(s) " + dropped);
    }

    OlsModel m;
    m.n = n;
    m.p = p;
    m.coefficients = qr.solve(y);
    m.residuals = y - A * m.coefficients;
    m.rss = m.residuals.squaredNorm();
    m.sigma2 = m.rss / static_cast<double>(n - p - 1);

    // (A^T A)^{-1} = P R^{-1} R^{-T} P^T
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
    const Eigen::VectorXd diag_perm = Rinv.rowwise().squaredNorm();
    m.standard_errors.resize(cols);
    for (Eigen::Index i = 0; i < cols; ++i) {
        m.standard_errors(qr.colsPermutation().indices()(i)) = std::sqrt(m.sigma2 * diag_perm(i));
    }
    return m;
}

LinearModel LinearModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::string> names) {
    LinearModel lm;
    lm.scaler = Standardizer::fit(X, names);
    lm.ols = ols_fit(lm.scaler.apply(X), y, names);
    return lm;
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const { return ols.predict(scaler.apply(X)); }

std::vector<Importance> t_importance(const OlsModel& model, std::span<const std::string> names) {
    const Eigen::VectorXd t = model.t_statistics();
    std::vector<Importance> out;
    for (std::size_t j = 0; j < model.p; ++j) {
        const double tj = t(static_cast<Eigen::Index>(j + 1));
        out.push_back({j < names.size() ? names[j] : "x" + std::to_string(j + 1), tj, std::abs(tj),
                       t_pvalue(tj, model.dof())});
    }
    std::stable_sort(out.begin(), out.end(), [](const Importance& a, const Importance& b) { return a.abs_t > b.abs_t; });
    return out;
}

std::vector<Importance> significant(std::span<const Importance> ranked, double alpha) {
    std::vector<Importance> out;
    for (const auto& i : ranked) {
        if (i.p_value < alpha) out.push_back(i);
    }
    return out;
}

}  // namespace emoperf::stats
