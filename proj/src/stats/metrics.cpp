#include "emoperf/stats/metrics.hpp"

#include "emoperf/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace emoperf::stats {

double adjusted_r2(double r2, std::size_t n, std::size_t p) {
    return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double saa = da.square().sum();
    const double sbb = db.square().sum();
    const double scale_a = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double scale_b = std::max(1.0, b.cwiseAbs().maxCoeff());
    const double tiny = 1e-26 * static_cast<double>(a.size());
    if (saa <= tiny * scale_a * scale_a || sbb <= tiny * scale_b * scale_b) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::clamp((da * db).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

Metrics regression_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, std::size_t p) {
    const auto n = static_cast<std::size_t>(y_true.size());
    if (static_cast<std::size_t>(y_pred.size()) != n) throw InputError("regression_metrics: length mismatch");
    if (n <= p + 1) {
        throw InputError("regression_metrics: need n > p + 1 (n = " + std::to_string(n) + ", p = " +
                         std::to_string(p) + ")");
    }
    const double tss = (y_true.array() - y_true.mean()).square().sum();
    if (!(tss > 0.0)) throw NumericalError("regression_metrics: constant y_true");
    const double rss = (y_true - y_pred).squaredNorm();
    Metrics m;
    m.n = n;
    m.p = p;
    m.r2 = 1.0 - rss / tss;
    m.adj_r2 = adjusted_r2(m.r2, n, p);
    m.rmse = std::sqrt(rss / static_cast<double>(n));
    m.corr = pearson(y_true, y_pred);
    return m;
}

double t_pvalue(double t, double dof) {
    if (std::isnan(t) || !(dof > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double corr_pvalue(double r, std::size_t n) {
    if (n < 3) throw InputError("corr_pvalue: need n >= 3");
    if (std::isnan(r)) return std::numeric_limits<double>::quiet_NaN();
    if (std::abs(r) >= 1.0) return 0.0;
    const double dof = static_cast<double>(n - 2);
    const double t = r * std::sqrt(dof) / std::sqrt(1.0 - r * r);
    return t_pvalue(t, dof);
}

}  // namespace emoperf::stats
