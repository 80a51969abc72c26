#include "emoperf/stats/lmm.hpp"

#include "emoperf/error.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace emoperf::stats {

namespace {

struct Groups {
    std::vector<std::size_t> index;  // group number per row
    std::vector<std::size_t> size;
};

Groups group_rows(std::span<const std::string> groups) {
    Groups g;
    std::map<std::string, std::size_t> ids;
    for (const auto& name : groups) {
        auto [it, inserted] = ids.try_emplace(name, g.size.size());
        if (inserted) g.size.push_back(0);
        g.index.push_back(it->second);
        ++g.size[it->second];
    }
    return g;
}

// Profiled fit at a fixed ratio. With V_g = s2 (I + ratio 11'), V_g^{-1/2} is a partial
// within-group demeaning by the factor 1 - 1/sqrt(1 + ratio n_g), so GLS becomes OLS on
// transformed rows.
MixedModelReport fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Groups& g, double ratio) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd A(n, X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;

    const std::size_t k = g.size.size();
    Eigen::MatrixXd group_sum_A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), A.cols());
    Eigen::VectorXd group_sum_y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto gi = static_cast<Eigen::Index>(g.index[static_cast<std::size_t>(i)]);
        group_sum_A.row(gi) += A.row(i);
        group_sum_y(gi) += y(i);
    }
    Eigen::MatrixXd At = A;
    Eigen::VectorXd yt = y;
    double log_det = 0.0;
    for (std::size_t j = 0; j < k; ++j) log_det += std::log1p(ratio * static_cast<double>(g.size[j]));
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t gi = g.index[static_cast<std::size_t>(i)];
        const double ng = static_cast<double>(g.size[gi]);
        const double shrink = (1.0 - 1.0 / std::sqrt(1.0 + ratio * ng)) / ng;
        At.row(i) -= shrink * group_sum_A.row(static_cast<Eigen::Index>(gi));
        yt(i) -= shrink * group_sum_y(static_cast<Eigen::Index>(gi));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
    qr.setThreshold(1e-10);
    if (qr.rank() < At.cols()) throw NumericalError("mixed model: rank-deficient fixed-effects design");

    MixedModelReport r;
    r.fixed_coefficients = qr.solve(yt);
    const double rss = (yt - At * r.fixed_coefficients).squaredNorm();
    const double nn = static_cast<double>(n);
    r.var_residual = rss / nn;
    if (!(r.var_residual > 0.0)) throw NumericalError("mixed model: zero residual variance");
    r.var_random = ratio * r.var_residual;
    r.ratio = ratio;
    r.e_random = r.var_random / (r.var_random + r.var_residual);
    r.log_likelihood = -0.5 * nn * (std::log(2.0 * std::numbers::pi * r.var_residual) + 1.0) - 0.5 * log_det;
    r.groups = k;
    return r;
}

void check(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::string> groups, const Groups& g) {
    if (y.size() != X.rows() || groups.size() != static_cast<std::size_t>(y.size())) {
        throw InputError("mixed model: X, y and groups have different lengths");
    }
    if (g.size.size() < 2) throw InputError("mixed model needs at least two groups");
    bool repeated = false;
    for (std::size_t s : g.size) repeated = repeated || s >= 2;
    if (!repeated) throw InputError("mixed model needs a group with at least two rows");
}

}  // namespace

MixedModelReport lmm_fit_at_ratio(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  std::span<const std::string> groups, double ratio) {
    const Groups g = group_rows(groups);
    check(X, y, groups, g);
    if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw InputError("mixed model: ratio must be finite and >= 0");
    MixedModelReport r = fit(X, y, g, ratio);
    if (ratio == 0.0) r.boundary = MixedModelReport::Boundary::lower;
    return r;
}

MixedModelReport lmm_random_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      std::span<const std::string> groups) {
    const Groups g = group_rows(groups);
    check(X, y, groups, g);
    auto objective = [&](double log_ratio) { return fit(X, y, g, std::exp(log_ratio)).log_likelihood; };

    // Coarse scan first so the golden-section bracket holds the global maximum.
    constexpr double step = 0.5;
    double best_x = kLogRatioMin;
    double best_f = objective(best_x);
    for (double x = kLogRatioMin + step; x <= kLogRatioMax + 1e-12; x += step) {
        const double f = objective(x);
        if (f > best_f) {
            best_f = f;
            best_x = x;
        }
    }
    double a = std::max(kLogRatioMin, best_x - step);
    double b = std::min(kLogRatioMax, best_x + step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c), fd = objective(d);
    while (b - a > kLogRatioTolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    const double x_opt = 0.5 * (a + b);
    MixedModelReport best = fit(X, y, g, std::exp(x_opt));
    if (best_f > best.log_likelihood) best = fit(X, y, g, std::exp(best_x));

    const MixedModelReport ols = fit(X, y, g, 0.0);
    if (ols.log_likelihood >= best.log_likelihood || x_opt - kLogRatioMin < 2.0 * kLogRatioTolerance) {
        MixedModelReport out = ols;
        out.boundary = MixedModelReport::Boundary::lower;
        return out;
    }
    if (kLogRatioMax - x_opt < 2.0 * kLogRatioTolerance) best.boundary = MixedModelReport::Boundary::upper;
    return best;
}

MixedModelReport lmm_random_intercept(const Design& design) {
    Eigen::MatrixXd X = design.X;
    if (X.cols() > 0) X = Standardizer::fit(X, design.names).apply(X);
    return lmm_random_intercept(X, design.y, design.piece_ids);
}

}  // namespace emoperf::stats
