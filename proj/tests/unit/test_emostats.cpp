#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emoperf/error.hpp"
#include "emoperf/stats/cv.hpp"
#include "emoperf/stats/design.hpp"
#include "emoperf/stats/folds.hpp"
#include "emoperf/stats/lmm.hpp"
#include "emoperf/stats/mcd.hpp"
#include "emoperf/stats/metrics.hpp"
#include "emoperf/stats/ols.hpp"
#include "emoperf/stats/outliers.hpp"
#include "emoperf/stats/perf_variation.hpp"
#include "emoperf/stats/quadrants.hpp"
#include "oracles.hpp"
#include "stats_fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

using namespace emoperf;
using namespace emoperf::stats;
using emoperf::testing::grid_dataset;
using emoperf::testing::mcd_oracle;
using emoperf::testing::normal_matrix;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    return A;
}

// Two-sided p-value by composite Simpson integration of the Student t density on [0, |t|].
double t_pvalue_oracle(double t, double dof) {
    const double c = std::tgamma((dof + 1.0) / 2.0) / (std::sqrt(dof * std::numbers::pi) * std::tgamma(dof / 2.0));
    auto f = [&](double x) { return c * std::pow(1.0 + x * x / dof, -(dof + 1.0) / 2.0); };
    const int m = 20000;
    const double h = std::abs(t) / m;
    double s = f(0.0) + f(std::abs(t));
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return 1.0 - 2.0 * s * h / 3.0;
}

// Dense Gaussian log-likelihood of the random-intercept model at a given ratio, profiled over beta and s2.
double lmm_loglik_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& groups,
                         double ratio) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (groups[std::size_t(i)] == groups[std::size_t(j)]) H(i, j) += ratio;
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(H);
    const Eigen::MatrixXd A = with_intercept(X);
    const Eigen::MatrixXd HiA = llt.solve(A);
    const Eigen::VectorXd beta = (A.transpose() * HiA).ldlt().solve(HiA.transpose() * y);
    const Eigen::VectorXd r = y - A * beta;
    const double s2 = r.dot(llt.solve(r)) / double(n);
    const Eigen::MatrixXd L = llt.matrixL();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    return -0.5 * double(n) * (std::log(2.0 * std::numbers::pi * s2) + 1.0) - 0.5 * logdet;
}

std::vector<std::string> grid_groups(int groups, int per) {
    std::vector<std::string> g;
    for (int i = 0; i < groups; ++i) {
        for (int j = 0; j < per; ++j) g.push_back("g" + std::to_string(i));
    }
    return g;
}

}  // namespace

TEST_CASE("ols exact line and orthogonal response") {
    Eigen::MatrixXd X(3, 1);
    X << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 2, 4, 6;
    const OlsModel m = ols_fit(X, y);
    CHECK(m.coefficients(0) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(m.coefficients(1) == doctest::Approx(2.0));
    CHECK(m.residuals.cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd Z(4, 2);
    Z << 1, 1, -1, 1, 1, -1, -1, -1;
    Eigen::VectorXd w(4);
    w << 1, -1, -1, 1;
    const OlsModel o = ols_fit(Z, w);
    CHECK(std::abs(o.coefficients(1)) < 1e-12);
    CHECK(std::abs(o.coefficients(2)) < 1e-12);
}

TEST_CASE("ols matches the normal equations") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd X = normal_matrix(20, 3, rng);
        const Eigen::VectorXd y = normal_matrix(20, 1, rng).col(0);
        const OlsModel m = ols_fit(X, y);
        const Eigen::MatrixXd A = with_intercept(X);
        const Eigen::MatrixXd xtx_inv = (A.transpose() * A).inverse();
        const Eigen::VectorXd beta = xtx_inv * A.transpose() * y;
        CHECK((m.coefficients - beta).cwiseAbs().maxCoeff() < 1e-8);
        const double s2 = (y - A * beta).squaredNorm() / 16.0;
        CHECK(m.sigma2 == doctest::Approx(s2));
        const Eigen::VectorXd se = (s2 * xtx_inv.diagonal()).cwiseSqrt();
        CHECK((m.standard_errors - se).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("ols invariants") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd X = normal_matrix(30, 4, rng);
        const Eigen::VectorXd y = X * Eigen::Vector4d(1.0, -0.5, 0.2, 0.0) + normal_matrix(30, 1, rng).col(0);
        const OlsModel m = ols_fit(X, y);
        const Eigen::VectorXd fitted = m.predict(X);

        // Refitting the fitted values reproduces them exactly.
        const OlsModel again = ols_fit(X, fitted);
        CHECK((again.coefficients - m.coefficients).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(again.rss < 1e-18 * fitted.squaredNorm() + 1e-20);

        // In-sample: squared correlation equals R^2, and adjustment never raises it.
        const Metrics met = regression_metrics(y, fitted, 4);
        CHECK(std::abs(met.corr * met.corr - met.r2) < 1e-9);
        CHECK(met.adj_r2 <= met.r2);

        // |t| ranking is invariant to per-column affine rescaling.
        Eigen::MatrixXd Z = X;
        for (Eigen::Index c = 0; c < 4; ++c) Z.col(c) = Z.col(c).array() * (0.1 + c * 3.0) + c - 2.0;
        const Eigen::VectorXd t0 = m.t_statistics().tail(4).cwiseAbs();
        const Eigen::VectorXd t1 = ols_fit(Z, y).t_statistics().tail(4).cwiseAbs();
        CHECK((t0 - t1).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("ols rejects collinear and undersized designs") {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd X = normal_matrix(10, 2, rng);
    X.col(1) = X.col(0);
    const Eigen::VectorXd y = normal_matrix(10, 1, rng).col(0);
    const std::vector<std::string> names = {"a", "a_copy"};
    CHECK_THROWS_AS(ols_fit(X, y, names), NumericalError);
    CHECK_THROWS_AS(ols_fit(normal_matrix(3, 2, rng), Eigen::VectorXd::Ones(3)), InputError);
    CHECK_THROWS_AS(LinearModel::fit(Eigen::MatrixXd::Ones(10, 1), y), NumericalError);
}

TEST_CASE("t importance") {
    std::mt19937_64 rng(5);
    int wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd X = normal_matrix(40, 2, rng);
        const Eigen::VectorXd y = 3.0 * X.col(0) + normal_matrix(40, 1, rng).col(0);
        const auto t = ols_fit(X, y).t_statistics();
        wins += std::abs(t(1)) > std::abs(t(2));
    }
    CHECK(wins >= 99);

    const Eigen::MatrixXd X = normal_matrix(30, 3, rng);
    const Eigen::VectorXd y = X * Eigen::Vector3d(0.5, -1.0, 0.1) + normal_matrix(30, 1, rng).col(0);
    Eigen::MatrixXd scaled = X;
    scaled.col(1) *= 10.0;
    const Eigen::VectorXd t0 = ols_fit(X, y).t_statistics();
    const Eigen::VectorXd t1 = ols_fit(scaled, y).t_statistics();
    CHECK(std::abs(std::abs(t0(2)) - std::abs(t1(2))) < 1e-8);

    const std::vector<std::string> names = {"a", "b", "c"};
    const OlsModel m = ols_fit(X, y, names);
    const auto ranked = t_importance(m, names);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].name == "b");
    for (std::size_t i = 1; i < 3; ++i) CHECK(ranked[i - 1].abs_t >= ranked[i].abs_t);
    for (const auto& r : ranked) CHECK(r.p_value == doctest::Approx(t_pvalue(r.t, m.dof())));
    for (const auto& s : significant(ranked)) CHECK(s.p_value < 0.05);
}

TEST_CASE("metrics") {
    Eigen::VectorXd y(5);
    y << 1, 3, 2, 5, 4;
    const Metrics perfect = regression_metrics(y, y, 1);
    CHECK(perfect.adj_r2 == 1.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.corr == doctest::Approx(1.0));
    CHECK(adjusted_r2(0.9, 10, 2) == doctest::Approx(1.0 - 0.1 * 9.0 / 7.0));
    CHECK(adjusted_r2(0.9, 10, 2) == doctest::Approx(0.8714).epsilon(1e-4));
    CHECK(std::isnan(pearson(y, Eigen::VectorXd::Constant(5, 2.0))));
    CHECK(std::isnan(regression_metrics(y, Eigen::VectorXd::Constant(5, 2.0), 1).corr));
    CHECK_THROWS_AS(regression_metrics(Eigen::VectorXd::Ones(5), y, 1), NumericalError);
    CHECK_THROWS_AS(regression_metrics(y, y, 4), InputError);

    Eigen::VectorXd pred(5);
    pred << 1.5, 2.5, 2.0, 4.0, 4.5;
    const double tss = (y.array() - 3.0).square().sum();
    const double rss = (y - pred).squaredNorm();
    const Metrics m = regression_metrics(y, pred, 1);
    CHECK(m.r2 == doctest::Approx(1.0 - rss / tss));
    CHECK(m.rmse == doctest::Approx(std::sqrt(rss / 5.0)));
}

TEST_CASE("correlation p-values") {
    CHECK(corr_pvalue(1.0, 10) == 0.0);
    CHECK(corr_pvalue(-1.0, 4) == 0.0);
    CHECK(corr_pvalue(0.0, 6) == doctest::Approx(1.0));
    const double t = 0.8 * std::sqrt(4.0) / std::sqrt(1.0 - 0.64);
    CHECK(std::abs(corr_pvalue(0.8, 6) - t_pvalue_oracle(t, 4.0)) < 1e-6);
    for (double dof : {1.0, 3.0, 10.0, 50.0}) {
        for (double tv : {0.3, 1.7, 4.2}) CHECK(std::abs(t_pvalue(tv, dof) - t_pvalue_oracle(tv, dof)) < 1e-6);
    }
    CHECK_THROWS_AS(corr_pvalue(0.5, 2), InputError);
}

TEST_CASE("standardizer") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 10, 2, 10, 3, 10, 6, 10;
    const std::vector<std::string> names = {"x", "flat"};
    try {
        Standardizer::fit(X, names);
        FAIL("expected an error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("'flat'") != std::string::npos);
    }
    const Standardizer s = Standardizer::fit(X.leftCols(1));
    const Eigen::MatrixXd z = s.apply(X.leftCols(1));
    CHECK(z.mean() == doctest::Approx(0.0).scale(1.0));
    CHECK(z.squaredNorm() / 4.0 == doctest::Approx(1.0));
}

TEST_CASE("fold schemes") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd X = normal_matrix(288, 2, rng);
    const Eigen::VectorXd a = normal_matrix(288, 1, rng).col(0);
    const Dataset ds = grid_dataset(48, 6, X, a, a);
    const auto clips = ds.usable_clips({});
    std::vector<std::string> ids;
    for (const auto* c : clips) ids.push_back(c->clip_id);

    const FoldScheme pw = make_folds(clips, FoldKind::piecewise);
    const FoldScheme pn = make_folds(clips, FoldKind::pianistwise);
    const FoldScheme lo = make_folds(clips, FoldKind::loo);
    CHECK(pw.folds.size() == 48);
    CHECK(pn.folds.size() == 6);
    CHECK(lo.folds.size() == 288);
    CHECK_NOTHROW(pw.validate(ids));
    CHECK_NOTHROW(pn.validate(ids));
    CHECK_NOTHROW(lo.validate(ids));
    for (const auto& f : pw.folds) {
        CHECK(f.test.size() == 6);
        CHECK(f.train.size() == 282);
    }
    for (const auto& f : pn.folds) CHECK(f.test.size() == 48);

    FoldScheme broken = pw;
    broken.folds[0].test.pop_back();
    CHECK_THROWS_AS(broken.validate(ids), InputError);

    const FoldScheme custom =
        make_custom_folds(clips, [](const ClipRecord& c) { return c.piece_id < "p3" ? "early" : "late"; });
    CHECK(custom.folds.size() == 2);
    CHECK_NOTHROW(custom.validate(ids));
}

TEST_CASE("small fold cases") {
    std::vector<ClipRecord> four(4);
    for (int i = 0; i < 4; ++i) {
        four[std::size_t(i)].clip_id = "c" + std::to_string(i);
        four[std::size_t(i)].piece_id = i < 2 ? "A" : "B";
        four[std::size_t(i)].pianist_id = i % 2 ? "x" : "y";
    }
    const FoldScheme f = make_folds(four, FoldKind::piecewise);
    REQUIRE(f.folds.size() == 2);
    CHECK(f.folds[0].test.size() == 2);
    CHECK(f.folds[1].test.size() == 2);
    for (auto& c : four) c.piece_id = "A";
    CHECK_THROWS_AS(make_folds(four, FoldKind::piecewise), InputError);
}

TEST_CASE("cross-validation") {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd X = normal_matrix(288, 4, rng);
    const Eigen::VectorXd linear = X * Eigen::Vector4d(1.0, -2.0, 0.5, 0.3);
    const Eigen::VectorXd noise = normal_matrix(288, 1, rng).col(0);
    const Dataset ds = grid_dataset(48, 6, X, linear, noise);
    for (FoldKind kind : {FoldKind::piecewise, FoldKind::pianistwise, FoldKind::loo}) {
        const FoldScheme scheme = make_folds(ds.usable_clips(std::array{FeatureSet::lowlevel}), kind);
        const CvResult exact = cross_validate(ds, FeatureSet::lowlevel, Target::arousal, scheme);
        CHECK(exact.pooled.adj_r2 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(exact.predictions.size() == 288);
        const CvResult none = cross_validate(ds, FeatureSet::lowlevel, Target::valence, scheme);
        CHECK(none.pooled.adj_r2 <= 0.05);
    }
    const FoldScheme loo = make_folds(ds.usable_clips(std::array{FeatureSet::lowlevel}), FoldKind::loo);
    const CvResult r = cross_validate(ds, FeatureSet::lowlevel, Target::arousal, loo);
    CHECK(r.folds_with_adj_r2 == 0);
    CHECK(std::isnan(r.mean_fold_adj_r2));
}

TEST_CASE("cross-validation standardizes on the training fold only") {
    std::mt19937_64 rng(12);
    const Eigen::MatrixXd X = normal_matrix(24, 2, rng);
    const Eigen::VectorXd y = X.col(0) + 0.3 * normal_matrix(24, 1, rng).col(0);
    const Dataset ds = grid_dataset(4, 6, X, y, y);
    const Design d = make_design(ds, FeatureSet::lowlevel, Target::arousal);
    const FoldScheme scheme = make_folds(ds.usable_clips(std::array{FeatureSet::lowlevel}), FoldKind::piecewise);
    const CvResult r = cross_validate(d, scheme);
    // Oracle: raw OLS on the training rows predicts identically, since z-scoring is an affine reparametrisation.
    Eigen::Index k = 0;
    for (std::size_t f = 0; f < 4; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < 24; ++i) (i / 6 == Eigen::Index(f) ? test : train).push_back(i);
        const OlsModel m = ols_fit(d.X(train, Eigen::all), d.y(train));
        const Eigen::VectorXd p = m.predict(d.X(test, Eigen::all));
        for (Eigen::Index i = 0; i < p.size(); ++i, ++k) CHECK(r.predictions(k) == doctest::Approx(p(i)));
    }
}

TEST_CASE("mixed model likelihood matches the dense oracle") {
    std::mt19937_64 rng(8);
    const auto groups = grid_groups(6, 4);
    const Eigen::MatrixXd X = normal_matrix(24, 2, rng);
    Eigen::VectorXd y = X.col(0) + normal_matrix(24, 1, rng).col(0);
    for (int g = 0; g < 6; ++g) y.segment(4 * g, 4).array() += 0.7 * g;
    for (double ratio : {0.0, 0.05, 0.8, 4.0, 50.0}) {
        const MixedModelReport r = lmm_fit_at_ratio(X, y, groups, ratio);
        CHECK(r.log_likelihood == doctest::Approx(lmm_loglik_oracle(X, y, groups, ratio)).epsilon(1e-10));
    }
    const MixedModelReport ols = lmm_fit_at_ratio(X, y, groups, 0.0);
    CHECK((ols.fixed_coefficients - ols_fit(X, y).coefficients).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ols.var_residual == doctest::Approx(ols_fit(X, y).rss / 24.0));

    const MixedModelReport best = lmm_random_intercept(X, y, groups);
    CHECK(best.boundary == MixedModelReport::Boundary::interior);
    for (double f : {0.9, 1.1}) {
        CHECK(best.log_likelihood >= lmm_fit_at_ratio(X, y, groups, best.ratio * f).log_likelihood);
    }
    CHECK(best.e_random == doctest::Approx(best.var_random / (best.var_random + best.var_residual)));
}

TEST_CASE("mixed model variance partition") {
    const auto groups = grid_groups(48, 6);
    const Eigen::MatrixXd none(288, 0);

    SUBCASE("between-group variance only") {
        std::mt19937_64 rng(2);
        Eigen::VectorXd y(288);
        const Eigen::MatrixXd level = normal_matrix(48, 1, rng, 10.0);
        const Eigen::MatrixXd jitter = normal_matrix(288, 1, rng, 1e-4);
        for (Eigen::Index i = 0; i < 288; ++i) y(i) = level(i / 6, 0) + jitter(i, 0);
        CHECK(lmm_random_intercept(none, y, groups).e_random >= 0.99);
    }

    SUBCASE("independent noise") {
        for (unsigned seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            const Eigen::VectorXd y = normal_matrix(288, 1, rng).col(0);
            const double e = lmm_random_intercept(none, y, groups).e_random;
            CHECK(e >= 0.0);
            CHECK(e < 0.15);
        }
    }

    SUBCASE("recovery of var_random = 3, var_residual = 1") {
        double sum = 0.0;
        for (unsigned seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(1000 + seed);
            const Eigen::MatrixXd X = normal_matrix(288, 2, rng);
            const Eigen::MatrixXd u = normal_matrix(48, 1, rng, std::sqrt(3.0));
            Eigen::VectorXd y = X * Eigen::Vector2d(0.5, -0.25) + normal_matrix(288, 1, rng).col(0);
            for (Eigen::Index i = 0; i < 288; ++i) y(i) += u(i / 6, 0);
            const double e = lmm_random_intercept(X, y, groups).e_random;
            CHECK(e >= 0.0);
            CHECK(e <= 1.0);
            sum += e;
        }
        CHECK(std::abs(sum / 20.0 - 0.75) <= 0.08);
    }

    CHECK_THROWS_AS(lmm_random_intercept(none, Eigen::VectorXd::Ones(4), grid_groups(1, 4)), InputError);
}

TEST_CASE("performance variation") {
    const std::vector<std::string> pieces = {"a", "a", "a", "b", "b", "b", "c", "c"};
    Eigen::VectorXd y(8);
    y << 1, 2, 4, 0, 3, 3, 5, 6;

    const PerfVariationReport perfect = performance_variation(pieces, y, y);
    CHECK(perfect.pieces.size() == 2);
    CHECK(perfect.excluded == std::vector<std::string>{"c"});
    CHECK(perfect.fvu_mean == doctest::Approx(0.0));
    CHECK(perfect.fraction_significant == 1.0);

    Eigen::VectorXd means(8);
    means << 7.0 / 3, 7.0 / 3, 7.0 / 3, 2, 2, 2, 5.5, 5.5;
    const PerfVariationReport flat = performance_variation(pieces, y, means);
    for (const auto& p : flat.pieces) {
        CHECK(p.fvu == doctest::Approx(1.0));
        CHECK_FALSE(p.corr.has_value());
        CHECK_FALSE(p.significant);
    }
    CHECK(flat.fraction_significant == 0.0);

    // FVU is measured about each piece's own mean.
    Eigen::VectorXd pred(8);
    pred << 1.5, 2.0, 3.0, 1.0, 2.0, 3.0, 0, 0;
    const PerfVariationReport r = performance_variation(pieces, y, pred);
    const double tss_a = (1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) + (4 - 7.0 / 3) * (4 - 7.0 / 3);
    CHECK(r.pieces[0].fvu == doctest::Approx((0.25 + 0.0 + 1.0) / tss_a));
    REQUIRE(r.pieces[0].corr.has_value());
    CHECK(*r.pieces[0].p_value == doctest::Approx(corr_pvalue(*r.pieces[0].corr, 3)));
    CHECK(r.pieces[0].significant == (*r.pieces[0].p_value < 0.1));
}

TEST_CASE("mcd") {
    CHECK(mcd_subset_size(6) == 5);
    std::vector<Eigen::Vector2d> pts = {{0.0, 0.0}, {0.01, 0.0}, {0.0, 0.01}, {-0.01, 0.0}, {0.0, -0.01}, {3.0, 3.0}};
    CHECK(mcd_outlier(pts).outlier == 5);

    std::vector<std::size_t> perm = {0, 1, 2, 3, 4, 5};
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Eigen::Vector2d> shuffled;
        for (std::size_t i : perm) shuffled.push_back(pts[i]);
        CHECK(perm[mcd_outlier(shuffled).outlier] == 5);
    }

    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Eigen::Vector2d> cloud(6);
        for (auto& p : cloud) p = {n(rng), n(rng)};
        const McdResult r = mcd_outlier(cloud);
        CHECK(r.outlier == mcd_oracle(cloud));
        CHECK(r.support.size() == 5);
        CHECK(std::is_sorted(r.support.begin(), r.support.end()));
    }

    for (std::size_t size = 5; size <= 8; ++size) {
        int agree = 0;
        for (int trial = 0; trial < 250; ++trial) {
            std::vector<Eigen::Vector2d> cloud(size);
            for (auto& p : cloud) p = {n(rng), n(rng)};
            agree += mcd_outlier(cloud).outlier == mcd_oracle(cloud);
        }
        CHECK(agree == 250);
    }

    CHECK_THROWS_AS(mcd_outlier(std::vector<Eigen::Vector2d>(6, Eigen::Vector2d(1.0, 1.0))), NumericalError);
    CHECK_THROWS_AS(mcd_outlier(std::vector<Eigen::Vector2d>(4, Eigen::Vector2d(1.0, 1.0))), InputError);
}

TEST_CASE("outlier split and experiment") {
    std::mt19937_64 rng(21);
    const Eigen::MatrixXd X = normal_matrix(288, 3, rng);
    const Eigen::VectorXd a = X * Eigen::Vector3d(1.0, 0.5, -0.5);
    const Eigen::VectorXd v = X * Eigen::Vector3d(-0.2, 0.7, 0.1);
    const Dataset ds = grid_dataset(48, 6, X, a, v);
    const OutlierSplit split = outlier_split(ds);
    CHECK(split.train.size() == 240);
    CHECK(split.test.size() == 48);
    CHECK(split.outlier_of_piece.size() == 48);
    std::set<std::string> pieces;
    for (const auto& id : split.test) pieces.insert(ds.clip(id)->piece_id);
    CHECK(pieces.size() == 48);
    std::size_t counted = 0;
    for (const auto& [pianist, count] : split.pianist_counts) counted += count;
    CHECK(counted == 48);

    const OutlierReport r = outlier_experiment(ds, FeatureSet::lowlevel, split);
    CHECK(r.n_train == 240);
    CHECK(r.n_test == 48);
    CHECK(r.arousal.adj_r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.valence.adj_r2 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quadrants") {
    CHECK(quadrantize(1, 1) == Quadrant::happy);
    CHECK(quadrantize(1, -1) == Quadrant::angry);
    CHECK(quadrantize(-1, -1) == Quadrant::sad);
    CHECK(quadrantize(-1, 1) == Quadrant::relaxed);
    CHECK(quadrantize(0, 0) == Quadrant::happy);
    // (arousal, valence) negation maps happy <-> sad and relaxed <-> angry away from the axes.
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), v = u(rng);
        const int q = int(quadrantize(a, v));
        const int neg = int(quadrantize(-a, -v));
        CHECK((q + 2) % 4 == neg);
    }
}

TEST_CASE("softmax classifier") {
    std::mt19937_64 rng(13);
    const Eigen::MatrixXd centres = (Eigen::MatrixXd(4, 2) << 5, 5, -5, 5, -5, -5, 5, -5).finished();
    Eigen::MatrixXd X(120, 2);
    std::vector<int> labels(120);
    const Eigen::MatrixXd noise = normal_matrix(120, 2, rng);
    for (int i = 0; i < 120; ++i) {
        labels[std::size_t(i)] = i % 4;
        X.row(i) = centres.row(i % 4) + noise.row(i);
    }
    const ClassificationReport sep = loo_accuracy(X, labels);
    CHECK(sep.loo_accuracy >= 0.95);
    CHECK(sep.class_counts == std::array<std::size_t, 4>{30, 30, 30, 30});

    const SoftmaxClassifier model = SoftmaxClassifier::fit(X, labels);
    CHECK(model.gradient_norm() < kSoftmaxGradientTolerance);
    CHECK(model.classes() == std::vector<int>{0, 1, 2, 3});
    CHECK(model.predict(Eigen::RowVector2d(5, -5)) == 3);

    const Eigen::MatrixXd random = normal_matrix(200, 3, rng);
    std::vector<int> balanced(200);
    for (int i = 0; i < 200; ++i) balanced[std::size_t(i)] = i % 4;
    CHECK(std::abs(loo_accuracy(random, balanced).loo_accuracy - 0.25) <= 0.08);

    // Averaged over draws, leave-one-out accuracy on class-independent features sits at chance.
    double mean = 0.0;
    for (int draw = 0; draw < 40; ++draw) mean += loo_accuracy(normal_matrix(200, 3, rng), balanced).loo_accuracy / 40.0;
    CHECK(std::abs(mean - 0.25) <= 0.03);

    // Imbalanced classes: the class weights make each class contribute equally to the loss.
    std::vector<int> skewed(200);
    for (int i = 0; i < 200; ++i) skewed[std::size_t(i)] = i < 140 ? 0 : 1 + i % 3;
    const SoftmaxClassifier s = SoftmaxClassifier::fit(random, skewed);
    CHECK(s.gradient_norm() < kSoftmaxGradientTolerance);
    int minority = 0;
    for (Eigen::Index i = 0; i < 200; ++i) minority += s.predict(random.row(i)) != 0;
    CHECK(minority > 30);

    CHECK_THROWS_AS(loo_accuracy(X, std::vector<int>(120, 2)), InputError);
}

TEST_CASE("quadrant classification on a dataset") {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd X = normal_matrix(288, 2, rng);
    const Eigen::VectorXd a = 3.0 * X.col(0) + 0.1 * normal_matrix(288, 1, rng).col(0);
    const Eigen::VectorXd v = 3.0 * X.col(1) + 0.1 * normal_matrix(288, 1, rng).col(0);
    const Dataset ds = grid_dataset(48, 6, X, a, v);
    const ClassificationReport r = classify_quadrants(ds, FeatureSet::lowlevel);
    CHECK(r.n == 288);
    CHECK(r.loo_accuracy >= 0.9);
    CHECK(r.baseline == 0.25);
    std::size_t total = 0;
    for (auto c : r.class_counts) total += c;
    CHECK(total == 288);
}
