#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emoperf/embedding.hpp"
#include "emoperf/error.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <random>
#include <sstream>

using namespace emoperf;
using namespace emoperf::embedding;
namespace t = emoperf::testing;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    }
    return m;
}

std::string table_text(const Eigen::MatrixXd& values, const std::vector<std::string>& names) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "clip_id";
    for (const auto& n : names) ss << ',' << n;
    ss << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        ss << "c" << r;
        for (Eigen::Index c = 0; c < values.cols(); ++c) ss << ',' << values(r, c);
        ss << '\n';
    }
    return ss.str();
}

std::vector<std::string> dim_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
    return names;
}

}  // namespace

TEST_CASE("512-d embeddings load") {
    t::TempDir dir;
    const Eigen::MatrixXd v = gaussian(288, 512, 1);
    const EmbeddingTable e = load_embeddings(t::write_text(dir / "e.csv", table_text(v, dim_names(512))), 512);
    CHECK(e.clip_ids.size() == 288);
    CHECK(e.values.rows() == 288);
    CHECK(e.values.cols() == 512);
    CHECK((e.values - v).cwiseAbs().maxCoeff() < 1e-15);

    std::string text = table_text(v.topRows(3), dim_names(512));
    const auto last = text.rfind(',');
    text.erase(last, text.find('\n', last) - last);
    try {
        load_embeddings(t::write_text(dir / "short.csv", text), 512);
        FAIL("expected an error");
    } catch (const InputError& err) {
        CHECK(std::string(err.what()).find("'c2'") != std::string::npos);
    }
    CHECK_THROWS_AS(load_embeddings(t::write_text(dir / "n.csv", table_text(v.leftCols(511), dim_names(511))), 512),
                    InputError);
}

TEST_CASE("mid-level table") {
    t::TempDir dir;
    const Eigen::MatrixXd v = gaussian(288, 7, 2);
    const std::vector<std::string> pretty = {"Melodiousness", "Articulation", "Rhythmic Stability", "Rhythmic Complexity",
                                             "Dissonance",    "Tonal Stability", "Minorness"};
    const FeatureTable f = midlevel_features(load_embeddings(t::write_text(dir / "m.csv", table_text(v, pretty)), 7));
    CHECK(f.set == FeatureSet::midlevel);
    CHECK(f.rows.size() == 288);
    REQUIRE(f.names.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(f.names[i] == kMidLevelNames[i]);

    std::vector<std::string> wrong = pretty;
    std::swap(wrong[0], wrong[1]);
    CHECK_THROWS_AS(load_embeddings(t::write_text(dir / "w.csv", table_text(v, wrong)), 7), InputError);
}

TEST_CASE("pca on rank-1 data") {
    const Eigen::VectorXd dir = gaussian(512, 1, 3).col(0).normalized();
    const Eigen::VectorXd coef = gaussian(50, 1, 4).col(0);
    Eigen::MatrixXd data = coef * dir.transpose();
    data += 1e-6 * gaussian(50, 512, 5) * (coef.norm() / std::sqrt(50.0 * 512.0));
    const PcaModel m = pca_fit(data);
    CHECK(m.k == 1);
    CHECK(std::abs(m.components.row(0).dot(dir)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca threshold rule matches a covariance eigen-decomposition") {
    const Eigen::MatrixXd cloud = gaussian(300, 512, 6);
    const PcaModel m = pca_fit(cloud, 0.98);

    const Eigen::MatrixXd centred = cloud.rowwise() - cloud.colwise().mean();
    const Eigen::MatrixXd cov = centred.transpose() * centred / 299.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd ev = eig.eigenvalues().reverse();
    const double total = ev.sum();
    std::size_t k = 0;
    double running = 0.0;
    while (running / total < 0.98) running += ev(static_cast<Eigen::Index>(k++));
    CHECK(m.k == k);
    CHECK(m.k > 200);
    CHECK(m.total_variance == doctest::Approx(total));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(m.explained_variance(i) == doctest::Approx(ev(i)));
    CHECK(m.explained_variance_ratio_cumulative(static_cast<Eigen::Index>(m.k) - 1) >= 0.98);
    CHECK(m.explained_variance_ratio_cumulative(static_cast<Eigen::Index>(m.k) - 2) < 0.98);
}

TEST_CASE("pca projection, orthonormality and reconstruction") {
    // Rank-5 data in 40 dimensions.
    const Eigen::MatrixXd data = gaussian(60, 5, 7) * gaussian(5, 40, 8) + Eigen::MatrixXd::Constant(60, 40, 3.0);
    const PcaModel m = pca_fit(data, 1.0);
    CHECK(m.k == 5);
    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);

    CHECK(pca_transform(m, m.mean).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd unit = pca_transform(m, m.mean + m.components.row(0).transpose());
    CHECK(unit(0) == doctest::Approx(1.0));
    CHECK(unit.tail(4).cwiseAbs().maxCoeff() < 1e-10);

    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        const Eigen::VectorXd x = data.row(r).transpose();
        CHECK((pca_inverse(m, pca_transform(m, x)) - x).cwiseAbs().maxCoeff() < 1e-6);
    }
    for (Eigen::Index i = 0; i < 5; ++i) {
        Eigen::Index arg = 0;
        m.components.row(i).cwiseAbs().maxCoeff(&arg);
        CHECK(m.components(i, arg) > 0.0);
    }
    CHECK_THROWS_AS(pca_transform(m, Eigen::VectorXd::Zero(3)), InputError);
    CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Ones(4, 3)), NumericalError);
    CHECK_THROWS_AS(pca_fit(data, 0.0), InputError);
}

TEST_CASE("deam_pca features") {
    EmbeddingTable table;
    table.values = gaussian(40, 3, 9) * gaussian(3, 512, 10);
    for (int i = 0; i < 40; ++i) table.clip_ids.push_back("c" + std::to_string(i));
    table.names = dim_names(512);
    PcaModel model;
    const FeatureTable f = deam_pca_features(table, 0.98, &model);
    CHECK(f.set == FeatureSet::deam_pca);
    CHECK(f.names == pca_names(model.k));
    CHECK(f.names.front() == "pca_1");
    CHECK(f.rows.size() == 40);
    CHECK(f.rows[0].size() == model.k);
    CHECK(model.k <= 3);
}
