#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emoperf/app/synthcorpus.hpp"
#include "emoperf/corpus.hpp"
#include "emoperf/csv.hpp"
#include "emoperf/stats/metrics.hpp"
#include "emoperf/stats/ols.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>

using namespace emoperf;
namespace t = emoperf::testing;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(EMOPERF_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Relative path -> content for every regular file under root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = t::read_text(e.path());
    }
    return out;
}

std::size_t data_rows(const fs::path& p) { return csv::read(p).rows.size(); }

std::string feature_args(const fs::path& dir, std::initializer_list<const char*> sets) {
    std::string s;
    for (const char* set : sets) s += (s.empty() ? "" : ",") + (dir / ("features_" + std::string(set) + ".csv")).string();
    return q(s);
}

}  // namespace

TEST_CASE("synthcorpus is deterministic and self-consistent") {
    t::TempDir dir;
    const auto a = run("synthcorpus --out " + q(dir / "a") + " --seed 7 --pieces 8 --pianists 3");
    const auto b = run("synthcorpus --out " + q(dir / "b") + " --seed 7 --pieces 8 --pianists 3");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    const auto clips = load_manifest(dir / "a" / "manifest.csv");
    CHECK(clips.size() == 24);
    CHECK(load_annotations(dir / "a" / "annotations.csv", clips).size() == 24);
    CHECK(snapshot(dir / "a") == snapshot(dir / "b"));

    const auto c = run("synthcorpus --out " + q(dir / "c") + " --seed 8 --pieces 8 --pianists 3");
    REQUIRE(c.exit_code == 0);
    CHECK(t::read_text(dir / "a" / "annotations.csv") != t::read_text(dir / "c" / "annotations.csv"));
}

TEST_CASE("extract on a four-clip corpus") {
    t::TempDir dir;
    REQUIRE(run("synthcorpus --out " + q(dir / "c") + " --pieces 2 --pianists 2").exit_code == 0);
    const auto manifest = q(dir / "c" / "manifest.csv");
    const auto first = run("extract --manifest " + manifest + " --features lowlevel,score --out " + q(dir / "f1"));
    REQUIRE(first.exit_code == 0);
    CHECK(snapshot(dir / "f1").size() == 2);
    CHECK(data_rows(dir / "f1" / "features_lowlevel.csv") == 4);
    CHECK(data_rows(dir / "f1" / "features_score.csv") == 4);
    CHECK(csv::read(dir / "f1" / "features_lowlevel.csv").header.size() == 23);
    CHECK(csv::read(dir / "f1" / "features_score.csv").header.size() == 8);

    REQUIRE(run("extract --manifest " + manifest + " --features lowlevel,score --out " + q(dir / "f2") + " --workers 2")
                .exit_code == 0);
    CHECK(snapshot(dir / "f1") == snapshot(dir / "f2"));

    const auto usage = run("extract --manifest " + manifest + " --features deam_pca --out " + q(dir / "f3"));
    CHECK(usage.exit_code == 2);
    CHECK(usage.output.find("--embeddings") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "f3"));

    const auto missing = run("extract --manifest " + q(dir / "nope.csv") + " --features lowlevel --out " + q(dir / "f4"));
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("nope.csv") != std::string::npos);

    t::write_text(dir / "bad.csv", "clip_id,piece_id\na,p1\n");
    const auto malformed = run("extract --manifest " + q(dir / "bad.csv") + " --features lowlevel --out " + q(dir / "f6"));
    CHECK(malformed.exit_code == 1);
    CHECK(malformed.output.find("missing required column") != std::string::npos);

    CHECK(run("extract --manifest " + manifest + " --features mfcc --out " + q(dir / "f5")).exit_code == 2);
}

TEST_CASE("eval on a 48-clip corpus") {
    t::TempDir dir;
    const fs::path c = dir / "c";
    REQUIRE(run("synthcorpus --out " + q(c) + " --pieces 8 --pianists 6").exit_code == 0);
    const auto ex = run("extract --manifest " + q(c / "manifest.csv") +
                        " --features lowlevel,score,midlevel,deam_pca --midlevel " + q(c / "midlevel.csv") +
                        " --embeddings " + q(c / "embeddings.csv") + " --out " + q(dir / "f"));
    REQUIRE(ex.exit_code == 0);
    const std::string base = "eval --manifest " + q(c / "manifest.csv") + " --annotations " + q(c / "annotations.csv") +
                             " --features " + feature_args(dir / "f", {"lowlevel", "score", "midlevel", "deam_pca"});

    SUBCASE("cv grid") {
        const auto r = run(base + " --experiment cv --out " + q(dir / "cv"));
        REQUIRE(r.exit_code == 0);
        const csv::Table t6b = csv::read(dir / "cv" / "table6b_cv.csv");
        REQUIRE(t6b.rows.size() == 4);
        for (const char* col : {"piecewise_A", "piecewise_V", "pianistwise_A", "pianistwise_V", "loo_A", "loo_V"}) {
            CHECK(t6b.column(col).has_value());
        }
        std::vector<std::string> sets;
        for (const auto& row : t6b.rows) sets.push_back(row[0]);
        CHECK(sets == std::vector<std::string>{"Mid-level", "DEAMResNet", "Low-level", "Score"});
        CHECK_FALSE(fs::exists(dir / "cv" / "table8_perfwise.csv"));
    }

    SUBCASE("perfwise table") {
        REQUIRE(run(base + " --experiment perfwise --out " + q(dir / "pw")).exit_code == 0);
        const csv::Table t8 = csv::read(dir / "pw" / "table8_perfwise.csv");
        for (const char* col : {"arousal_fvu", "arousal_corr", "arousal_frac_p_lt_0.1", "valence_fvu", "valence_corr",
                                "valence_frac_p_lt_0.1"}) {
            CHECK(t8.column(col).has_value());
        }
        CHECK(t8.rows.size() == 3);
    }

    SUBCASE("all artifacts, deterministic") {
        REQUIRE(run(base + " --experiment all --out " + q(dir / "r1")).exit_code == 0);
        REQUIRE(run(base + " --experiment all --out " + q(dir / "r2")).exit_code == 0);
        const auto s1 = snapshot(dir / "r1");
        CHECK(s1 == snapshot(dir / "r2"));
        for (const char* f : {"fig1_distributions.csv", "table5_subset.csv", "table6a_fit.csv", "table6b_cv.csv",
                              "fig2_tstats.csv", "table7_lmm.csv", "table8_perfwise.csv", "fig7_outliers.csv",
                              "fig8_classify.csv", "report.json", "summary.txt"}) {
            CHECK_MESSAGE(s1.contains(f), f);
        }
        const auto report = nlohmann::json::parse(s1.at("report.json"));
        CHECK(report.contains("config_hash"));
        const std::string hash = report["config_hash"].get<std::string>();
        CHECK(s1.at("table6a_fit.csv").find("config_hash=" + hash) != std::string::npos);
        CHECK(data_rows(dir / "r1" / "fig7_outliers.csv") > 0);
    }

    SUBCASE("usage errors") {
        const auto bad = run(base + " --experiment bogus --out " + q(dir / "x"));
        CHECK(bad.exit_code == 2);
        for (const char* name : {"fit", "cv", "importance", "perfwise", "outliers", "classify", "all"}) {
            CHECK(bad.output.find(name) != std::string::npos);
        }
        CHECK(run("eval --manifest " + q(c / "manifest.csv") + " --out " + q(dir / "y")).exit_code == 2);
        CHECK(run("frobnicate").exit_code == 2);
    }

    SUBCASE("planted low-level features explain the targets") {
        const auto clips = load_manifest(c / "manifest.csv");
        const TargetMap targets = load_annotations(c / "annotations.csv", clips);
        const FeatureTable low = load_feature_table(dir / "f" / "features_lowlevel.csv", FeatureSet::lowlevel);
        for (Target target : kAllTargets) {
            const auto& planted = target == Target::arousal ? app::kArousalPlanted : app::kValencePlanted;
            Eigen::MatrixXd X(Eigen::Index(low.rows.size()), Eigen::Index(planted.size()));
            Eigen::VectorXd y(X.rows());
            for (std::size_t r = 0; r < low.rows.size(); ++r) {
                for (std::size_t k = 0; k < planted.size(); ++k) {
                    const auto col = std::find(low.names.begin(), low.names.end(), planted[k]) - low.names.begin();
                    X(Eigen::Index(r), Eigen::Index(k)) = low.rows[r][std::size_t(col)];
                }
                y(Eigen::Index(r)) = targets.at(low.clip_ids[r]).standardized(target);
            }
            const stats::OlsModel m = stats::ols_fit(X, y);
            const double adj = stats::regression_metrics(y, m.predict(X), planted.size()).adj_r2;
            CAPTURE(to_string(target));
            CHECK(adj >= 0.95);
        }
    }
}
