#include "emoperf/app/evaluate.hpp"
#include "emoperf/app/extract.hpp"
#include "emoperf/app/logging.hpp"
#include "emoperf/app/synthcorpus.hpp"
#include "emoperf/error.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::size_t start = 0;
        while (start <= item.size()) {
            const std::size_t comma = item.find(',', start);
            const std::string part = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!part.empty()) out.push_back(part);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace emoperf;
    app::init_logging();

    CLI::App cli{"Emotion modelling of piano performances: feature extraction and evaluation"};
    cli.require_subcommand(1);

    std::string manifest, annotations, out, midlevel, embeddings, experiment = "all", subset_pianist;
    std::vector<std::string> features;
    std::uint64_t seed = 7;
    unsigned workers = 1;
    std::size_t pieces = 48, pianists = 6;

    auto* extract = cli.add_subcommand("extract", "compute feature tables for the clips of a manifest");
    extract->add_option("--manifest", manifest, "manifest.csv")->required()->check(CLI::ExistingFile);
    extract->add_option("--features", features, "feature sets: lowlevel,score,midlevel,deam_pca")->required();
    extract->add_option("--midlevel", midlevel, "7-column mid-level table (for midlevel)")->check(CLI::ExistingFile);
    extract->add_option("--embeddings", embeddings, "512-column embedding table (for deam_pca)")->check(CLI::ExistingFile);
    extract->add_option("--out", out, "output directory")->required();
    extract->add_option("--workers", workers, "parallel extraction threads")->check(CLI::PositiveNumber);
    extract->add_option("--seed", seed, "recorded for provenance");

    auto* eval = cli.add_subcommand("eval", "run the evaluation experiments");
    eval->add_option("--manifest", manifest, "manifest.csv")->required()->check(CLI::ExistingFile);
    eval->add_option("--annotations", annotations, "annotations.csv")->required()->check(CLI::ExistingFile);
    eval->add_option("--features", features, "feature tables: set=path or features_<set>.csv")->required();
    eval->add_option("--experiment", experiment, "fit, cv, importance, piecewise, perfwise, outliers, classify, all");
    eval->add_option("--out", out, "output directory")->required();
    eval->add_option("--seed", seed, "recorded in every report");
    eval->add_option("--subset-pianist", subset_pianist, "pianist for the single-performer table");
    eval->add_option("--workers", workers, "accepted for symmetry; evaluation is sequential");

    auto* synth = cli.add_subcommand("synthcorpus", "generate a synthetic corpus with planted targets");
    synth->add_option("--out", out, "output directory")->required();
    synth->add_option("--seed", seed, "random seed");
    synth->add_option("--pieces", pieces, "number of pieces (>= 2)");
    synth->add_option("--pianists", pianists, "number of pianists (>= 2)");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (extract->parsed()) {
            app::ExtractOptions o;
            o.manifest = manifest;
            o.out_dir = out;
            o.workers = workers;
            for (const auto& name : split_list(features)) {
                try {
                    o.sets.push_back(parse_feature_set(name));
                } catch (const InputError& e) {
                    throw UsageError(e.what());
                }
            }
            if (!midlevel.empty()) o.midlevel = midlevel;
            if (!embeddings.empty()) o.embeddings = embeddings;
            app::validate(o);
            const auto summary = app::run_extract(o);
            for (const auto& [set, path] : summary.files) std::cout << path.string() << '\n';
            if (!summary.ok()) {
                std::cerr << summary.failures.size() << " clip(s) failed\n";
                return kExitFailure;
            }
        } else if (eval->parsed()) {
            app::EvalOptions o;
            o.manifest = manifest;
            o.annotations = annotations;
            o.out_dir = out;
            o.seed = seed;
            o.experiment = app::parse_experiment(experiment);
            for (const auto& item : split_list(features)) o.features.push_back(app::parse_feature_arg(item));
            if (!subset_pianist.empty()) o.subset_pianist = subset_pianist;
            const auto summary = app::run_evaluate(o);
            for (const auto& a : summary.artifacts) std::cout << (std::filesystem::path(out) / a).string() << '\n';
        } else if (synth->parsed()) {
            const auto summary = app::run_synthcorpus({out, seed, pieces, pianists});
            std::cout << summary.manifest.string() << '\n';
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
