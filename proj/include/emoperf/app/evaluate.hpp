#pragma once

#include "emoperf/corpus.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emoperf::app {

enum class Experiment { fit, cv, importance, piecewise, perfwise, outliers, classify, all };

inline constexpr std::array<std::string_view, 8> kExperimentNames = {
    "fit", "cv", "importance", "piecewise", "perfwise", "outliers", "classify", "all"};

std::string_view to_string(Experiment e);
/// Throws UsageError listing the valid names.
Experiment parse_experiment(std::string_view name);

struct EvalOptions {
    std::filesystem::path manifest;
    std::filesystem::path annotations;
    std::vector<std::pair<FeatureSet, std::filesystem::path>> features;
    Experiment experiment = Experiment::all;
    std::filesystem::path out_dir;
    std::uint64_t seed = 7;
    /// Pianist for the single-performer regression table; defaults to the first in manifest order.
    std::optional<std::string> subset_pianist;
};

/// "set=path" or a bare path named features_<set>.csv.
std::pair<FeatureSet, std::filesystem::path> parse_feature_arg(std::string_view arg);

struct EvalSummary {
    std::string config_hash;
    /// File names written into out_dir, in writing order.
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
};

/// FNV-1a over the input file contents and the run settings (not the output location).
std::string config_hash(const EvalOptions& options);

EvalSummary run_evaluate(const EvalOptions& options);

}  // namespace emoperf::app
