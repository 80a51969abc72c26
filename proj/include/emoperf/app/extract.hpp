#pragma once

#include "emoperf/corpus.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emoperf::app {

struct ExtractOptions {
    std::filesystem::path manifest;
    std::vector<FeatureSet> sets;
    std::filesystem::path out_dir;
    /// 7-column mid-level table, required for the midlevel set.
    std::optional<std::filesystem::path> midlevel;
    /// 512-column embedding table, required for deam_pca.
    std::optional<std::filesystem::path> embeddings;
    unsigned workers = 1;
};

struct ExtractSummary {
    std::map<FeatureSet, std::filesystem::path> files;
    std::size_t clips = 0;
    /// "clip_id (set): reason" for every skipped row.
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

/// "features_<set>.csv"
std::string feature_file_name(FeatureSet set);

/// Throws UsageError for an incomplete request before reading any audio.
void validate(const ExtractOptions& options);

/// Rows follow manifest order. Clips that fail are logged, skipped, and listed in the summary.
ExtractSummary run_extract(const ExtractOptions& options);

}  // namespace emoperf::app
