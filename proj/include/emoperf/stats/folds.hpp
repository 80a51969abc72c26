#pragma once

#include "emoperf/corpus.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emoperf::stats {

enum class FoldKind { piecewise, pianistwise, loo, custom };

std::string_view to_string(FoldKind kind);

struct Fold {
    std::string label;
    std::vector<std::string> train;
    std::vector<std::string> test;
};

struct FoldScheme {
    FoldKind kind = FoldKind::custom;
    std::vector<Fold> folds;

    /// Throws unless the test sets partition `clip_ids` and each train set is the complement.
    void validate(std::span<const std::string> clip_ids) const;
};

/// One fold per piece, per pianist, or per clip; groups in order of first appearance.
/// Throws InputError with fewer than two groups.
FoldScheme make_folds(std::span<const ClipRecord> clips, FoldKind kind);
FoldScheme make_folds(std::span<const ClipRecord* const> clips, FoldKind kind);
FoldScheme make_custom_folds(std::span<const ClipRecord* const> clips,
                             const std::function<std::string(const ClipRecord&)>& group_of);

}  // namespace emoperf::stats
