#include "emoperf/stats/folds.hpp"

#include "emoperf/error.hpp"

#include <map>
#include <set>

namespace emoperf::stats {

std::string_view to_string(FoldKind kind) {
    switch (kind) {
        case FoldKind::piecewise: return "piecewise";
        case FoldKind::pianistwise: return "pianistwise";
        case FoldKind::loo: return "loo";
        case FoldKind::custom: return "custom";
    }
    return "?";
}

void FoldScheme::validate(std::span<const std::string> clip_ids) const {
    const std::set<std::string> all(clip_ids.begin(), clip_ids.end());
    std::set<std::string> tested;
    for (const auto& f : folds) {
        if (f.test.empty()) throw InputError("fold '" + f.label + "' has an empty test set");
        std::set<std::string> in_test;
        for (const auto& id : f.test) {
            if (!all.contains(id)) throw InputError("fold '" + f.label + "' tests unknown clip '" + id + "'");
            if (!tested.insert(id).second) throw InputError("clip '" + id + "' is tested in more than one fold");
            in_test.insert(id);
        }
        if (f.train.size() + f.test.size() != all.size()) {
            throw InputError("fold '" + f.label + "': train and test do not cover the clip set");
        }
        for (const auto& id : f.train) {
            if (in_test.contains(id) || !all.contains(id)) {
                throw InputError("fold '" + f.label + "': train set is not the complement of the test set");
            }
        }
    }
    if (tested.size() != all.size()) throw InputError("folds do not test every clip");
}

FoldScheme make_custom_folds(std::span<const ClipRecord* const> clips,
                             const std::function<std::string(const ClipRecord&)>& group_of) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::string>> members;
    for (const ClipRecord* c : clips) {
        const std::string g = group_of(*c);
        auto [it, inserted] = members.try_emplace(g);
        if (inserted) order.push_back(g);
        it->second.push_back(c->clip_id);
    }
    if (order.size() < 2) {
        throw InputError("cross-validation needs at least two groups, found " + std::to_string(order.size()));
    }
    FoldScheme scheme;
    scheme.kind = FoldKind::custom;
    for (const auto& g : order) {
        Fold fold;
        fold.label = g;
        fold.test = members[g];
        for (const ClipRecord* c : clips) {
            if (group_of(*c) != g) fold.train.push_back(c->clip_id);
        }
        scheme.folds.push_back(std::move(fold));
    }
    return scheme;
}

FoldScheme make_folds(std::span<const ClipRecord* const> clips, FoldKind kind) {
    FoldScheme scheme;
    switch (kind) {
        case FoldKind::piecewise:
            scheme = make_custom_folds(clips, [](const ClipRecord& c) { return c.piece_id; });
            break;
        case FoldKind::pianistwise:
            scheme = make_custom_folds(clips, [](const ClipRecord& c) { return c.pianist_id; });
            break;
        case FoldKind::loo:
            scheme = make_custom_folds(clips, [](const ClipRecord& c) { return c.clip_id; });
            break;
        case FoldKind::custom:
            throw InputError("custom folds need a grouping function (make_custom_folds)");
    }
    scheme.kind = kind;
    return scheme;
}

FoldScheme make_folds(std::span<const ClipRecord> clips, FoldKind kind) {
    std::vector<const ClipRecord*> ptrs;
    for (const auto& c : clips) ptrs.push_back(&c);
    return make_folds(std::span<const ClipRecord* const>(ptrs), kind);
}

}  // namespace emoperf::stats
