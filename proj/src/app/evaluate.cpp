#include "emoperf/app/evaluate.hpp"

#include "emoperf/csv.hpp"
#include "emoperf/error.hpp"
#include "emoperf/stats/cv.hpp"
#include "emoperf/stats/design.hpp"
#include "emoperf/stats/folds.hpp"
#include "emoperf/stats/lmm.hpp"
#include "emoperf/stats/ols.hpp"
#include "emoperf/stats/outliers.hpp"
#include "emoperf/stats/perf_variation.hpp"
#include "emoperf/stats/quadrants.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

namespace emoperf::app {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(Experiment e) { return kExperimentNames[static_cast<std::size_t>(e)]; }

Experiment parse_experiment(std::string_view name) {
    for (std::size_t i = 0; i < kExperimentNames.size(); ++i) {
        if (kExperimentNames[i] == name) return static_cast<Experiment>(i);
    }
    std::string valid;
    for (auto n : kExperimentNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw UsageError("unknown experiment '" + std::string(name) + "'; valid: " + valid);
}

std::pair<FeatureSet, fs::path> parse_feature_arg(std::string_view arg) {
    if (auto eq = arg.find('='); eq != std::string_view::npos) {
        try {
            return {parse_feature_set(arg.substr(0, eq)), fs::path(std::string(arg.substr(eq + 1)))};
        } catch (const InputError& e) {
            throw UsageError(e.what());
        }
    }
    const fs::path path{std::string(arg)};
    const std::string stem = path.stem().string();
    const std::string prefix = "features_";
    if (stem.rfind(prefix, 0) == 0) {
        try {
            return {parse_feature_set(stem.substr(prefix.size())), path};
        } catch (const InputError&) {
        }
    }
    throw UsageError("cannot tell the feature set of '" + std::string(arg) + "'; use set=path");
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Fnv {
    std::uint64_t h = 1469598103934665603ull;
    void add(std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        // Field separator so ("ab","c") and ("a","bc") differ.
        h ^= 0xff;
        h *= 1099511628211ull;
    }
};

std::string num(double v) { return std::isfinite(v) ? csv::format_real(v) : "NA"; }

// Collects one CSV artifact and its JSON twin.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Run {
    const EvalOptions& options;
    const Dataset& dataset;
    std::vector<FeatureSet> sets;
    std::string hash;
    EvalSummary summary;
    ordered_json report;
    std::ostringstream text;

    void warn(const std::string& msg) {
        spdlog::warn("{}", msg);
        summary.warnings.push_back(msg);
    }

    // Runs `f`; a fit that cannot be carried out on this data yields NA and a warning.
    template <class F>
    bool attempt(const std::string& what, F&& f) {
        try {
            f();
            return true;
        } catch (const Error& e) {
            warn(what + ": " + e.what());
            return false;
        }
    }

    void write(const std::string& name, const Table& t, const std::vector<std::string>& notes = {}) {
        std::ofstream out(options.out_dir / name, std::ios::binary);
        if (!out) throw InputError("cannot write " + (options.out_dir / name).string());
        out << "# config_hash=" << hash << " seed=" << options.seed << '\n';
        for (const auto& n : notes) out << "# " << n << '\n';
        out << csv::join_row(t.header) << '\n';
        for (const auto& r : t.rows) out << csv::join_row(r) << '\n';
        if (!out) throw InputError("failed writing " + name);
        summary.artifacts.push_back(name);

        text << name << '\n';
        std::vector<std::size_t> width(t.header.size(), 0);
        for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
        for (const auto& r : t.rows) {
            for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
        }
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t c = 0; c < r.size(); ++c) {
                text << "  " << r[c] << std::string(width[c] - r[c].size(), ' ');
            }
            text << '\n';
        };
        line(t.header);
        // Long per-clip tables are abbreviated; the CSV holds everything.
        constexpr std::size_t kShown = 12;
        for (std::size_t i = 0; i < t.rows.size() && i < kShown; ++i) line(t.rows[i]);
        if (t.rows.size() > kShown) text << "  ... " << t.rows.size() << " rows in total\n";
        for (const auto& n : notes) text << "  note: " << n << '\n';
        text << '\n';
    }

    std::vector<FeatureSet> audio_sets() const {
        std::vector<FeatureSet> out;
        for (FeatureSet s : sets) {
            if (s != FeatureSet::score) out.push_back(s);
        }
        return out;
    }

    static std::string label(FeatureSet s) { return std::string(display_name(s)); }

    void metrics_cells(std::vector<std::string>& row, const stats::Metrics* m) {
        row.push_back(m ? num(m->adj_r2) : "NA");
        row.push_back(m ? num(m->rmse) : "NA");
        row.push_back(m ? num(m->corr) : "NA");
    }

    static ordered_json metrics_json(const stats::Metrics& m) {
        return {{"adj_r2", m.adj_r2}, {"r2", m.r2}, {"rmse", m.rmse}, {"corr", std::isfinite(m.corr) ? ordered_json(m.corr) : ordered_json()},
                {"n", m.n}, {"p", m.p}};
    }

    // In-sample OLS metrics of one feature set on one dataset.
    std::optional<stats::Metrics> in_sample(const Dataset& ds, FeatureSet s, Target t) {
        std::optional<stats::Metrics> out;
        attempt(label(s) + " " + std::string(to_string(t)) + " fit", [&] {
            const stats::Design d = stats::make_design(ds, s, t);
            const stats::LinearModel model = stats::LinearModel::fit(d.X, d.y, d.names);
            out = stats::regression_metrics(d.y, model.predict(d.X), d.predictors());
        });
        return out;
    }

    Table fit_table(const Dataset& ds, ordered_json& js) {
        Table t{{"feature_set", "arousal_adj_r2", "arousal_rmse", "arousal_corr", "valence_adj_r2", "valence_rmse",
                 "valence_corr"},
                {}};
        for (FeatureSet s : sets) {
            std::vector<std::string> row{label(s)};
            ordered_json entry;
            for (Target target : kAllTargets) {
                const auto m = in_sample(ds, s, target);
                metrics_cells(row, m ? &*m : nullptr);
                entry[std::string(to_string(target))] = m ? metrics_json(*m) : ordered_json();
            }
            js[std::string(to_string(s))] = entry;
            t.rows.push_back(std::move(row));
        }
        return t;
    }

    void experiment_fit() {
        std::string pianist;
        if (options.subset_pianist) {
            pianist = *options.subset_pianist;
        } else if (!dataset.clips().empty()) {
            pianist = dataset.clips().front().pianist_id;
        }
        ordered_json subset_js;
        std::vector<std::string> notes{"single-performer regression, pianist=" + pianist +
                                       ", targets re-standardized within the subset"};
        Table t5{{"feature_set"}, {}};
        bool ok = attempt("subset pianist '" + pianist + "'", [&] {
            const Dataset sub = dataset.filter([&](const ClipRecord& c) { return c.pianist_id == pianist; }, true);
            if (sub.targets().empty()) throw InputError("no rated clips for this pianist");
            notes.push_back("n=" + std::to_string(sub.targets().size()));
            t5 = fit_table(sub, subset_js);
        });
        if (!ok) {
            t5 = Table{{"feature_set", "arousal_adj_r2", "arousal_rmse", "arousal_corr", "valence_adj_r2",
                        "valence_rmse", "valence_corr"},
                       {}};
            for (FeatureSet s : sets) t5.rows.push_back({label(s), "NA", "NA", "NA", "NA", "NA", "NA"});
        }
        report["table5_subset"] = {{"pianist", pianist}, {"results", subset_js}};
        write("table5_subset.csv", t5, notes);

        ordered_json full_js;
        write("table6a_fit.csv", fit_table(dataset, full_js), {"in-sample OLS on all rated clips"});
        report["table6a_fit"] = full_js;
    }

    void experiment_cv() {
        const stats::FoldKind kinds[] = {stats::FoldKind::piecewise, stats::FoldKind::pianistwise, stats::FoldKind::loo};
        Table t{{"feature_set"}, {}};
        for (const char* suffix : {"", "_foldmean"}) {
            for (auto k : kinds) {
                for (const char* tl : {"A", "V"}) t.header.push_back(std::string(to_string(k)) + "_" + tl + suffix);
            }
        }
        ordered_json js;
        for (FeatureSet s : sets) {
            std::vector<std::string> pooled{label(s)}, foldmean;
            ordered_json entry;
            const FeatureSet one[] = {s};
            const auto clips = dataset.usable_clips(one);
            for (auto k : kinds) {
                for (Target target : kAllTargets) {
                    std::optional<stats::CvResult> r;
                    attempt(label(s) + " " + std::string(to_string(target)) + " " + std::string(to_string(k)) + " cv", [&] {
                        const auto scheme = stats::make_folds(std::span<const ClipRecord* const>(clips), k);
                        r = stats::cross_validate(dataset, s, target, scheme);
                    });
                    pooled.push_back(r ? num(r->pooled.adj_r2) : "NA");
                    foldmean.push_back(r ? num(r->mean_fold_adj_r2) : "NA");
                    if (r) {
                        entry[std::string(to_string(k))][std::string(to_string(target))] = {
                            {"pooled", metrics_json(r->pooled)},
                            {"mean_fold_adj_r2", std::isfinite(r->mean_fold_adj_r2) ? ordered_json(r->mean_fold_adj_r2)
                                                                                     : ordered_json()},
                            {"folds", r->folds.size()},
                            {"folds_with_adj_r2", r->folds_with_adj_r2}};
                    }
                }
            }
            pooled.insert(pooled.end(), foldmean.begin(), foldmean.end());
            t.rows.push_back(std::move(pooled));
            js[std::string(to_string(s))] = entry;
        }
        report["table6b_cv"] = js;
        write("table6b_cv.csv", t,
              {"adjusted R^2 of pooled out-of-fold predictions; _foldmean columns average per-fold adjusted R^2 "
               "over folds where it is defined"});
    }

    void experiment_importance() {
        const std::vector<FeatureSet> audio = audio_sets();
        Table t{{"target", "rank", "feature", "feature_set", "t", "abs_t", "p_value", "significant"}, {}};
        ordered_json js;
        if (audio.empty()) {
            warn("importance: no audio-based feature sets supplied");
        }
        for (Target target : kAllTargets) {
            if (audio.empty()) break;
            attempt("importance " + std::string(to_string(target)), [&] {
                const stats::Design d = stats::make_design(dataset, audio, target);
                std::vector<std::string> set_of;
                for (FeatureSet s : audio) {
                    for (std::size_t i = 0; i < dataset.feature_names(s).size(); ++i) set_of.emplace_back(to_string(s));
                }
                const stats::LinearModel model = stats::LinearModel::fit(d.X, d.y, d.names);
                const auto ranked = stats::t_importance(model.ols, d.names);
                ordered_json list = ordered_json::array();
                for (std::size_t i = 0; i < ranked.size(); ++i) {
                    const auto& imp = ranked[i];
                    const auto pos = static_cast<std::size_t>(std::find(d.names.begin(), d.names.end(), imp.name) - d.names.begin());
                    const bool sig = imp.p_value < 0.05;
                    t.rows.push_back({std::string(to_string(target)), std::to_string(i + 1), imp.name, set_of[pos],
                                      num(imp.t), num(imp.abs_t), num(imp.p_value), sig ? "1" : "0"});
                    list.push_back({{"feature", imp.name}, {"t", imp.t}, {"p_value", imp.p_value}});
                }
                js[std::string(to_string(target))] = list;
            });
        }
        std::string used;
        for (FeatureSet s : audio) used += (used.empty() ? "" : "+") + std::string(to_string(s));
        report["fig2_tstats"] = js;
        write("fig2_tstats.csv", t, {"joint OLS on " + (used.empty() ? std::string("(none)") : used) +
                                         "; significant = two-sided p < 0.05"});
    }

    void experiment_piecewise() {
        Table t{{"feature_set", "arousal", "valence", "arousal_var_random", "arousal_var_residual",
                 "arousal_log_likelihood", "valence_var_random", "valence_var_residual", "valence_log_likelihood"},
                {}};
        ordered_json js;
        for (FeatureSet s : sets) {
            std::vector<std::string> head{label(s)}, tail;
            ordered_json entry;
            for (Target target : kAllTargets) {
                std::optional<stats::MixedModelReport> r;
                attempt(label(s) + " " + std::string(to_string(target)) + " mixed model", [&] {
                    r = stats::lmm_random_intercept(stats::make_design(dataset, s, target));
                });
                head.push_back(r ? num(r->e_random) : "NA");
                tail.push_back(r ? num(r->var_random) : "NA");
                tail.push_back(r ? num(r->var_residual) : "NA");
                tail.push_back(r ? num(r->log_likelihood) : "NA");
                if (r) {
                    static const char* kBoundary[] = {"interior", "lower", "upper"};
                    entry[std::string(to_string(target))] = {{"e_random", r->e_random},
                                                             {"var_random", r->var_random},
                                                             {"var_residual", r->var_residual},
                                                             {"log_likelihood", r->log_likelihood},
                                                             {"boundary", kBoundary[static_cast<int>(r->boundary)]},
                                                             {"groups", r->groups}};
                    if (r->boundary == stats::MixedModelReport::Boundary::upper) {
                        warn(label(s) + " " + std::string(to_string(target)) + " mixed model: variance ratio at the upper search bound");
                    }
                }
            }
            head.insert(head.end(), tail.begin(), tail.end());
            t.rows.push_back(std::move(head));
            js[std::string(to_string(s))] = entry;
        }
        report["table7_lmm"] = js;
        write("table7_lmm.csv", t,
              {"E_random = var_random / (var_random + var_residual); random intercept per piece, maximum likelihood"});
    }

    void experiment_perfwise() {
        Table t{{"feature_set", "arousal_fvu", "arousal_corr", "arousal_frac_p_lt_0.1", "valence_fvu", "valence_corr",
                 "valence_frac_p_lt_0.1"},
                {}};
        ordered_json js;
        for (FeatureSet s : audio_sets()) {
            std::vector<std::string> row{label(s)};
            ordered_json entry;
            for (Target target : kAllTargets) {
                std::optional<stats::PerfVariationReport> r;
                attempt(label(s) + " " + std::string(to_string(target)) + " performance variation",
                        [&] { r = stats::performance_variation_eval(dataset, s, target); });
                row.push_back(r ? num(r->fvu_mean) : "NA");
                row.push_back(r ? num(r->corr_mean) : "NA");
                row.push_back(r ? num(r->fraction_significant) : "NA");
                if (r) {
                    for (const auto& w : r->warnings) warn(label(s) + " " + std::string(to_string(target)) + ": " + w);
                    ordered_json pieces = ordered_json::array();
                    for (const auto& p : r->pieces) {
                        pieces.push_back({{"piece_id", p.piece_id},
                                          {"n", p.n},
                                          {"fvu", p.fvu},
                                          {"corr", p.corr ? ordered_json(*p.corr) : ordered_json()},
                                          {"p_value", p.p_value ? ordered_json(*p.p_value) : ordered_json()},
                                          {"significant", p.significant}});
                    }
                    entry[std::string(to_string(target))] = {{"fvu_mean", r->fvu_mean},
                                                             {"corr_mean", r->corr_mean},
                                                             {"fraction_significant", r->fraction_significant},
                                                             {"excluded", r->excluded},
                                                             {"pieces", pieces}};
                }
            }
            t.rows.push_back(std::move(row));
            js[std::string(to_string(s))] = entry;
        }
        report["table8_perfwise"] = js;
        write("table8_perfwise.csv", t,
              {"leave-one-piece-out; FVU about each piece's own mean; correlation p-values two-sided, alpha 0.1",
               "score features are excluded: their predictions are constant within a piece"});
    }

    void experiment_outliers() {
        std::optional<stats::OutlierSplit> split;
        attempt("outlier split", [&] { split = stats::outlier_split(dataset); });
        Table t{{"feature_set", "arousal_adj_r2", "valence_adj_r2", "n_train", "n_test"}, {}};
        Table counts{{"pianist_id", "outlier_count"}, {}};
        ordered_json js;
        if (split) {
            for (FeatureSet s : sets) {
                std::optional<stats::OutlierReport> r;
                attempt(label(s) + " outlier regression", [&] { r = stats::outlier_experiment(dataset, s, *split); });
                t.rows.push_back({label(s), r ? num(r->arousal.adj_r2) : "NA", r ? num(r->valence.adj_r2) : "NA",
                                  r ? std::to_string(r->n_train) : "NA", r ? std::to_string(r->n_test) : "NA"});
                if (r) {
                    js[std::string(to_string(s))] = {{"arousal", metrics_json(r->arousal)},
                                                     {"valence", metrics_json(r->valence)}};
                }
            }
            std::vector<std::string> pianists;
            for (const auto& c : dataset.clips()) {
                if (std::find(pianists.begin(), pianists.end(), c.pianist_id) == pianists.end()) pianists.push_back(c.pianist_id);
            }
            for (const auto& p : pianists) {
                auto it = split->pianist_counts.find(p);
                counts.rows.push_back({p, std::to_string(it == split->pianist_counts.end() ? 0 : it->second)});
            }
            report["fig7_outliers"] = {{"results", js},
                                       {"outlier_of_piece", split->outlier_of_piece},
                                       {"n_train", split->train.size()},
                                       {"n_test", split->test.size()}};
        }
        write("fig7_outliers.csv", t, {"train on inliers, adjusted R^2 on the one MCD outlier per piece"});
        write("fig7_outlier_pianists.csv", counts, {"number of pieces for which each pianist is the outlier"});
    }

    void experiment_classify() {
        Table t{{"feature_set", "loo_accuracy", "baseline", "n", "happy", "relaxed", "sad", "angry"}, {}};
        ordered_json js;
        for (FeatureSet s : sets) {
            std::optional<stats::ClassificationReport> r;
            attempt(label(s) + " quadrant classification", [&] { r = stats::classify_quadrants(dataset, s); });
            std::vector<std::string> row{label(s), r ? num(r->loo_accuracy) : "NA", num(stats::kChanceAccuracy),
                                         r ? std::to_string(r->n) : "NA"};
            for (std::size_t q = 0; q < 4; ++q) row.push_back(r ? std::to_string(r->class_counts[q]) : "NA");
            t.rows.push_back(std::move(row));
            if (r) js[std::string(to_string(s))] = {{"loo_accuracy", r->loo_accuracy}, {"n", r->n}};
        }
        report["fig8_classify"] = js;
        write("fig8_classify.csv", t,
              {"quadrants split at the standardized origin; chance baseline 0.25"});
    }

    void distributions() {
        Table t{{"piece_id", "pianist_id", "clip_id", "arousal_mean", "valence_mean", "arousal_z", "valence_z", "quadrant"},
                {}};
        for (const ClipRecord* c : dataset.usable_clips({})) {
            const EmotionTarget* e = dataset.target(c->clip_id);
            t.rows.push_back({c->piece_id, c->pianist_id, c->clip_id, num(e->arousal_mean), num(e->valence_mean),
                              num(e->arousal_z), num(e->valence_z),
                              std::string(stats::to_string(stats::quadrantize(e->arousal_z, e->valence_z)))});
        }
        write("fig1_distributions.csv", t, {"mean ratings per performance, grouped by piece"});
    }
};

}  // namespace

std::string config_hash(const EvalOptions& o) {
    Fnv f;
    f.add(read_file(o.manifest));
    f.add(read_file(o.annotations));
    auto features = o.features;
    std::stable_sort(features.begin(), features.end(),
                     [](const auto& a, const auto& b) { return static_cast<int>(a.first) < static_cast<int>(b.first); });
    for (const auto& [set, path] : features) {
        f.add(to_string(set));
        f.add(read_file(path));
    }
    f.add(to_string(o.experiment));
    f.add(std::to_string(o.seed));
    f.add(o.subset_pianist.value_or(""));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
    return buf;
}

EvalSummary run_evaluate(const EvalOptions& options) {
    if (options.features.empty()) throw UsageError("no feature tables given (--features)");
    for (const auto& [set, path] : options.features) {
        if (!fs::exists(path)) throw UsageError("feature table not found: " + path.string());
    }
    for (const auto& p : {options.manifest, options.annotations}) {
        if (!fs::exists(p)) throw UsageError("input not found: " + p.string());
    }

    std::vector<ClipRecord> clips = load_manifest(options.manifest);
    TargetMap targets = load_annotations(options.annotations, clips);
    std::vector<FeatureTable> tables;
    std::vector<FeatureSet> sets;
    for (const auto& [set, path] : options.features) {
        if (std::find(sets.begin(), sets.end(), set) != sets.end()) {
            throw UsageError("feature set " + std::string(to_string(set)) + " given twice");
        }
        sets.push_back(set);
        tables.push_back(load_feature_table(path, set));
    }
    AssemblyReport assembly;
    const Dataset dataset = assemble(std::move(clips), std::move(targets), tables, &assembly);

    fs::create_directories(options.out_dir);
    Run run{options, dataset, {}, config_hash(options), {}, {}, {}};
    for (FeatureSet s : kAllFeatureSets) {
        if (dataset.has(s)) run.sets.push_back(s);
    }
    for (const auto& w : assembly.warnings) run.warn(w);
    run.summary.config_hash = run.hash;

    run.text << "emoperf evaluation\n"
             << "config_hash " << run.hash << "  seed " << options.seed << "  experiment "
             << to_string(options.experiment) << "\n"
             << "clips " << dataset.clips().size() << "  rated " << dataset.targets().size() << "\n";
    for (FeatureSet s : run.sets) {
        run.text << "  " << display_name(s) << ": " << dataset.feature_names(s).size() << " features, "
                 << dataset.coverage(s) << " clips\n";
    }
    run.text << '\n';

    const Experiment e = options.experiment;
    auto selected = [&](Experiment x) { return e == Experiment::all || e == x; };
    if (e == Experiment::all) run.distributions();
    if (selected(Experiment::fit)) run.experiment_fit();
    if (selected(Experiment::cv)) run.experiment_cv();
    if (selected(Experiment::importance)) run.experiment_importance();
    if (selected(Experiment::piecewise)) run.experiment_piecewise();
    if (selected(Experiment::perfwise)) run.experiment_perfwise();
    if (selected(Experiment::outliers)) run.experiment_outliers();
    if (selected(Experiment::classify)) run.experiment_classify();

    ordered_json coverage;
    for (FeatureSet s : run.sets) coverage[std::string(to_string(s))] = dataset.coverage(s);
    ordered_json inputs = {{"manifest", options.manifest.filename().string()},
                           {"annotations", options.annotations.filename().string()}};
    for (const auto& [set, path] : options.features) inputs["features"][std::string(to_string(set))] = path.filename().string();
    ordered_json doc = {{"config_hash", run.hash},
                        {"seed", options.seed},
                        {"experiment", to_string(options.experiment)},
                        {"inputs", inputs},
                        {"clips", dataset.clips().size()},
                        {"rated", dataset.targets().size()},
                        {"coverage", coverage}};
    for (auto& [k, v] : run.report.items()) doc[k] = v;
    doc["warnings"] = run.summary.warnings;
    doc["artifacts"] = run.summary.artifacts;
    {
        std::ofstream out(options.out_dir / "report.json", std::ios::binary);
        out << doc.dump(2) << '\n';
        if (!out) throw InputError("failed writing report.json");
    }
    if (!run.summary.warnings.empty()) {
        run.text << "warnings\n";
        for (const auto& w : run.summary.warnings) run.text << "  " << w << '\n';
    }
    {
        std::ofstream out(options.out_dir / "summary.txt", std::ios::binary);
        out << run.text.str();
        if (!out) throw InputError("failed writing summary.txt");
    }
    run.summary.artifacts.push_back("report.json");
    run.summary.artifacts.push_back("summary.txt");
    return run.summary;
}

}  // namespace emoperf::app
