#include "emoperf/corpus.hpp"

#include "emoperf/csv.hpp"
#include "emoperf/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

namespace emoperf {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string row_context(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ": row " + std::to_string(line);
}

std::size_t require_column(const csv::Table& table, std::string_view name, const std::filesystem::path& path) {
    if (auto idx = table.column(name)) return *idx;
    throw InputError(path.string() + ": missing required column '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(FeatureSet set) {
    switch (set) {
        case FeatureSet::lowlevel: return "lowlevel";
        case FeatureSet::score: return "score";
        case FeatureSet::midlevel: return "midlevel";
        case FeatureSet::deam_pca: return "deam_pca";
    }
    return "?";
}

std::string_view display_name(FeatureSet set) {
    switch (set) {
        case FeatureSet::lowlevel: return "Low-level";
        case FeatureSet::score: return "Score";
        case FeatureSet::midlevel: return "Mid-level";
        case FeatureSet::deam_pca: return "DEAMResNet";
    }
    return "?";
}

std::string_view to_string(Target target) { return target == Target::arousal ? "arousal" : "valence"; }

std::string_view to_string(Mode mode) { return mode == Mode::major ? "major" : "minor"; }

FeatureSet parse_feature_set(std::string_view name) {
    const std::string n = lower(name);
    if (n == "lowlevel") return FeatureSet::lowlevel;
    if (n == "score") return FeatureSet::score;
    if (n == "midlevel") return FeatureSet::midlevel;
    if (n == "deam_pca") return FeatureSet::deam_pca;
    throw InputError("unknown feature set '" + std::string(name) + "' (valid: lowlevel, score, midlevel, deam_pca)");
}

Mode parse_mode(std::string_view name) {
    const std::string n = lower(name);
    if (n == "major") return Mode::major;
    if (n == "minor") return Mode::minor;
    throw InputError("unknown mode '" + std::string(name) + "' (valid: major, minor)");
}

TimeSignature TimeSignature::parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) throw InputError("malformed time signature '" + std::string(text) + "'");
    TimeSignature ts;
    ts.numerator = static_cast<int>(csv::parse_int(text.substr(0, slash), "time signature numerator"));
    ts.denominator = static_cast<int>(csv::parse_int(text.substr(slash + 1), "time signature denominator"));
    const int d = ts.denominator;
    if (ts.numerator < 1 || !(d == 1 || d == 2 || d == 4 || d == 8 || d == 16)) {
        throw InputError("malformed time signature '" + std::string(text) + "'");
    }
    return ts;
}

std::string TimeSignature::str() const { return std::to_string(numerator) + "/" + std::to_string(denominator); }

void FeatureVector::validate() const {
    if (names.size() != values.size()) {
        throw InputError("feature vector for clip '" + clip_id + "': " + std::to_string(names.size()) + " names but " +
                         std::to_string(values.size()) + " values");
    }
    std::set<std::string_view> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second) {
            throw InputError("feature vector for clip '" + clip_id + "' names feature '" + name + "' twice");
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InputError("feature '" + names[i] + "' of clip '" + clip_id + "' is not finite");
        }
    }
}

std::vector<FeatureVector> FeatureTable::vectors() const {
    std::vector<FeatureVector> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out.push_back({clip_ids[i], set, names, rows[i]});
    return out;
}

std::vector<ClipRecord> load_manifest(const std::filesystem::path& path) {
    const csv::Table table = csv::read(path);
    const auto c_clip = require_column(table, "clip_id", path);
    const auto c_piece = require_column(table, "piece_id", path);
    const auto c_pianist = require_column(table, "pianist_id", path);
    const auto c_audio = require_column(table, "audio_path", path);
    const auto c_score = require_column(table, "score_path", path);
    const auto c_ts = require_column(table, "time_sig", path);
    const auto c_key = require_column(table, "key", path);
    const auto c_mode = require_column(table, "mode", path);

    const std::filesystem::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() || base.empty() ? fp : base / fp;
    };

    std::vector<ClipRecord> clips;
    std::map<std::string, std::size_t> ids;
    std::set<std::pair<std::string, std::string>> pairs;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = row_context(path, table.line_numbers[r]);
        ClipRecord clip;
        clip.clip_id = row[c_clip];
        clip.piece_id = row[c_piece];
        clip.pianist_id = row[c_pianist];
        if (clip.clip_id.empty() || clip.piece_id.empty() || clip.pianist_id.empty()) {
            throw InputError(where + ": clip_id, piece_id and pianist_id must be non-empty");
        }
        if (row[c_audio].empty()) throw InputError(where + ": empty audio_path");
        clip.audio_path = resolve(row[c_audio]);
        if (!row[c_score].empty()) clip.score_path = resolve(row[c_score]);
        try {
            clip.time_signature = TimeSignature::parse(row[c_ts]);
            clip.notated_mode = parse_mode(row[c_mode]);
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
        clip.notated_key = row[c_key];
        if (auto [it, inserted] = ids.emplace(clip.clip_id, table.line_numbers[r]); !inserted) {
            throw InputError(where + ": duplicate clip_id '" + clip.clip_id + "' (first seen at row " +
                             std::to_string(it->second) + ")");
        }
        if (!pairs.emplace(clip.piece_id, clip.pianist_id).second) {
            throw InputError(where + ": duplicate (piece_id, pianist_id) pair (" + clip.piece_id + ", " +
                             clip.pianist_id + ")");
        }
        clips.push_back(std::move(clip));
    }
    return clips;
}

void write_manifest(const std::filesystem::path& path, std::span<const ClipRecord> clips) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    const std::filesystem::path base = path.parent_path();
    auto rel = [&](const std::filesystem::path& p) {
        return base.empty() ? p.generic_string() : p.lexically_relative(base).generic_string();
    };
    out << "clip_id,piece_id,pianist_id,audio_path,score_path,time_sig,key,mode\n";
    for (const auto& c : clips) {
        out << csv::join_row({c.clip_id, c.piece_id, c.pianist_id, rel(c.audio_path),
                              c.score_path ? rel(*c.score_path) : std::string(), c.time_signature.str(), c.notated_key,
                              std::string(to_string(c.notated_mode))})
            << '\n';
    }
}

void standardize(TargetMap& targets) {
    if (targets.empty()) return;
    const double n = static_cast<double>(targets.size());
    auto column = [&](auto get, auto set, const char* label) {
        double mean = 0.0;
        for (const auto& [id, t] : targets) mean += get(t);
        mean /= n;
        double var = 0.0;
        for (const auto& [id, t] : targets) var += (get(t) - mean) * (get(t) - mean);
        var /= n;
        const double sd = std::sqrt(var);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            throw NumericalError(std::string(label) + ": zero variance, cannot standardize");
        }
        for (auto& [id, t] : targets) set(t, (get(t) - mean) / sd);
    };
    column([](const EmotionTarget& t) { return t.arousal_mean; }, [](EmotionTarget& t, double z) { t.arousal_z = z; },
           "arousal");
    column([](const EmotionTarget& t) { return t.valence_mean; }, [](EmotionTarget& t, double z) { t.valence_z = z; },
           "valence");
}

TargetMap load_annotations(const std::filesystem::path& path, std::span<const ClipRecord> clips) {
    const csv::Table table = csv::read(path);
    std::set<std::string_view> known;
    for (const auto& c : clips) known.insert(c.clip_id);

    const auto c_clip = require_column(table, "clip_id", path);
    const bool per_rater = table.column("rater_id").has_value();
    const bool aggregated = table.column("arousal_mean").has_value();
    if (per_rater == aggregated) {
        throw InputError(path.string() +
                         ": header must be clip_id,rater_id,arousal,valence or clip_id,arousal_mean,valence_mean");
    }

    auto check_ranges = [](double a, double v, const std::string& where) {
        if (a < kArousalMin || a > kArousalMax) {
            throw InputError(where + ": arousal " + csv::format_real(a) + " outside [0, 100]");
        }
        if (v < kValenceMin || v > kValenceMax) {
            throw InputError(where + ": valence " + csv::format_real(v) + " outside [-5, 5]");
        }
    };

    TargetMap targets;
    if (per_rater) {
        const auto c_a = require_column(table, "arousal", path);
        const auto c_v = require_column(table, "valence", path);
        struct Sum {
            double a = 0.0, v = 0.0;
            int n = 0;
        };
        std::map<std::string, Sum> sums;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::string where = row_context(path, table.line_numbers[r]);
            if (!known.contains(row[c_clip])) throw InputError(where + ": clip_id '" + row[c_clip] + "' not in manifest");
            const double a = csv::parse_real(row[c_a], where + " arousal");
            const double v = csv::parse_real(row[c_v], where + " valence");
            check_ranges(a, v, where);
            auto& s = sums[row[c_clip]];
            s.a += a;
            s.v += v;
            ++s.n;
        }
        for (const auto& [id, s] : sums) {
            EmotionTarget t;
            t.clip_id = id;
            t.arousal_mean = s.a / s.n;
            t.valence_mean = s.v / s.n;
            t.n_raters = s.n;
            targets.emplace(id, t);
        }
    } else {
        const auto c_a = require_column(table, "arousal_mean", path);
        const auto c_v = require_column(table, "valence_mean", path);
        const auto c_n = table.column("n_raters");
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::string where = row_context(path, table.line_numbers[r]);
            if (!known.contains(row[c_clip])) throw InputError(where + ": clip_id '" + row[c_clip] + "' not in manifest");
            EmotionTarget t;
            t.clip_id = row[c_clip];
            t.arousal_mean = csv::parse_real(row[c_a], where + " arousal_mean");
            t.valence_mean = csv::parse_real(row[c_v], where + " valence_mean");
            check_ranges(t.arousal_mean, t.valence_mean, where);
            t.n_raters = c_n ? static_cast<int>(csv::parse_int(row[*c_n], where + " n_raters")) : 1;
            if (t.n_raters <= 0) throw InputError(where + ": clip '" + t.clip_id + "' has zero ratings");
            if (!targets.emplace(t.clip_id, t).second) {
                throw InputError(where + ": duplicate aggregated row for clip '" + t.clip_id + "'");
            }
        }
    }
    standardize(targets);
    return targets;
}

void save_targets(const std::filesystem::path& path, const TargetMap& targets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "clip_id,arousal_mean,valence_mean,arousal_z,valence_z,n_raters\n";
    for (const auto& [id, t] : targets) {
        out << csv::join_row({id, csv::format_real(t.arousal_mean), csv::format_real(t.valence_mean),
                              csv::format_real(t.arousal_z), csv::format_real(t.valence_z), std::to_string(t.n_raters)})
            << '\n';
    }
}

TargetMap load_targets(const std::filesystem::path& path) {
    const csv::Table table = csv::read(path);
    const auto c_clip = require_column(table, "clip_id", path);
    const auto c_a = require_column(table, "arousal_mean", path);
    const auto c_v = require_column(table, "valence_mean", path);
    const auto c_az = require_column(table, "arousal_z", path);
    const auto c_vz = require_column(table, "valence_z", path);
    const auto c_n = require_column(table, "n_raters", path);
    TargetMap targets;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = row_context(path, table.line_numbers[r]);
        EmotionTarget t;
        t.clip_id = row[c_clip];
        t.arousal_mean = csv::parse_real(row[c_a], where);
        t.valence_mean = csv::parse_real(row[c_v], where);
        t.arousal_z = csv::parse_real(row[c_az], where);
        t.valence_z = csv::parse_real(row[c_vz], where);
        t.n_raters = static_cast<int>(csv::parse_int(row[c_n], where));
        if (!targets.emplace(t.clip_id, t).second) throw InputError(where + ": duplicate clip '" + t.clip_id + "'");
    }
    return targets;
}

FeatureTable load_feature_table(const std::filesystem::path& path, FeatureSet set) {
    const csv::Table table = csv::read(path);
    if (table.header.empty() || table.header.front() != "clip_id") {
        throw InputError(path.string() + ": first column must be clip_id");
    }
    FeatureTable out;
    out.set = set;
    out.names.assign(table.header.begin() + 1, table.header.end());
    std::set<std::string_view> seen_names;
    for (const auto& n : out.names) {
        if (n.empty()) throw InputError(path.string() + ": empty feature name in header");
        if (!seen_names.insert(n).second) throw InputError(path.string() + ": feature '" + n + "' named twice");
    }
    std::set<std::string> seen_clips;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = row_context(path, table.line_numbers[r]);
        if (!seen_clips.insert(row[0]).second) throw InputError(where + ": duplicate clip '" + row[0] + "'");
        std::vector<double> values;
        values.reserve(out.names.size());
        for (std::size_t c = 1; c < row.size(); ++c) {
            values.push_back(csv::parse_real(row[c], where + " column '" + table.header[c] + "'"));
        }
        out.clip_ids.push_back(row[0]);
        out.rows.push_back(std::move(values));
    }
    return out;
}

void save_feature_table(const std::filesystem::path& path, const FeatureTable& table,
                        std::span<const std::string> preamble) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    for (const auto& line : preamble) out << "# " << line << '\n';
    std::vector<std::string> header{"clip_id"};
    header.insert(header.end(), table.names.begin(), table.names.end());
    out << csv::join_row(header) << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::vector<std::string> fields{table.clip_ids[r]};
        for (double v : table.rows[r]) fields.push_back(csv::format_real(v));
        out << csv::join_row(fields) << '\n';
    }
}

const ClipRecord* Dataset::clip(const std::string& clip_id) const {
    auto it = clip_index_.find(clip_id);
    return it == clip_index_.end() ? nullptr : &clips_[it->second];
}

const EmotionTarget* Dataset::target(const std::string& clip_id) const {
    auto it = targets_.find(clip_id);
    return it == targets_.end() ? nullptr : &it->second;
}

const FeatureVector* Dataset::features(const std::string& clip_id, FeatureSet set) const {
    auto it = features_.find({clip_id, set});
    return it == features_.end() ? nullptr : &it->second;
}

std::vector<FeatureSet> Dataset::feature_sets() const {
    std::vector<FeatureSet> out;
    for (FeatureSet s : kAllFeatureSets) {
        if (has(s)) out.push_back(s);
    }
    return out;
}

const std::vector<std::string>& Dataset::feature_names(FeatureSet set) const {
    auto it = names_.find(set);
    if (it == names_.end()) throw InputError("dataset has no feature set '" + std::string(to_string(set)) + "'");
    return it->second;
}

std::size_t Dataset::coverage(FeatureSet set) const {
    std::size_t n = 0;
    for (const auto& c : clips_) n += features_.contains({c.clip_id, set}) ? 1 : 0;
    return n;
}

std::vector<const ClipRecord*> Dataset::usable_clips(std::span<const FeatureSet> sets) const {
    std::vector<const ClipRecord*> out;
    for (const auto& c : clips_) {
        if (!targets_.contains(c.clip_id)) continue;
        bool ok = true;
        for (FeatureSet s : sets) ok = ok && features_.contains({c.clip_id, s});
        if (ok) out.push_back(&c);
    }
    return out;
}

Dataset Dataset::filter(const std::function<bool(const ClipRecord&)>& keep, bool restandardize) const {
    Dataset out;
    for (const auto& c : clips_) {
        if (!keep(c)) continue;
        out.clip_index_.emplace(c.clip_id, out.clips_.size());
        out.clips_.push_back(c);
        if (auto t = targets_.find(c.clip_id); t != targets_.end()) out.targets_.insert(*t);
    }
    for (const auto& [key, vec] : features_) {
        if (out.clip_index_.contains(key.first)) out.features_.emplace(key, vec);
    }
    for (const auto& [set, names] : names_) {
        if (out.coverage(set) > 0) out.names_.emplace(set, names);
    }
    if (restandardize) standardize(out.targets_);
    return out;
}

Dataset assemble(std::vector<ClipRecord> clips, TargetMap targets, std::span<const FeatureVector> vectors,
                 AssemblyReport* report) {
    Dataset ds;
    ds.clips_ = std::move(clips);
    for (std::size_t i = 0; i < ds.clips_.size(); ++i) {
        if (!ds.clip_index_.emplace(ds.clips_[i].clip_id, i).second) {
            throw InputError("duplicate clip_id '" + ds.clips_[i].clip_id + "' in manifest");
        }
    }
    for (const auto& [id, t] : targets) {
        if (!ds.clip_index_.contains(id)) throw InputError("target for clip '" + id + "' absent from manifest");
    }
    ds.targets_ = std::move(targets);

    for (const auto& v : vectors) {
        v.validate();
        if (!ds.clip_index_.contains(v.clip_id)) {
            throw InputError("feature set '" + std::string(to_string(v.set)) + "' has clip '" + v.clip_id +
                             "' absent from manifest");
        }
        auto [names_it, first] = ds.names_.emplace(v.set, v.names);
        if (!first && names_it->second != v.names) {
            throw InputError("non-rectangular feature set '" + std::string(to_string(v.set)) + "': clip '" + v.clip_id +
                             "' has a different feature list");
        }
        if (!ds.features_.emplace(std::pair{v.clip_id, v.set}, v).second) {
            throw InputError("clip '" + v.clip_id + "' appears twice in feature set '" + std::string(to_string(v.set)) +
                             "'");
        }
    }

    if (report) {
        report->coverage.clear();
        for (FeatureSet s : ds.feature_sets()) {
            const std::size_t n = ds.coverage(s);
            report->coverage[s] = n;
            if (n < ds.clips_.size()) {
                report->warnings.push_back("feature set '" + std::string(to_string(s)) + "' covers " + std::to_string(n) +
                                           " of " + std::to_string(ds.clips_.size()) + " clips");
            }
        }
        const std::size_t rated = ds.targets_.size();
        if (rated < ds.clips_.size()) {
            report->warnings.push_back(std::to_string(ds.clips_.size() - rated) + " clips have no annotations");
        }
    }
    return ds;
}

Dataset assemble(std::vector<ClipRecord> clips, TargetMap targets, std::span<const FeatureTable> tables,
                 AssemblyReport* report) {
    std::vector<FeatureVector> vectors;
    for (const auto& t : tables) {
        auto v = t.vectors();
        vectors.insert(vectors.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    }
    return assemble(std::move(clips), std::move(targets), vectors, report);
}

}  // namespace emoperf
