#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emoperf {

enum class Mode { major = 0, minor = 1 };

enum class FeatureSet { lowlevel, score, midlevel, deam_pca };

enum class Target { arousal, valence };

inline constexpr FeatureSet kAllFeatureSets[] = {FeatureSet::midlevel, FeatureSet::deam_pca, FeatureSet::lowlevel,
                                                 FeatureSet::score};
inline constexpr Target kAllTargets[] = {Target::arousal, Target::valence};

std::string_view to_string(FeatureSet set);
std::string_view to_string(Target target);
std::string_view to_string(Mode mode);
/// Throws InputError on unknown names.
FeatureSet parse_feature_set(std::string_view name);
Mode parse_mode(std::string_view name);

/// Row label used in report tables ("Mid-level", "DEAMResNet", ...).
std::string_view display_name(FeatureSet set);

struct TimeSignature {
    int numerator = 4;
    int denominator = 4;

    /// Parses "3/4"; numerator >= 1, denominator in {1,2,4,8,16}.
    static TimeSignature parse(std::string_view text);
    std::string str() const;
    bool operator==(const TimeSignature&) const = default;
};

/// One performance excerpt of one piece by one pianist.
struct ClipRecord {
    std::string clip_id;
    std::string piece_id;
    std::string pianist_id;
    std::filesystem::path audio_path;
    std::optional<std::filesystem::path> score_path;
    TimeSignature time_signature;
    std::string notated_key;
    Mode notated_mode = Mode::major;
};

/// Mean ratings of one clip. Regression uses the standardized columns.
struct EmotionTarget {
    std::string clip_id;
    double arousal_mean = 0.0;
    double valence_mean = 0.0;
    double arousal_z = 0.0;
    double valence_z = 0.0;
    int n_raters = 0;

    double standardized(Target target) const { return target == Target::arousal ? arousal_z : valence_z; }
    double raw(Target target) const { return target == Target::arousal ? arousal_mean : valence_mean; }
};

using TargetMap = std::map<std::string, EmotionTarget>;

inline constexpr double kArousalMin = 0.0;
inline constexpr double kArousalMax = 100.0;
inline constexpr double kValenceMin = -5.0;
inline constexpr double kValenceMax = 5.0;

struct FeatureVector {
    std::string clip_id;
    FeatureSet set = FeatureSet::lowlevel;
    std::vector<std::string> names;
    std::vector<double> values;

    /// Throws InputError when lengths differ, a name repeats, or a value is not finite.
    void validate() const;
};

/// The content of one features.csv: a rectangular clip x feature table.
struct FeatureTable {
    FeatureSet set = FeatureSet::lowlevel;
    std::vector<std::string> names;
    std::vector<std::string> clip_ids;
    std::vector<std::vector<double>> rows;

    std::vector<FeatureVector> vectors() const;
};

/// Relative paths in the manifest are resolved against the manifest's directory.
std::vector<ClipRecord> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ClipRecord> clips);

/// Accepts per-rater rows (clip_id,rater_id,arousal,valence) or pre-aggregated rows
/// (clip_id,arousal_mean,valence_mean[,n_raters]); the layout is detected from the header.
TargetMap load_annotations(const std::filesystem::path& path, std::span<const ClipRecord> clips);

/// Recomputes arousal_z / valence_z over every entry (population standard deviation).
/// Throws NumericalError when a column has zero variance.
void standardize(TargetMap& targets);

/// Writes every field at round-trip precision; load_targets reads it back bit-for-bit.
void save_targets(const std::filesystem::path& path, const TargetMap& targets);
TargetMap load_targets(const std::filesystem::path& path);

FeatureTable load_feature_table(const std::filesystem::path& path, FeatureSet set);
void save_feature_table(const std::filesystem::path& path, const FeatureTable& table,
                        std::span<const std::string> preamble = {});

struct AssemblyReport {
    std::map<FeatureSet, std::size_t> coverage;
    std::vector<std::string> warnings;
};

/// Joined, validated analysis data. Immutable once assembled.
class Dataset {
public:
    const std::vector<ClipRecord>& clips() const { return clips_; }
    const TargetMap& targets() const { return targets_; }
    const ClipRecord* clip(const std::string& clip_id) const;
    const EmotionTarget* target(const std::string& clip_id) const;
    const FeatureVector* features(const std::string& clip_id, FeatureSet set) const;

    std::vector<FeatureSet> feature_sets() const;
    bool has(FeatureSet set) const { return names_.contains(set); }
    const std::vector<std::string>& feature_names(FeatureSet set) const;
    std::size_t coverage(FeatureSet set) const;

    /// Clips in manifest order that have targets and every listed feature set.
    std::vector<const ClipRecord*> usable_clips(std::span<const FeatureSet> sets) const;

    /// Keeps the clips accepted by `keep`. With `restandardize`, targets are z-scored again over the subset.
    Dataset filter(const std::function<bool(const ClipRecord&)>& keep, bool restandardize) const;

    friend Dataset assemble(std::vector<ClipRecord> clips, TargetMap targets, std::span<const FeatureVector> vectors,
                            AssemblyReport* report);

private:
    std::vector<ClipRecord> clips_;
    std::map<std::string, std::size_t> clip_index_;
    TargetMap targets_;
    std::map<std::pair<std::string, FeatureSet>, FeatureVector> features_;
    std::map<FeatureSet, std::vector<std::string>> names_;
};

Dataset assemble(std::vector<ClipRecord> clips, TargetMap targets, std::span<const FeatureVector> vectors,
                 AssemblyReport* report = nullptr);
Dataset assemble(std::vector<ClipRecord> clips, TargetMap targets, std::span<const FeatureTable> tables,
                 AssemblyReport* report = nullptr);

}  // namespace emoperf
