#pragma once

#include "emoperf/corpus.hpp"

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

namespace emoperf::score {

struct Note {
    double onset_beats = 0.0;
    double duration_beats = 1.0;
    int pitch = 60;
};

/// Notes sorted by onset (stable for chords).
struct NoteList {
    std::vector<Note> notes;
    TimeSignature time_signature;

    /// max(onset + duration) over notes; 0 when empty.
    double total_beats() const;
};

/// Reads onset_beats,duration_beats,midi_pitch. Throws InputError naming the offending row.
NoteList parse_notes(const std::filesystem::path& path, TimeSignature time_signature = {});
/// Validates and stably sorts an in-memory list.
NoteList make_note_list(std::vector<Note> notes, TimeSignature time_signature = {});
void write_notes(const std::filesystem::path& path, const NoteList& notes);

struct RhythmDensity {
    double ioi_mean_beats = 0.0;
    double duration_mean_beats = 0.0;
    double duration_std_beats = 0.0;
    double onset_density_per_beat = 0.0;
    double pitch_density_per_beat = 0.0;
    /// Fewer than two distinct onsets: ioi_mean is 0 by convention.
    bool single_onset = false;
};

RhythmDensity rhythm_density_features(const NoteList& notes);

inline constexpr std::array<double, 12> kMajorProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                         2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
inline constexpr std::array<double, 12> kMinorProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                         2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

struct KeyEstimate {
    int tonic = 0;
    Mode mode = Mode::major;
    double key_strength = 0.0;
    /// Correlation with each candidate: [0..11] major tonics, [12..23] minor tonics.
    std::array<double, 24> correlations{};
};

/// Duration-weighted pitch-class profile.
std::array<double, 12> pitch_class_profile(const NoteList& notes);

/// Krumhansl-Schmuckler: best Pearson correlation among the 24 rotated key profiles.
/// Ties go to the lower tonic, then major.
KeyEstimate ks_key(const NoteList& notes);

struct ScoreFeatureVector {
    static constexpr std::size_t kSize = 7;
    double ioi_mean_beats = 0.0;
    double duration_mean_beats = 0.0;
    double duration_std_beats = 0.0;
    double onset_density_per_beat = 0.0;
    double pitch_density_per_beat = 0.0;
    double mode = 0.0;
    double key_strength = 0.0;

    static const std::array<std::string_view, kSize>& names();
    std::array<double, kSize> values() const;
};

/// Mode is the estimated one, never the notated key signature.
ScoreFeatureVector extract_score(const NoteList& notes);

}  // namespace emoperf::score
