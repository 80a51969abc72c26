#include "emoperf/score.hpp"

#include "emoperf/csv.hpp"
#include "emoperf/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <utility>

namespace emoperf::score {

namespace {

void validate(const Note& n, const std::string& where) {
    if (!(n.onset_beats >= 0.0)) throw InputError(where + ": negative onset");
    if (!(n.duration_beats > 0.0)) throw InputError(where + ": non-positive duration");
    if (n.pitch < 0 || n.pitch > 127) throw InputError(where + ": pitch " + std::to_string(n.pitch) + " outside 0..127");
}

void sort_notes(std::vector<Note>& notes) {
    std::stable_sort(notes.begin(), notes.end(),
                     [](const Note& a, const Note& b) { return a.onset_beats < b.onset_beats; });
}

double pearson(const std::array<double, 12>& x, const std::array<double, 12>& y) {
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < 12; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= 12.0;
    my /= 12.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < 12; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 1e-300 || syy <= 1e-300) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double NoteList::total_beats() const {
    double total = 0.0;
    for (const auto& n : notes) total = std::max(total, n.onset_beats + n.duration_beats);
    return total;
}

NoteList make_note_list(std::vector<Note> notes, TimeSignature time_signature) {
    for (std::size_t i = 0; i < notes.size(); ++i) validate(notes[i], "note " + std::to_string(i + 1));
    sort_notes(notes);
    return {std::move(notes), time_signature};
}

NoteList parse_notes(const std::filesystem::path& path, TimeSignature time_signature) {
    const csv::Table table = csv::read(path);
    const auto c_on = table.column("onset_beats");
    const auto c_dur = table.column("duration_beats");
    const auto c_pitch = table.column("midi_pitch");
    if (!c_on || !c_dur || !c_pitch) {
        throw InputError(path.string() + ": header must contain onset_beats,duration_beats,midi_pitch");
    }
    std::vector<Note> notes;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string where = path.string() + ": row " + std::to_string(table.line_numbers[r]);
        const auto& row = table.rows[r];
        Note n;
        n.onset_beats = csv::parse_real(row[*c_on], where);
        n.duration_beats = csv::parse_real(row[*c_dur], where);
        const double pitch = csv::parse_real(row[*c_pitch], where);
        if (pitch != std::floor(pitch)) throw InputError(where + ": pitch must be an integer");
        if (pitch < 0.0 || pitch > 127.0) throw InputError(where + ": pitch outside 0..127");
        n.pitch = static_cast<int>(pitch);
        validate(n, where);
        notes.push_back(n);
    }
    sort_notes(notes);
    return {std::move(notes), time_signature};
}

void write_notes(const std::filesystem::path& path, const NoteList& notes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "onset_beats,duration_beats,midi_pitch\n";
    for (const auto& n : notes.notes) {
        out << csv::format_real(n.onset_beats) << ',' << csv::format_real(n.duration_beats) << ',' << n.pitch << '\n';
    }
}

RhythmDensity rhythm_density_features(const NoteList& notes) {
    if (notes.notes.empty()) throw InputError("score features need a non-empty note list");
    RhythmDensity out;
    const double total = notes.total_beats();

    std::vector<double> onsets;
    std::set<std::pair<double, int>> events;
    for (const auto& n : notes.notes) {
        if (onsets.empty() || n.onset_beats != onsets.back()) onsets.push_back(n.onset_beats);
        events.emplace(n.onset_beats, n.pitch);
    }
    std::sort(onsets.begin(), onsets.end());
    onsets.erase(std::unique(onsets.begin(), onsets.end()), onsets.end());

    if (onsets.size() >= 2) {
        out.ioi_mean_beats = (onsets.back() - onsets.front()) / static_cast<double>(onsets.size() - 1);
    } else {
        out.single_onset = true;
    }

    double mean = 0.0;
    for (const auto& n : notes.notes) mean += n.duration_beats;
    mean /= static_cast<double>(notes.notes.size());
    double var = 0.0;
    for (const auto& n : notes.notes) var += (n.duration_beats - mean) * (n.duration_beats - mean);
    out.duration_mean_beats = mean;
    out.duration_std_beats = std::sqrt(var / static_cast<double>(notes.notes.size()));

    out.onset_density_per_beat = static_cast<double>(onsets.size()) / total;
    out.pitch_density_per_beat = static_cast<double>(events.size()) / total;
    return out;
}

std::array<double, 12> pitch_class_profile(const NoteList& notes) {
    std::array<double, 12> profile{};
    for (const auto& n : notes.notes) profile[static_cast<std::size_t>(n.pitch % 12)] += n.duration_beats;
    return profile;
}

KeyEstimate ks_key(const NoteList& notes) {
    if (notes.notes.empty()) throw InputError("key finding needs a non-empty note list");
    std::array<double, 12> profile = pitch_class_profile(notes);
    for (double& p : profile) p += 1e-6;

    KeyEstimate out;
    int best = -1;
    for (int mode = 0; mode < 2; ++mode) {
        const auto& reference = mode == 0 ? kMajorProfile : kMinorProfile;
        for (int tonic = 0; tonic < 12; ++tonic) {
            // Rotate the reference so index `tonic` carries the tonic weight.
            std::array<double, 12> rotated{};
            for (int pc = 0; pc < 12; ++pc) rotated[static_cast<std::size_t>(pc)] = reference[static_cast<std::size_t>((pc - tonic + 12) % 12)];
            out.correlations[static_cast<std::size_t>(mode * 12 + tonic)] = pearson(profile, rotated);
        }
    }
    // Candidate order for ties: tonic ascending, major before minor.
    for (int tonic = 0; tonic < 12; ++tonic) {
        for (int mode = 0; mode < 2; ++mode) {
            const int idx = mode * 12 + tonic;
            if (best < 0 || out.correlations[static_cast<std::size_t>(idx)] > out.correlations[static_cast<std::size_t>(best)]) best = idx;
        }
    }
    out.tonic = best % 12;
    out.mode = best < 12 ? Mode::major : Mode::minor;
    out.key_strength = out.correlations[static_cast<std::size_t>(best)];
    return out;
}

const std::array<std::string_view, ScoreFeatureVector::kSize>& ScoreFeatureVector::names() {
    static const std::array<std::string_view, kSize> kNames = {
        "ioi_mean_beats",         "duration_mean_beats",    "duration_std_beats", "onset_density_per_beat",
        "pitch_density_per_beat", "mode",                   "key_strength",
    };
    return kNames;
}

std::array<double, ScoreFeatureVector::kSize> ScoreFeatureVector::values() const {
    return {ioi_mean_beats, duration_mean_beats,    duration_std_beats, onset_density_per_beat,
            pitch_density_per_beat, mode, key_strength};
}

ScoreFeatureVector extract_score(const NoteList& notes) {
    const RhythmDensity rd = rhythm_density_features(notes);
    const KeyEstimate key = ks_key(notes);
    ScoreFeatureVector out;
    out.ioi_mean_beats = rd.ioi_mean_beats;
    out.duration_mean_beats = rd.duration_mean_beats;
    out.duration_std_beats = rd.duration_std_beats;
    out.onset_density_per_beat = rd.onset_density_per_beat;
    out.pitch_density_per_beat = rd.pitch_density_per_beat;
    out.mode = key.mode == Mode::minor ? 1.0 : 0.0;
    out.key_strength = key.key_strength;
    return out;
}

}  // namespace emoperf::score
