#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace emoperf::app {

struct SynthOptions {
    std::filesystem::path out_dir;
    std::uint64_t seed = 7;
    std::size_t pieces = 48;
    std::size_t pianists = 6;
};

/// Std ratio of planted signal to added target noise.
inline constexpr double kPlantedSnr = 10.0;
inline constexpr std::size_t kSynthRaters = 29;

/// Low-level features the targets are linear in.
inline const std::vector<std::string> kArousalPlanted = {"loudness", "onset_rate", "spectral_centroid_mean"};
inline const std::vector<std::string> kValencePlanted = {"pitch_salience_mean", "spectral_flatness_mean",
                                                         "dynamic_complexity"};

struct SynthSummary {
    std::filesystem::path manifest;
    std::filesystem::path annotations;
    std::filesystem::path midlevel;
    std::filesystem::path embeddings;
    std::size_t clips = 0;
};

/// Writes audio/, scores/, manifest.csv, annotations.csv (per-rater), midlevel.csv, embeddings.csv
/// and planted.json under out_dir. Output depends only on the options.
SynthSummary run_synthcorpus(const SynthOptions& options);

}  // namespace emoperf::app
