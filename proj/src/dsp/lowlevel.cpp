#include "emoperf/error.hpp"
#include "emoperf/lowlevel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace emoperf::dsp {

namespace {

enum Index : std::size_t {
    kDissonanceMean,
    kDissonanceStd,
    kPitchSalienceMean,
    kPitchSalienceStd,
    kCentroidMean,
    kCentroidStd,
    kFlatnessMean,
    kFlatnessStd,
    kBandwidthMean,
    kBandwidthStd,
    kRolloffMean,
    kRolloffStd,
    kComplexityMean,
    kComplexityStd,
    kFrameLoudnessMean,
    kFrameLoudnessStd,
    kLoudness,
    kDynamicComplexity,
    kOnsetRate,
    kTempo,
    kOnsetsPerBeat,
    kSilenceRatio,
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd aggregate(const std::vector<double>& v) {
    if (v.empty()) return {};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

const std::array<std::string_view, LowLevelVector::kSize>& LowLevelVector::names() {
    static const std::array<std::string_view, kSize> kNames = {
        "dissonance_mean",        "dissonance_std",          "pitch_salience_mean",    "pitch_salience_std",
        "spectral_centroid_mean", "spectral_centroid_std",   "spectral_flatness_mean", "spectral_flatness_std",
        "spectral_bandwidth_mean", "spectral_bandwidth_std", "spectral_rolloff_mean",  "spectral_rolloff_std",
        "spectral_complexity_mean", "spectral_complexity_std", "frame_loudness_mean",  "frame_loudness_std",
        "loudness",               "dynamic_complexity",      "onset_rate",             "tempo_bpm",
        "onset_count_normalized", "silence_ratio",
    };
    return kNames;
}

double LowLevelVector::get(std::string_view name) const {
    const auto& n = names();
    for (std::size_t i = 0; i < kSize; ++i) {
        if (n[i] == name) return values[i];
    }
    throw InputError("unknown low-level feature '" + std::string(name) + "'");
}

LowLevelVector extract_lowlevel(const AudioClip& clip) {
    const std::vector<SpectralFrame> frames = stft(clip);
    const std::size_t n = frames.size();

    std::vector<double> diss(n), sal(n), centroid(n), flat(n), band(n), roll(n), complexity(n);
    for (std::size_t t = 0; t < n; ++t) {
        const SpectralShape s = spectral_shape(frames[t]);
        centroid[t] = s.centroid_hz;
        band[t] = s.bandwidth_hz;
        flat[t] = s.flatness;
        roll[t] = s.rolloff_hz;
        complexity[t] = s.complexity;
        diss[t] = s.silent ? 0.0 : dissonance(frames[t]);
        sal[t] = s.silent ? 0.0 : pitch_salience(frames[t]);
    }
    const LoudnessFeatures loud = loudness_features(clip);
    const OnsetDetection det = onsets(frames, clip.duration_seconds());

    LowLevelVector out;
    auto put = [&](Index mean_idx, const std::vector<double>& v) {
        const MeanStd ms = aggregate(v);
        out.values[mean_idx] = ms.mean;
        out.values[mean_idx + 1] = ms.std;
    };
    put(kDissonanceMean, diss);
    put(kPitchSalienceMean, sal);
    put(kCentroidMean, centroid);
    put(kFlatnessMean, flat);
    put(kBandwidthMean, band);
    put(kRolloffMean, roll);
    put(kComplexityMean, complexity);
    put(kFrameLoudnessMean, loud.frame_loudness);

    // Clip-level loudness: Stevens law applied to the mean frame energy. Averaging the
    // per-frame loudness instead would duplicate frame_loudness_mean column for column.
    double mean_energy = 0.0;
    for (double l : loud.frame_loudness) mean_energy += std::pow(l, 1.0 / kStevensExponent);
    mean_energy = n ? mean_energy / static_cast<double>(n) : 0.0;
    out.values[kLoudness] = std::pow(mean_energy, kStevensExponent);

    out.values[kDynamicComplexity] = loud.dynamic_complexity;
    out.values[kSilenceRatio] = loud.silence_ratio;
    out.values[kOnsetRate] = det.onset_rate;
    out.silent = loud.silent;

    double tempo = kTempoPriorBpm;
    try {
        tempo = tempo_bpm(det.envelope);
    } catch (const Error&) {
        out.tempo_fallback = true;
    }
    out.values[kTempo] = tempo;
    const double beats = clip.duration_seconds() * tempo / 60.0;
    out.values[kOnsetsPerBeat] = static_cast<double>(det.onset_times.size()) / beats;

    for (std::size_t i = 0; i < LowLevelVector::kSize; ++i) {
        if (!std::isfinite(out.values[i])) {
            throw NumericalError("low-level feature '" + std::string(LowLevelVector::names()[i]) + "' is not finite");
        }
    }
    return out;
}

}  // namespace emoperf::dsp
