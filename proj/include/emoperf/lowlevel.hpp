#pragma once

#include "emoperf/audio.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emoperf::dsp {

/// Magnitude spectrum of one Hann-windowed 1024-sample frame (513 bins).
struct SpectralFrame {
    std::vector<double> magnitudes;
    double bin_hz = kSampleRate / static_cast<double>(kFrameSize);

    double frequency(std::size_t bin) const { return static_cast<double>(bin) * bin_hz; }
};

/// Periodic Hann window.
std::vector<double> hann_window(std::size_t size);

/// floor((len - 1024) / 512) + 1 frames.
std::size_t frame_count(std::size_t num_samples);

std::vector<SpectralFrame> stft(const AudioClip& clip);

struct SpectralShape {
    double centroid_hz = 0.0;
    double bandwidth_hz = 0.0;
    double flatness = 0.0;
    double rolloff_hz = 0.0;
    int complexity = 0;
    /// All-zero frame: every field is 0 by convention.
    bool silent = false;
};

inline constexpr double kRolloffFraction = 0.85;
inline constexpr double kFlatnessFloor = 1e-10;

SpectralShape spectral_shape(const SpectralFrame& frame);

struct SpectralPeak {
    double frequency_hz = 0.0;
    double magnitude = 0.0;
};

inline constexpr double kPeakThresholdDb = -60.0;
inline constexpr std::size_t kMaxDissonancePeaks = 100;

/// Interior local maxima above (frame max - 60 dB), sorted by descending magnitude,
/// with parabolic refinement of frequency and magnitude. `max_peaks == 0` keeps all.
std::vector<SpectralPeak> pick_peaks(const SpectralFrame& frame, std::size_t max_peaks = 0);

/// Critical bandwidth in Hz: 25 + 75 (1 + 1.4 (f/1000)^2)^0.69.
double critical_bandwidth(double hz);

/// Plomp-Levelt roughness curve exp(-3.5 q) - exp(-5.75 q) for q = separation / critical bandwidth.
double roughness(double q);

/// Amplitude-product weighted mean roughness over all peak pairs; 0 with fewer than two peaks.
double dissonance(std::span<const SpectralPeak> peaks);
double dissonance(const SpectralFrame& frame);

/// Spectral autocorrelation salience in [0, 1]; 0 for a silent frame.
double pitch_salience(const SpectralFrame& frame);

struct LoudnessFeatures {
    /// Mean of frame_loudness.
    double loudness = 0.0;
    double dynamic_complexity = 0.0;
    /// (frame energy)^0.67 per STFT frame.
    std::vector<double> frame_loudness;
    double silence_ratio = 0.0;
    bool silent = false;
};

inline constexpr double kStevensExponent = 0.67;
inline constexpr double kDynamicWindowSeconds = 0.2;
inline constexpr double kSilenceGateDb = -90.0;

LoudnessFeatures loudness_features(const AudioClip& clip);

struct OnsetDetection {
    std::vector<double> onset_times;
    double onset_rate = 0.0;
    /// Half-wave rectified spectral flux, one value per STFT frame (first frame 0).
    std::vector<double> envelope;
};

inline constexpr double kOnsetMeanWindowSeconds = 0.35;
inline constexpr double kOnsetDeltaFraction = 0.1;
inline constexpr double kMinInterOnsetSeconds = 0.05;
/// Peaks weaker than this fraction of the clip's mean per-frame spectral mass are ignored,
/// so the frame-to-frame ripple of a steady tone does not count as onsets.
inline constexpr double kOnsetFluxFloor = 0.05;

OnsetDetection onsets(const AudioClip& clip);
OnsetDetection onsets(std::span<const SpectralFrame> frames, double duration_seconds);

inline constexpr double kFrameRate = kSampleRate / static_cast<double>(kHopSize);
inline constexpr double kTempoMinBpm = 40.0;
inline constexpr double kTempoMaxBpm = 208.0;
inline constexpr double kTempoPriorBpm = 110.0;
inline constexpr double kTempoPriorOctaves = 0.9;
inline constexpr double kTempoMinSeconds = 4.0;

/// Throws NumericalError("no rhythmic content") for a constant envelope, InputError when the
/// envelope covers less than 4 s.
double tempo_bpm(std::span<const double> envelope, double frame_rate = kFrameRate);

/// The 22 clip-level low-level features in fixed order (see names()).
struct LowLevelVector {
    static constexpr std::size_t kSize = 22;
    std::array<double, kSize> values{};
    /// The tempo estimator found no rhythmic content; tempo_bpm holds the prior centre (110).
    bool tempo_fallback = false;
    bool silent = false;

    static const std::array<std::string_view, kSize>& names();
    double get(std::string_view name) const;
};

LowLevelVector extract_lowlevel(const AudioClip& clip);

}  // namespace emoperf::dsp
