#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace emoperf::dsp {

inline constexpr double kSampleRate = 44100.0;
inline constexpr std::size_t kFrameSize = 1024;
inline constexpr std::size_t kHopSize = 512;

/// Mono samples in [-1, 1] at 44.1 kHz, at least one frame long.
class AudioClip {
public:
    /// Throws InputError on a wrong rate or a clip shorter than one frame.
    AudioClip(std::vector<double> samples, double sample_rate = kSampleRate);

    std::span<const double> samples() const { return samples_; }
    double sample_rate() const { return sample_rate_; }
    std::size_t size() const { return samples_.size(); }
    double duration_seconds() const { return static_cast<double>(samples_.size()) / sample_rate_; }

private:
    std::vector<double> samples_;
    double sample_rate_;
};

enum class WavEncoding { pcm16, pcm24, float32 };

/// Decodes PCM 16/24-bit or IEEE float 32-bit WAV. Multi-channel input is averaged to mono.
/// Non-44.1 kHz files are rejected.
AudioClip read_wav(const std::filesystem::path& path);

/// Writes mono samples; integer encodings clip to [-1, 1] and round to nearest.
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               WavEncoding encoding = WavEncoding::pcm16, double sample_rate = kSampleRate);

/// Applies the same rounding as write_wav(pcm16), so in-memory audio matches what a reader will see.
std::vector<double> quantize_pcm16(std::span<const double> samples);

}  // namespace emoperf::dsp
