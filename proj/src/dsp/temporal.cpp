#include "emoperf/error.hpp"
#include "emoperf/lowlevel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emoperf::dsp {

LoudnessFeatures loudness_features(const AudioClip& clip) {
    const auto x = clip.samples();
    LoudnessFeatures out;

    const std::size_t n_frames = frame_count(x.size());
    out.frame_loudness.resize(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        double energy = 0.0;
        for (std::size_t i = 0; i < kFrameSize; ++i) {
            const double s = x[f * kHopSize + i];
            energy += s * s;
        }
        out.frame_loudness[f] = std::pow(energy, kStevensExponent);
    }
    out.loudness = n_frames ? std::accumulate(out.frame_loudness.begin(), out.frame_loudness.end(), 0.0) /
                                  static_cast<double>(n_frames)
                            : 0.0;

    // Non-overlapping 0.2 s windows; a trailing partial window is dropped unless it is the only one.
    const auto window = static_cast<std::size_t>(std::lround(kDynamicWindowSeconds * clip.sample_rate()));
    const std::size_t n_windows = std::max<std::size_t>(1, x.size() / window);
    const std::size_t length = x.size() / window == 0 ? x.size() : window;
    std::vector<double> levels;
    for (std::size_t w = 0; w < n_windows; ++w) {
        double power = 0.0;
        for (std::size_t i = 0; i < length; ++i) {
            const double s = x[w * length + i];
            power += s * s;
        }
        power /= static_cast<double>(length);
        const double db = 10.0 * std::log10(power + 1e-12);
        if (db >= kSilenceGateDb) levels.push_back(db);
    }
    out.silence_ratio = 1.0 - static_cast<double>(levels.size()) / static_cast<double>(n_windows);
    if (levels.empty()) {
        out.silent = true;
        out.dynamic_complexity = 0.0;
        return out;
    }
    const double mean_db = std::accumulate(levels.begin(), levels.end(), 0.0) / static_cast<double>(levels.size());
    double dev = 0.0;
    for (double l : levels) dev += std::abs(l - mean_db);
    out.dynamic_complexity = dev / static_cast<double>(levels.size());
    return out;
}

OnsetDetection onsets(std::span<const SpectralFrame> frames, double duration_seconds) {
    OnsetDetection out;
    const std::size_t n = frames.size();
    out.envelope.assign(n, 0.0);
    double mass = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto& cur = frames[t].magnitudes;
        mass += std::accumulate(cur.begin(), cur.end(), 0.0);
        if (t == 0) continue;
        const auto& prev = frames[t - 1].magnitudes;
        double flux = 0.0;
        for (std::size_t k = 0; k < cur.size(); ++k) flux += std::max(0.0, cur[k] - prev[k]);
        out.envelope[t] = flux;
    }
    if (n == 0) return out;
    mass /= static_cast<double>(n);

    const auto& env = out.envelope;
    const double global_max = *std::max_element(env.begin(), env.end());
    if (!(global_max > 0.0)) return out;
    const double delta = kOnsetDeltaFraction * global_max;
    const double floor = kOnsetFluxFloor * mass;
    const auto half = static_cast<std::size_t>(std::lround(kOnsetMeanWindowSeconds * kFrameRate));

    // Prefix sums for the moving mean.
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + env[t];

    const double frame_centre = static_cast<double>(kFrameSize) / 2.0;
    struct Onset {
        std::size_t frame;
        double strength;
    };
    std::vector<Onset> picked;
    for (std::size_t t = 1; t < n; ++t) {
        const double right = t + 1 < n ? env[t + 1] : 0.0;
        if (!(env[t] > env[t - 1] && env[t] >= right)) continue;
        const std::size_t lo = t >= half ? t - half : 0;
        const std::size_t hi = std::min(n - 1, t + half);
        const double local_mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
        if (env[t] <= local_mean + delta || env[t] <= floor) continue;
        if (!picked.empty() &&
            static_cast<double>(t - picked.back().frame) / kFrameRate < kMinInterOnsetSeconds) {
            if (env[t] > picked.back().strength) picked.back() = {t, env[t]};
            continue;
        }
        picked.push_back({t, env[t]});
    }
    for (const auto& o : picked) {
        out.onset_times.push_back((static_cast<double>(o.frame * kHopSize) + frame_centre) / kSampleRate);
    }
    out.onset_rate = duration_seconds > 0.0 ? static_cast<double>(picked.size()) / duration_seconds : 0.0;
    return out;
}

OnsetDetection onsets(const AudioClip& clip) { return onsets(stft(clip), clip.duration_seconds()); }

double tempo_bpm(std::span<const double> envelope, double frame_rate) {
    const std::size_t n = envelope.size();
    // A 4 s clip yields floor(4 * frame_rate) - 1 frames.
    const auto required = static_cast<std::size_t>(std::floor(kTempoMinSeconds * frame_rate)) - 1;
    if (n < required) {
        throw InputError("tempo estimation needs at least 4 s of onset envelope");
    }
    const auto min_lag = static_cast<std::size_t>(std::ceil(60.0 * frame_rate / kTempoMaxBpm));
    const auto max_lag = static_cast<std::size_t>(std::floor(60.0 * frame_rate / kTempoMinBpm));
    if (n <= max_lag + 1) throw InputError("onset envelope too short for the tempo search range");

    const double mean = std::accumulate(envelope.begin(), envelope.end(), 0.0) / static_cast<double>(n);
    std::vector<double> e(n);
    double var = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        e[t] = envelope[t] - mean;
        var += e[t] * e[t];
    }
    if (!(var > 1e-24 * static_cast<double>(n) * std::max(1.0, mean * mean))) {
        throw NumericalError("no rhythmic content");
    }

    auto bpm_of = [&](double lag) { return 60.0 * frame_rate / lag; };
    auto weighted = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) acc += e[t] * e[t + lag];
        acc /= static_cast<double>(n - lag);
        const double octaves = std::log2(bpm_of(static_cast<double>(lag)) / kTempoPriorBpm) / kTempoPriorOctaves;
        return acc * std::exp(-0.5 * octaves * octaves);
    };

    std::vector<double> score(max_lag + 2, 0.0);
    for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) score[lag] = weighted(lag);
    std::size_t best = min_lag;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
        if (score[lag] > score[best]) best = lag;
    }
    if (!(score[best] > 0.0)) throw NumericalError("no rhythmic content");

    double lag = static_cast<double>(best);
    const double a = score[best - 1], b = score[best], c = score[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) lag += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    return std::clamp(bpm_of(lag), kTempoMinBpm, kTempoMaxBpm);
}

}  // namespace emoperf::dsp
