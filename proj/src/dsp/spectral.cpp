#include "emoperf/lowlevel.hpp"

#include "emoperf/error.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emoperf::dsp {

std::vector<double> hann_window(std::size_t size) {
    std::vector<double> w(size);
    for (std::size_t n = 0; n < size; ++n) {
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(size));
    }
    return w;
}

std::size_t frame_count(std::size_t num_samples) {
    if (num_samples < kFrameSize) return 0;
    return (num_samples - kFrameSize) / kHopSize + 1;
}

std::vector<SpectralFrame> stft(const AudioClip& clip) {
    const auto samples = clip.samples();
    const std::size_t n_frames = frame_count(samples.size());
    const std::vector<double> window = hann_window(kFrameSize);
    detail::RealFft fft(kFrameSize);
    std::vector<double> buffer(kFrameSize);
    std::vector<SpectralFrame> frames(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t start = f * kHopSize;
        for (std::size_t i = 0; i < kFrameSize; ++i) buffer[i] = samples[start + i] * window[i];
        frames[f].magnitudes.resize(kFrameSize / 2 + 1);
        frames[f].bin_hz = clip.sample_rate() / static_cast<double>(kFrameSize);
        fft.magnitudes(buffer, frames[f].magnitudes);
    }
    return frames;
}

namespace {

// Interior local maxima above the relative threshold, in bin order.
std::vector<std::size_t> peak_bins(std::span<const double> m) {
    std::vector<std::size_t> bins;
    if (m.size() < 3) return bins;
    const double max = *std::max_element(m.begin(), m.end());
    if (!(max > 0.0)) return bins;
    const double threshold = max * std::pow(10.0, kPeakThresholdDb / 20.0);
    for (std::size_t k = 1; k + 1 < m.size(); ++k) {
        if (m[k] > m[k - 1] && m[k] >= m[k + 1] && m[k] > threshold) bins.push_back(k);
    }
    return bins;
}

}  // namespace

std::vector<SpectralPeak> pick_peaks(const SpectralFrame& frame, std::size_t max_peaks) {
    const auto& m = frame.magnitudes;
    std::vector<SpectralPeak> peaks;
    for (std::size_t k : peak_bins(m)) {
        const double a = m[k - 1], b = m[k], c = m[k + 1];
        const double denom = a - 2.0 * b + c;
        const double delta = denom != 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
        peaks.push_back({(static_cast<double>(k) + delta) * frame.bin_hz, b - 0.25 * (a - c) * delta});
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const SpectralPeak& x, const SpectralPeak& y) { return x.magnitude > y.magnitude; });
    if (max_peaks > 0 && peaks.size() > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

SpectralShape spectral_shape(const SpectralFrame& frame) {
    const auto& m = frame.magnitudes;
    SpectralShape shape;
    double sum = 0.0, weighted = 0.0, energy = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        sum += m[k];
        weighted += frame.frequency(k) * m[k];
        energy += m[k] * m[k];
    }
    if (!(sum > 0.0)) {
        shape.silent = true;
        return shape;
    }
    shape.centroid_hz = weighted / sum;

    double spread = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double d = frame.frequency(k) - shape.centroid_hz;
        spread += m[k] * d * d;
    }
    shape.bandwidth_hz = std::sqrt(spread / sum);

    double log_sum = 0.0, floored_sum = 0.0;
    for (double v : m) {
        const double f = std::max(v, kFlatnessFloor);
        log_sum += std::log(f);
        floored_sum += f;
    }
    const double n = static_cast<double>(m.size());
    shape.flatness = std::clamp(std::exp(log_sum / n) / (floored_sum / n), 0.0, 1.0);

    const double target = kRolloffFraction * energy;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        cumulative += m[k] * m[k];
        if (cumulative >= target) {
            shape.rolloff_hz = frame.frequency(k);
            break;
        }
    }

    shape.complexity = static_cast<int>(peak_bins(m).size());
    return shape;
}

double critical_bandwidth(double hz) {
    const double khz = hz / 1000.0;
    return 25.0 + 75.0 * std::pow(1.0 + 1.4 * khz * khz, 0.69);
}

double roughness(double q) { return std::exp(-3.5 * q) - std::exp(-5.75 * q); }

double dissonance(std::span<const SpectralPeak> peaks) {
    if (peaks.size() < 2) return 0.0;
    std::vector<SpectralPeak> sorted(peaks.begin(), peaks.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SpectralPeak& x, const SpectralPeak& y) { return x.frequency_hz < y.frequency_hz; });
    double amp_sum = 0.0, amp_sq = 0.0;
    for (const auto& p : sorted) {
        amp_sum += p.magnitude;
        amp_sq += p.magnitude * p.magnitude;
    }
    const double weight = 0.5 * (amp_sum * amp_sum - amp_sq);
    if (!(weight > 0.0)) return 0.0;
    // Pairs beyond q = 40 contribute below exp(-140) and are skipped; q grows with j.
    constexpr double kMaxQ = 40.0;
    double total = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cbw = critical_bandwidth(sorted[i].frequency_hz);
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            const double q = (sorted[j].frequency_hz - sorted[i].frequency_hz) / cbw;
            if (q > kMaxQ) break;
            total += sorted[i].magnitude * sorted[j].magnitude * roughness(q);
        }
    }
    return std::clamp(total / weight, 0.0, 1.0);
}

double dissonance(const SpectralFrame& frame) { return dissonance(pick_peaks(frame, kMaxDissonancePeaks)); }

double pitch_salience(const SpectralFrame& frame) {
    const auto& m = frame.magnitudes;
    const std::size_t n = m.size();
    double mean = 0.0;
    for (double v : m) mean += v;
    mean /= static_cast<double>(n);
    if (!(mean > 0.0)) return 0.0;

    std::vector<double> centred(n);
    for (std::size_t k = 0; k < n; ++k) centred[k] = m[k] - mean;
    auto autocorr = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t k = 0; k + lag < n; ++k) acc += centred[k] * centred[k + lag];
        return acc;
    };
    const double r0 = autocorr(0);
    if (!(r0 > 0.0)) return 0.0;

    // Harmonic spacings between 100 Hz and 5 kHz.
    const auto lo = static_cast<std::size_t>(std::ceil(100.0 / frame.bin_hz));
    const auto hi = std::min(n - 1, static_cast<std::size_t>(std::floor(5000.0 / frame.bin_hz)));
    double best = 0.0;
    for (std::size_t lag = std::max<std::size_t>(lo, 1); lag <= hi; ++lag) best = std::max(best, autocorr(lag));
    return std::clamp(best / r0, 0.0, 1.0);
}

}  // namespace emoperf::dsp
