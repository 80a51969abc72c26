#include "emoperf/audio.hpp"

#include "emoperf/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace emoperf::dsp {

namespace {

std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }

void put32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
    out.write(b, 4);
}
void put16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
    out.write(b, 2);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioClip::AudioClip(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ != kSampleRate) {
        throw InputError("sample rate " + std::to_string(sample_rate_) + " Hz not supported (expected 44100 Hz)");
    }
    if (samples_.size() < kFrameSize) {
        throw InputError("clip of " + std::to_string(samples_.size()) + " samples is shorter than one frame (1024)");
    }
}

AudioClip read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open audio file " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string name = path.string();
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw InputError(name + ": not a RIFF/WAVE file");
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::size_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size()) throw InputError(name + ": truncated fmt chunk");
            format = le16(bytes.data() + body);
            channels = le16(bytes.data() + body + 2);
            rate = le32(bytes.data() + body + 4);
            bits = le16(bytes.data() + body + 14);
            if (format == kFormatExtensible && size >= 26) format = le16(bytes.data() + body + 24);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = std::min(size, bytes.size() - body);
        }
        pos = body + size + (size & 1);
    }
    if (channels == 0 || data == nullptr) throw InputError(name + ": missing fmt or data chunk");
    if (rate != 44100) throw InputError(name + ": sample rate " + std::to_string(rate) + " Hz (expected 44100 Hz)");

    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool pcm24 = format == kFormatPcm && bits == 24;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !pcm24 && !f32) {
        throw InputError(name + ": unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                         " bits)");
    }
    const std::size_t width = bits / 8;
    const std::size_t frames = data_size / (width * channels);
    std::vector<double> mono(frames, 0.0);
    for (std::size_t i = 0; i < frames; ++i) {
        double sum = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const unsigned char* p = data + (i * channels + ch) * width;
            double v = 0.0;
            if (pcm16) {
                v = static_cast<std::int16_t>(le16(p)) / 32768.0;
            } else if (pcm24) {
                std::int32_t s = std::int32_t(p[0]) | (std::int32_t(p[1]) << 8) | (std::int32_t(p[2]) << 16);
                if (s & 0x800000) s -= 0x1000000;
                v = s / 8388608.0;
            } else {
                float f;
                const std::uint32_t u = le32(p);
                std::memcpy(&f, &u, 4);
                v = f;
            }
            sum += v;
        }
        mono[i] = sum / channels;
    }
    try {
        return AudioClip(std::move(mono));
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
}

std::vector<double> quantize_pcm16(std::span<const double> samples) {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double s = std::clamp(samples[i], -1.0, 1.0);
        const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
        out[i] = static_cast<double>(q) / 32768.0;
    }
    return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, WavEncoding encoding,
               double sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : encoding == WavEncoding::pcm24 ? 24 : 32;
    const std::uint16_t block = bits / 8;
    const auto data_size = static_cast<std::uint32_t>(samples.size() * block);
    const auto rate = static_cast<std::uint32_t>(sample_rate);
    out.write("RIFF", 4);
    put32(out, 36 + data_size);
    out.write("WAVEfmt ", 8);
    put32(out, 16);
    put16(out, encoding == WavEncoding::float32 ? kFormatFloat : kFormatPcm);
    put16(out, 1);
    put32(out, rate);
    put32(out, rate * block);
    put16(out, block);
    put16(out, bits);
    out.write("data", 4);
    put32(out, data_size);
    for (double x : samples) {
        const double s = std::clamp(x, -1.0, 1.0);
        if (encoding == WavEncoding::pcm16) {
            put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(std::lround(s * 32768.0), -32768L, 32767L))));
        } else if (encoding == WavEncoding::pcm24) {
            const auto q = static_cast<std::int32_t>(std::clamp(std::lround(s * 8388608.0), -8388608L, 8388607L));
            const char b[3] = {char(q & 0xff), char((q >> 8) & 0xff), char((q >> 16) & 0xff)};
            out.write(b, 3);
        } else {
            const float f = static_cast<float>(x);
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            put32(out, u);
        }
    }
}

}  // namespace emoperf::dsp
