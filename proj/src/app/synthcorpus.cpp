#include "emoperf/app/synthcorpus.hpp"

#include "emoperf/audio.hpp"
#include "emoperf/corpus.hpp"
#include "emoperf/csv.hpp"
#include "emoperf/embedding.hpp"
#include "emoperf/error.hpp"
#include "emoperf/lowlevel.hpp"
#include "emoperf/score.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>

namespace emoperf::app {

namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 12> kTonicNames = {"C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
constexpr std::array<int, 7> kMajorSteps = {0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kHarmonicMinorSteps = {0, 2, 3, 5, 7, 8, 11};

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

struct Piece {
    std::string id;
    int tonic = 0;
    Mode mode = Mode::major;
    TimeSignature ts;
    double tempo_bpm = 100.0;
    score::NoteList notes;
};

struct Pianist {
    std::string id;
    double tempo_factor = 1.0;
    double gain = 0.3;
    double brightness = 0.5;
    double articulation = 0.8;  // sounding fraction of the notated duration
    double attack = 0.1;        // click level at note onsets
};

std::string two_digits(std::size_t i) {
    std::string s = std::to_string(i);
    return s.size() < 2 ? "0" + s : s;
}

Piece make_piece(std::size_t i, std::uint64_t seed) {
    auto rng = make_rng(seed, 1, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Piece p;
    p.id = "p" + two_digits(i + 1);
    const std::size_t key = (i / 2) % 24;
    p.tonic = static_cast<int>(key % 12);
    p.mode = key < 12 ? Mode::major : Mode::minor;
    static const TimeSignature kSigs[] = {{4, 4}, {3, 4}, {2, 4}, {6, 8}};
    p.ts = kSigs[rng() % 4];
    p.tempo_bpm = 70.0 + 70.0 * unit(rng);

    const auto& steps = p.mode == Mode::major ? kMajorSteps : kHarmonicMinorSteps;
    // Piece-specific mix of beat subdivisions, chord thickness and bass motion.
    std::array<double, 4> weight{};
    for (auto& w : weight) w = unit(rng) * unit(rng) + 0.02;
    std::discrete_distribution<int> subdivision(weight.begin(), weight.end());
    const double chord_prob = 0.5 * unit(rng);
    const bool held_bass = unit(rng) < 0.5;
    const int base = 60 + p.tonic - (p.tonic > 6 ? 12 : 0) + static_cast<int>(rng() % 3) * 4 - 4;
    // Enough whole bars to last at least 4.3 s at the fastest performance.
    const double beats_per_bar = p.ts.numerator;
    const double needed = 4.3 * p.tempo_bpm * 1.3 / 60.0;
    const double bars = std::ceil(needed / beats_per_bar);
    const int total_beats = static_cast<int>(bars * beats_per_bar);

    auto pitch_of = [&](int degree) {
        const int octave = degree >= 0 ? degree / 7 : (degree - 6) / 7;
        const int within = ((degree % 7) + 7) % 7;
        return base + 12 * octave + steps[static_cast<std::size_t>(within)];
    };
    std::vector<score::Note> notes;
    int degree = 0;
    for (int beat = 0; beat < total_beats; ++beat) {
        const int sub = 1 + subdivision(rng);
        for (int s = 0; s < sub; ++s) {
            degree = std::clamp(degree + static_cast<int>(rng() % 5) - 2, -3, 9);
            const double onset = beat + static_cast<double>(s) / sub;
            notes.push_back({onset, 1.0 / sub, pitch_of(degree)});
            if (unit(rng) < chord_prob) notes.push_back({onset, 1.0 / sub, pitch_of(degree + 2)});
        }
        // Bass on the tonic, fifth or third of the key.
        static const int kBass[] = {0, 4, 2, 4};
        const int bass = pitch_of(kBass[beat % 4] - 7);
        if (!held_bass) {
            notes.push_back({static_cast<double>(beat), 1.0, bass});
        } else if (beat % 2 == 0) {
            notes.push_back({static_cast<double>(beat), beat + 1 < total_beats ? 2.0 : 1.0, bass});
        }
    }
    p.notes = score::make_note_list(std::move(notes), p.ts);
    return p;
}

Pianist make_pianist(std::size_t j, std::uint64_t seed) {
    auto rng = make_rng(seed, 2, j);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Pianist q;
    q.id = "pianist" + std::to_string(j + 1);
    q.tempo_factor = std::exp(-0.25 + 0.5 * unit(rng));
    q.gain = std::pow(10.0, (-16.0 + 12.0 * unit(rng)) / 20.0);
    q.brightness = 0.25 + 0.55 * unit(rng);
    q.articulation = 0.4 + 0.6 * unit(rng);
    q.attack = 0.03 + 0.3 * unit(rng);
    return q;
}

// Additive piano-like rendering: decaying harmonics plus a short noise click per onset.
std::vector<double> render(const Piece& piece, const Pianist& pianist, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double clip_tempo = piece.tempo_bpm * pianist.tempo_factor * std::exp(0.06 * normal(rng));
    const double gain = pianist.gain * std::exp(0.15 * normal(rng));
    const double brightness = std::clamp(pianist.brightness + 0.05 * normal(rng), 0.1, 0.95);
    const double articulation = std::clamp(pianist.articulation + 0.05 * normal(rng), 0.2, 1.0);
    const double sec_per_beat = 60.0 / clip_tempo;
    const double sr = dsp::kSampleRate;

    const double length_s = piece.notes.total_beats() * sec_per_beat + 0.05;
    std::vector<double> out(static_cast<std::size_t>(std::ceil(length_s * sr)), 0.0);
    for (const auto& note : piece.notes.notes) {
        const auto start = static_cast<std::size_t>(std::lround(note.onset_beats * sec_per_beat * sr));
        const double sound_s = std::max(0.03, note.duration_beats * sec_per_beat * articulation);
        const auto len = std::min(out.size() - start, static_cast<std::size_t>((sound_s + 0.02) * sr));
        const double f0 = 440.0 * std::pow(2.0, (note.pitch - 69) / 12.0);
        const double velocity = gain * (0.8 + 0.4 * unit(rng));
        const double decay = 1.0 / (0.25 + 0.5 * sound_s);
        for (int h = 1; h <= 8; ++h) {
            const double f = f0 * h;
            if (f > 10000.0) break;
            const double amp = velocity * std::pow(brightness, h - 1) / h;
            std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * unit(rng));
            const std::complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi * f / sr);
            const double step = std::exp(-decay * h * 0.5 / sr);
            double fall = 1.0;
            for (std::size_t n = 0; n < len; ++n) {
                const double t = static_cast<double>(n) / sr;
                double env = fall * std::min(1.0, t / 0.004);
                if (t > sound_s) env *= std::max(0.0, 1.0 - (t - sound_s) / 0.02);
                out[start + n] += amp * env * z.imag();
                z *= w;
                fall *= step;
                if ((n & 1023) == 1023) z /= std::abs(z);
            }
        }
        const auto click = std::min<std::size_t>(out.size() - start, 88);
        for (std::size_t n = 0; n < click; ++n) {
            out[start + n] += velocity * pianist.attack * normal(rng) * std::exp(-static_cast<double>(n) / 20.0);
        }
    }
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    if (peak > 0.95) {
        for (double& v : out) v *= 0.95 / peak;
    }
    return dsp::quantize_pcm16(out);
}

Eigen::VectorXd zscore(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().mean());
    if (!(sd > 0.0)) throw NumericalError("synthetic corpus: planted feature has zero variance");
    return (v.array() - mean) / sd;
}

std::size_t feature_index(const std::string& name) {
    const auto& names = dsp::LowLevelVector::names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw InputError("unknown low-level feature " + name);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw InputError("cannot write " + path.string());
}

}  // namespace

SynthSummary run_synthcorpus(const SynthOptions& o) {
    if (o.pieces < 2 || o.pianists < 2) throw UsageError("synthcorpus needs at least 2 pieces and 2 pianists");
    if (o.pieces > 99) throw UsageError("synthcorpus supports at most 99 pieces");
    fs::create_directories(o.out_dir / "audio");
    fs::create_directories(o.out_dir / "scores");

    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < o.pieces; ++i) pieces.push_back(make_piece(i, o.seed));
    std::vector<Pianist> pianists;
    for (std::size_t j = 0; j < o.pianists; ++j) pianists.push_back(make_pianist(j, o.seed));

    std::vector<ClipRecord> clips;
    const auto n = static_cast<Eigen::Index>(o.pieces * o.pianists);
    Eigen::MatrixXd lowlevel(n, static_cast<Eigen::Index>(dsp::LowLevelVector::kSize));
    Eigen::VectorXd mode(n);
    std::vector<std::size_t> piece_of;
    for (std::size_t i = 0; i < o.pieces; ++i) {
        const Piece& p = pieces[i];
        const fs::path score_rel = fs::path("scores") / (p.id + ".csv");
        score::write_notes(o.out_dir / score_rel, p.notes);
        const double est_mode = score::extract_score(p.notes).mode;
        for (std::size_t j = 0; j < o.pianists; ++j) {
            const auto r = static_cast<Eigen::Index>(clips.size());
            ClipRecord c;
            c.piece_id = p.id;
            c.pianist_id = pianists[j].id;
            c.clip_id = p.id + "_" + c.pianist_id;
            c.audio_path = o.out_dir / "audio" / (c.clip_id + ".wav");
            c.score_path = o.out_dir / score_rel;
            c.time_signature = p.ts;
            c.notated_key = p.mode == Mode::major ? kTonicNames[static_cast<std::size_t>(p.tonic)]
                                                  : std::string(kTonicNames[static_cast<std::size_t>(p.tonic)]);
            if (p.mode == Mode::minor) {
                for (auto& ch : c.notated_key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            }
            c.notated_mode = p.mode;

            auto rng = make_rng(o.seed, 3, i * 1000 + j);
            const std::vector<double> samples = render(p, pianists[j], rng);
            dsp::write_wav(c.audio_path, samples, dsp::WavEncoding::pcm16);
            // Features of exactly what a reader will decode.
            const dsp::LowLevelVector v = dsp::extract_lowlevel(dsp::AudioClip(samples));
            for (std::size_t k = 0; k < v.values.size(); ++k) lowlevel(r, static_cast<Eigen::Index>(k)) = v.values[k];
            mode(r) = est_mode;
            piece_of.push_back(i);
            clips.push_back(std::move(c));
        }
        spdlog::info("synthcorpus: piece {} rendered", p.id);
    }
    const fs::path manifest = o.out_dir / "manifest.csv";
    write_manifest(manifest, clips);

    // Planted targets: fixed weights on z-scored extracted features, unit-variance signal, then noise.
    auto rng = make_rng(o.seed, 4, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto planted = [&](const std::vector<std::string>& names, const std::vector<double>& weights) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < names.size(); ++k) {
            s += weights[k] * zscore(lowlevel.col(static_cast<Eigen::Index>(feature_index(names[k]))));
        }
        return zscore(s);
    };
    const std::vector<double> arousal_w = {0.6, 0.5, 0.4}, valence_w = {0.6, -0.5, 0.4};
    const Eigen::VectorXd a_signal = planted(kArousalPlanted, arousal_w);
    const Eigen::VectorXd v_signal = planted(kValencePlanted, valence_w);
    Eigen::VectorXd a = a_signal, v = v_signal;
    for (Eigen::Index r = 0; r < n; ++r) a(r) += normal(rng) / kPlantedSnr;
    for (Eigen::Index r = 0; r < n; ++r) v(r) += normal(rng) / kPlantedSnr;
    const double a_scale = std::min(12.0, 42.0 / a.cwiseAbs().maxCoeff());
    const double v_scale = std::min(1.2, 4.2 / v.cwiseAbs().maxCoeff());
    const Eigen::VectorXd arousal = (a * a_scale).array() + 50.0;
    const Eigen::VectorXd valence = v * v_scale;

    // Per-rater rows: zero-sum deviations, so each clip's mean is the planted value.
    std::string ann = "clip_id,rater_id,arousal,valence\n";
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& c = clips[static_cast<std::size_t>(r)];
        std::vector<double> da(kSynthRaters), dv(kSynthRaters);
        for (std::size_t k = 0; k < kSynthRaters; ++k) {
            da[k] = 8.0 * normal(rng);
            dv[k] = 0.8 * normal(rng);
        }
        auto centre_and_fit = [](std::vector<double>& d, double mean, double lo, double hi) {
            double m = 0.0;
            for (double x : d) m += x;
            m /= static_cast<double>(d.size());
            double shrink = 1.0;
            for (double& x : d) {
                x -= m;
                if (mean + x > hi) shrink = std::min(shrink, (hi - mean) / x);
                if (mean + x < lo) shrink = std::min(shrink, (lo - mean) / x);
            }
            for (double& x : d) x *= shrink;
        };
        centre_and_fit(da, arousal(r), kArousalMin, kArousalMax);
        centre_and_fit(dv, valence(r), kValenceMin, kValenceMax);
        const std::size_t j = static_cast<std::size_t>(r) % o.pianists;
        for (std::size_t k = 0; k < kSynthRaters; ++k) {
            const std::string rater = "r" + std::to_string(j + 1) + "_" + two_digits(k + 1);
            ann += csv::join_row({c.clip_id, rater, csv::format_real(std::clamp(arousal(r) + da[k], kArousalMin, kArousalMax)),
                                  csv::format_real(std::clamp(valence(r) + dv[k], kValenceMin, kValenceMax))}) +
                   "\n";
        }
    }
    const fs::path annotations = o.out_dir / "annotations.csv";
    write_text(annotations, ann);

    Eigen::MatrixXd Z(n, lowlevel.cols());
    for (Eigen::Index k = 0; k < lowlevel.cols(); ++k) {
        const Eigen::VectorXd col = lowlevel.col(k);
        const double sd = std::sqrt((col.array() - col.mean()).square().mean());
        Z.col(k) = sd > 0.0 ? Eigen::VectorXd((col.array() - col.mean()) / sd) : Eigen::VectorXd::Zero(n);
    }

    // Mid-level: noisy views of the planted signals, other features, and the estimated mode.
    std::string mid = "clip_id";
    for (auto name : embedding::kMidLevelNames) mid += "," + std::string(name);
    mid += "\n";
    auto col = [&](const char* name) { return Z.col(static_cast<Eigen::Index>(feature_index(name))); };
    for (Eigen::Index r = 0; r < n; ++r) {
        const double values[7] = {
            0.7 * col("pitch_salience_mean")(r) + 0.3 * v_signal(r),
            0.6 * col("onset_rate")(r) - 0.4 * col("frame_loudness_std")(r),
            0.8 * col("tempo_bpm")(r),
            0.7 * col("onset_count_normalized")(r),
            0.7 * col("dissonance_mean")(r) - 0.2 * v_signal(r),
            0.6 * col("spectral_flatness_mean")(r),
            1.5 * mode(r) - 0.3 * v_signal(r),
        };
        std::vector<std::string> fields{clips[static_cast<std::size_t>(r)].clip_id};
        for (double x : values) fields.push_back(csv::format_real(x + 0.3 * normal(rng)));
        mid += csv::join_row(fields) + "\n";
    }
    const fs::path midlevel = o.out_dir / "midlevel.csv";
    write_text(midlevel, mid);

    // 512-dim embeddings of rank 8 plus small isotropic noise.
    constexpr Eigen::Index kLatent = 8;
    Eigen::MatrixXd latent(n, kLatent);
    latent.col(0) = a_signal;
    latent.col(1) = v_signal;
    const char* extra[] = {"spectral_centroid_mean", "tempo_bpm", "frame_loudness_mean", "dissonance_mean",
                           "spectral_rolloff_mean", "pitch_salience_std"};
    for (Eigen::Index k = 0; k < 6; ++k) latent.col(k + 2) = col(extra[k]);
    Eigen::MatrixXd loading(kLatent, static_cast<Eigen::Index>(embedding::kDeamEmbeddingDim));
    for (Eigen::Index i = 0; i < loading.rows(); ++i) {
        for (Eigen::Index j = 0; j < loading.cols(); ++j) loading(i, j) = normal(rng) / std::sqrt(1.0 + i);
    }
    const Eigen::MatrixXd emb = latent * loading;
    std::string embtext = "clip_id";
    for (std::size_t d = 1; d <= embedding::kDeamEmbeddingDim; ++d) embtext += ",e" + std::to_string(d);
    embtext += "\n";
    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<std::string> fields{clips[static_cast<std::size_t>(r)].clip_id};
        for (Eigen::Index d = 0; d < emb.cols(); ++d) fields.push_back(csv::format_real(emb(r, d) + 0.05 * normal(rng)));
        embtext += csv::join_row(fields) + "\n";
    }
    const fs::path embeddings = o.out_dir / "embeddings.csv";
    write_text(embeddings, embtext);

    nlohmann::ordered_json truth = {
        {"seed", o.seed},
        {"pieces", o.pieces},
        {"pianists", o.pianists},
        {"snr_std_ratio", kPlantedSnr},
        {"arousal", {{"features", kArousalPlanted}, {"weights", arousal_w}, {"scale", a_scale}, {"offset", 50.0}}},
        {"valence", {{"features", kValencePlanted}, {"weights", valence_w}, {"scale", v_scale}, {"offset", 0.0}}},
    };
    write_text(o.out_dir / "planted.json", truth.dump(2) + "\n");

    return {manifest, annotations, midlevel, embeddings, clips.size()};
}

}  // namespace emoperf::app
