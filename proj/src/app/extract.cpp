#include "emoperf/app/extract.hpp"

#include "emoperf/audio.hpp"
#include "emoperf/csv.hpp"
#include "emoperf/embedding.hpp"
#include "emoperf/error.hpp"
#include "emoperf/lowlevel.hpp"
#include "emoperf/score.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <optional>
#include <set>
#include <thread>

namespace emoperf::app {

namespace fs = std::filesystem;

std::string feature_file_name(FeatureSet set) { return "features_" + std::string(to_string(set)) + ".csv"; }

void validate(const ExtractOptions& o) {
    if (o.sets.empty()) throw UsageError("no feature sets requested");
    for (FeatureSet s : o.sets) {
        if (s == FeatureSet::deam_pca && !o.embeddings) {
            throw UsageError("feature set deam_pca needs --embeddings <512-column csv>");
        }
        if (s == FeatureSet::midlevel && !o.midlevel) {
            throw UsageError("feature set midlevel needs --midlevel <7-column csv>");
        }
    }
    if (o.workers == 0) throw UsageError("--workers must be at least 1");
}

namespace {

struct Row {
    std::optional<std::vector<double>> values;
    std::string error;
};

FeatureTable collect(FeatureSet set, std::vector<std::string> names, const std::vector<ClipRecord>& clips,
                     std::vector<Row>& rows, ExtractSummary& summary) {
    FeatureTable table;
    table.set = set;
    table.names = std::move(names);
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (rows[i].values) {
            table.clip_ids.push_back(clips[i].clip_id);
            table.rows.push_back(std::move(*rows[i].values));
        } else {
            const std::string msg = clips[i].clip_id + " (" + std::string(to_string(set)) + "): " + rows[i].error;
            spdlog::error("{}", msg);
            summary.failures.push_back(msg);
        }
    }
    return table;
}

std::vector<Row> lowlevel_rows(const std::vector<ClipRecord>& clips, unsigned workers) {
    std::vector<Row> rows(clips.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < clips.size(); i = next++) {
            try {
                const dsp::LowLevelVector v = dsp::extract_lowlevel(dsp::read_wav(clips[i].audio_path));
                if (v.tempo_fallback) spdlog::warn("{}: no rhythmic content, tempo set to the prior centre", clips[i].clip_id);
                if (v.silent) spdlog::warn("{}: clip is silent", clips[i].clip_id);
                rows[i].values.emplace(v.values.begin(), v.values.end());
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(clips.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
}

std::vector<Row> score_rows(const std::vector<ClipRecord>& clips) {
    std::vector<Row> rows(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (!clips[i].score_path) {
            rows[i].error = "no score file in the manifest";
            continue;
        }
        try {
            const auto v = score::extract_score(score::parse_notes(*clips[i].score_path, clips[i].time_signature)).values();
            rows[i].values.emplace(v.begin(), v.end());
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    }
    return rows;
}

// Rows of an embedding table in manifest order; clips without a row fail.
std::vector<Row> embedding_rows(const std::vector<ClipRecord>& clips, const embedding::EmbeddingTable& table) {
    std::map<std::string, Eigen::Index> index;
    for (std::size_t r = 0; r < table.clip_ids.size(); ++r) index.emplace(table.clip_ids[r], static_cast<Eigen::Index>(r));
    std::set<std::string> known;
    for (const auto& c : clips) known.insert(c.clip_id);
    for (const auto& id : table.clip_ids) {
        if (!known.contains(id)) spdlog::warn("embedding row '{}' is not in the manifest; ignored", id);
    }
    std::vector<Row> rows(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        auto it = index.find(clips[i].clip_id);
        if (it == index.end()) {
            rows[i].error = "no row in the embedding table";
            continue;
        }
        const Eigen::VectorXd v = table.values.row(it->second).transpose();
        rows[i].values.emplace(v.data(), v.data() + v.size());
    }
    return rows;
}

}  // namespace

ExtractSummary run_extract(const ExtractOptions& options) {
    validate(options);
    const std::vector<ClipRecord> clips = load_manifest(options.manifest);
    fs::create_directories(options.out_dir);
    ExtractSummary summary;
    summary.clips = clips.size();

    std::set<FeatureSet> done;
    for (FeatureSet set : options.sets) {
        if (!done.insert(set).second) continue;
        FeatureTable table;
        std::vector<std::string> preamble{"feature_set=" + std::string(to_string(set))};
        switch (set) {
            case FeatureSet::lowlevel: {
                auto rows = lowlevel_rows(clips, options.workers);
                const auto& n = dsp::LowLevelVector::names();
                table = collect(set, {n.begin(), n.end()}, clips, rows, summary);
                break;
            }
            case FeatureSet::score: {
                auto rows = score_rows(clips);
                const auto& n = score::ScoreFeatureVector::names();
                table = collect(set, {n.begin(), n.end()}, clips, rows, summary);
                break;
            }
            case FeatureSet::midlevel: {
                const auto emb = embedding::load_embeddings(*options.midlevel, embedding::kMidLevelNames.size());
                auto rows = embedding_rows(clips, emb);
                table = collect(set, emb.names, clips, rows, summary);
                break;
            }
            case FeatureSet::deam_pca: {
                const auto emb = embedding::load_embeddings(*options.embeddings, embedding::kDeamEmbeddingDim);
                auto rows = embedding_rows(clips, emb);
                const FeatureTable raw = collect(set, emb.names, clips, rows, summary);
                // The reduction is fitted on the clips being written, in manifest order.
                embedding::EmbeddingTable ordered;
                ordered.names = raw.names;
                ordered.clip_ids = raw.clip_ids;
                ordered.values.resize(static_cast<Eigen::Index>(raw.rows.size()),
                                      static_cast<Eigen::Index>(embedding::kDeamEmbeddingDim));
                for (std::size_t r = 0; r < raw.rows.size(); ++r) {
                    for (std::size_t c = 0; c < raw.rows[r].size(); ++c) {
                        ordered.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = raw.rows[r][c];
                    }
                }
                embedding::PcaModel model;
                table = embedding::deam_pca_features(ordered, embedding::kDefaultVarianceTarget, &model);
                preamble.push_back("pca_components=" + std::to_string(model.k) + " cumulative_variance_ratio=" +
                                   csv::format_real(model.explained_variance_ratio_cumulative(
                                       static_cast<Eigen::Index>(model.k) - 1)));
                spdlog::info("deam_pca: {} components", model.k);
                break;
            }
        }
        const fs::path path = options.out_dir / feature_file_name(set);
        save_feature_table(path, table, preamble);
        summary.files[set] = path;
        spdlog::info("wrote {} ({} rows)", path.string(), table.rows.size());
    }
    return summary;
}

}  // namespace emoperf::app
