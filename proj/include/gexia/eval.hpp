#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gexia/alignment.hpp"

namespace gexia {

struct RetrievalReport {
    std::string direction;  // T2V or V2T
    double r1 = 0.0;
    double r5 = 0.0;
    double r10 = 0.0;
    double mdr = 0.0;
    std::int64_t n_queries = 0;

    bool operator==(const RetrievalReport& o) const {
        return direction == o.direction && r1 == o.r1 && r5 == o.r5 && r10 == o.r10 && mdr == o.mdr &&
               n_queries == o.n_queries;
    }
};

// Ranks each query's ground-truth candidate in S (queries x candidates).
// Ties break deterministically by candidate index: equal-scoring candidates
// with a smaller index rank ahead of the ground truth.
RetrievalReport retrieve(const Tensor<double>& sim, const std::vector<std::int64_t>& ground_truth,
                         const std::string& direction);

// Bilinear resize without corner alignment (half-pixel centers).
TensorPtr<double> bilinear_resize(const Tensor<double>& grid, std::int64_t out_h, std::int64_t out_w);

// Embeds records through the video and text branches at the given iteration
// counts; rows are pooled embeddings, one per record.
template <typename S>
struct EmbeddedRecords {
    std::vector<std::vector<double>> video;
    std::vector<std::vector<double>> text;
};

template <typename S>
TensorPtr<S> embed_video_volume(const Model<S>& model, const FrameVolume& frames, std::int64_t iters) {
    Tape<S> tape;
    auto f = encode_video(tape, frames, model.encoder_cfg, model.video_encoder);
    auto lat = iam_forward(tape, f, model.video_iam, iters, model.attend());
    return pool_latents(tape, lat);
}

template <typename S>
TensorPtr<S> embed_text_string(const Model<S>& model, const std::string& text, std::int64_t iters) {
    Tape<S> tape;
    auto f = encode_text(tape, tokenize(text, model.encoder_cfg), model.encoder_cfg, model.text_encoder);
    auto lat = iam_forward(tape, f, model.text_iam, iters, model.attend());
    return pool_latents(tape, lat);
}

template <typename S>
EmbeddedRecords<S> embed_records(const Model<S>& model, const std::vector<const ClipRecord*>& records,
                                 const std::filesystem::path& data_dir, std::int64_t video_iters,
                                 std::int64_t text_iters) {
    EmbeddedRecords<S> out;
    for (const ClipRecord* rec : records) {
        BatchSample sample = load_sample(*rec, data_dir, model.encoder_cfg);
        auto v = embed_video_volume(model, sample.frames, video_iters);
        auto t = embed_text_string(model, rec->text, text_iters);
        out.video.emplace_back(v->data.begin(), v->data.end());
        out.text.emplace_back(t->data.begin(), t->data.end());
    }
    return out;
}

inline double cosine_of(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0 || nb <= 0) throw DegenerateInputError("cosine over zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// n x n cosine matrix, entry (i, j) = cos(video_i, text_j).
template <typename S>
TensorPtr<double> pair_similarity_matrix(const EmbeddedRecords<S>& emb) {
    const std::int64_t n = static_cast<std::int64_t>(emb.video.size());
    auto sim = zeros<double>(Shape{n, n});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) sim->at(i, j) = cosine_of(emb.video[static_cast<std::size_t>(i)],
                                                                       emb.text[static_cast<std::size_t>(j)]);
    return sim;
}

// Paired T2V and V2T reports for index-paired records.
template <typename S>
std::pair<RetrievalReport, RetrievalReport> retrieval_reports(const Model<S>& model,
                                                              const std::vector<const ClipRecord*>& records,
                                                              const std::filesystem::path& data_dir,
                                                              std::int64_t video_iters, std::int64_t text_iters) {
    auto emb = embed_records(model, records, data_dir, video_iters, text_iters);
    auto sim = pair_similarity_matrix(emb);
    std::vector<std::int64_t> gt(emb.video.size());
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = static_cast<std::int64_t>(i);
    Tape<double> tape;
    auto v2t = retrieve(*sim, gt, "V2T");
    auto t2v_sim = ops::transpose(tape, sim);
    auto t2v = retrieve(*t2v_sim, gt, "T2V");
    return {t2v, v2t};
}

struct SweepRow {
    std::int64_t video_iters = 0;
    std::int64_t text_iters = 0;
    RetrievalReport t2v;
    RetrievalReport v2t;
};

// Inference-time #iter sweep; parameters are never mutated.
template <typename S>
std::vector<SweepRow> ablation_sweep(const Model<S>& model, const std::vector<const ClipRecord*>& records,
                                     const std::filesystem::path& data_dir,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& settings) {
    std::vector<SweepRow> rows;
    for (auto [vi, ti] : settings) {
        auto [t2v, v2t] = retrieval_reports(model, records, data_dir, vi, ti);
        rows.push_back(SweepRow{vi, ti, t2v, v2t});
    }
    return rows;
}

struct ZeroShotResult {
    std::size_t predicted = 0;
    std::vector<double> scores;
};

// Prompted zero-shot classification: embed "template % label" per label and
// pick the highest cosine against the visual embedding; ties break by index.
template <typename S>
ZeroShotResult zero_shot_classify(const Model<S>& model, const ClipRecord& record,
                                  const std::filesystem::path& data_dir, const std::vector<std::string>& labels,
                                  const std::string& prompt_template, const IterPolicy& policy) {
    if (labels.size() < 2) throw UsageError("zero-shot classification needs at least 2 labels");
    const auto iters = policy.at(to_string(record.granularity));
    BatchSample sample = load_sample(record, data_dir, model.encoder_cfg);
    auto v = embed_video_volume(model, sample.frames, iters.video_iters);
    ZeroShotResult result;
    result.scores.reserve(labels.size());
    for (const std::string& label : labels) {
        std::string prompt = prompt_template;
        const std::string placeholder = "{label}";
        if (auto pos = prompt.find(placeholder); pos != std::string::npos) {
            prompt.replace(pos, placeholder.size(), label);
        }
        auto t = embed_text_string(model, prompt, iters.text_iters);
        result.scores.push_back(ops::cosine_sim(*v, *t));
    }
    for (std::size_t k = 1; k < result.scores.size(); ++k) {
        if (result.scores[k] > result.scores[result.predicted]) result.predicted = k;
    }
    return result;
}

inline std::string default_zero_shot_prompt() { return "A video of a {label}."; }

struct HeatmapGeometry {
    std::int64_t patch = 32;
    std::int64_t stride = 16;
    bool fill_with_value = false;  // default zero fill
    std::uint8_t fill_value = 0;
};

struct HeatmapResult {
    std::vector<TensorPtr<double>> grids;    // one G_h x G_w score grid per frame
    std::vector<TensorPtr<double>> resized;  // one H x W map per frame
    double baseline_sim = 0.0;
    std::int64_t grid_h = 0;
    std::int64_t grid_w = 0;
};

// Occlusion saliency: the alignment score of a patch is the drop in pair
// similarity when that patch is masked. The text embedding is computed once;
// only the video embedding is recomputed per mask position.
template <typename S>
HeatmapResult alignment_heatmap(const Model<S>& model, const FrameVolume& frames, const std::string& text,
                                const HeatmapGeometry& geom, std::int64_t video_iters, std::int64_t text_iters) {
    const std::int64_t H = frames.h, W = frames.w;
    if (geom.patch > H || geom.patch > W) throw UsageError("mask patch exceeds frame dimensions");
    if (geom.patch < 1 || geom.stride < 1) throw UsageError("mask patch and stride must be positive");
    HeatmapResult result;
    result.grid_h = (H - geom.patch) / geom.stride + 1;
    result.grid_w = (W - geom.patch) / geom.stride + 1;

    auto text_emb = embed_text_string(model, text, text_iters);
    std::vector<double> t_emb(text_emb->data.begin(), text_emb->data.end());
    auto video_emb = embed_video_volume(model, frames, video_iters);
    std::vector<double> v_emb(video_emb->data.begin(), video_emb->data.end());
    result.baseline_sim = cosine_of(v_emb, t_emb);

    const std::uint8_t fill = geom.fill_with_value ? geom.fill_value : 0;
    for (std::int64_t t = 0; t < frames.d; ++t) {
        auto grid = zeros<double>(Shape{result.grid_h, result.grid_w});
        for (std::int64_t gy = 0; gy < result.grid_h; ++gy) {
            for (std::int64_t gx = 0; gx < result.grid_w; ++gx) {
                FrameVolume masked = frames;
                const std::int64_t y0 = gy * geom.stride, x0 = gx * geom.stride;
                for (std::int64_t y = 0; y < geom.patch; ++y)
                    for (std::int64_t x = 0; x < geom.patch; ++x)
                        for (std::int64_t c = 0; c < 3; ++c) masked.at(t, y0 + y, x0 + x, c) = fill;
                auto masked_emb = embed_video_volume(model, masked, video_iters);
                std::vector<double> m_emb(masked_emb->data.begin(), masked_emb->data.end());
                grid->at(gy, gx) = result.baseline_sim - cosine_of(m_emb, t_emb);
            }
        }
        result.resized.push_back(bilinear_resize(*grid, H, W));
        result.grids.push_back(std::move(grid));
    }
    return result;
}

}  // namespace gexia
