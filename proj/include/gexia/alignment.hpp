#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gexia/checkpoint_io.hpp"
#include "gexia/config.hpp"
#include "gexia/featurizer.hpp"
#include "gexia/gxt.hpp"
#include "gexia/iam.hpp"
#include "gexia/manifest.hpp"
#include "gexia/optim.hpp"

namespace gexia {

// Full trainable state: both encoders, both IAMs, and the temperature.
template <typename S>
struct Model {
    EncoderConfig encoder_cfg;
    IamConfig iam_cfg;
    VideoEncoderParams<S> video_encoder;
    TextEncoderParams<S> text_encoder;
    IamParams<S> video_iam;
    IamParams<S> text_iam;
    TensorPtr<S> log_tau;

    static Model init(const EncoderConfig& enc, const IamConfig& iam, double tau_init, std::uint64_t seed) {
        enc.validate();
        iam.validate();
        Model m;
        m.encoder_cfg = enc;
        m.iam_cfg = iam;
        m.video_encoder = VideoEncoderParams<S>::init(enc, seed, "video_encoder");
        m.text_encoder = TextEncoderParams<S>::init(enc, seed, "text_encoder");
        IamConfig vcfg = iam, tcfg = iam;
        m.video_iam = IamParams<S>::init(vcfg, enc.c_v, seed, "video_iam");
        m.text_iam = IamParams<S>::init(tcfg, enc.c_t, seed, "text_iam");
        m.log_tau = scalar_tensor<S>(static_cast<S>(std::log(tau_init)), true);
        return m;
    }

    AttendOptions attend() const {
        AttendOptions o;
        o.heads = iam_cfg.heads;
        return o;
    }

    double tau() const { return std::exp(static_cast<double>(log_tau->data[0])); }

    std::vector<std::pair<std::string, TensorPtr<S>>> encoder_params() const {
        auto out = video_encoder.named("video_encoder");
        auto t = text_encoder.named("text_encoder");
        out.insert(out.end(), t.begin(), t.end());
        return out;
    }

    std::vector<std::pair<std::string, TensorPtr<S>>> other_params() const {
        auto out = video_iam.named("video_iam");
        auto t = text_iam.named("text_iam");
        out.insert(out.end(), t.begin(), t.end());
        out.emplace_back("log_tau", log_tau);
        return out;
    }

    std::vector<std::pair<std::string, TensorPtr<S>>> named_params() const {
        auto out = encoder_params();
        auto t = other_params();
        out.insert(out.end(), t.begin(), t.end());
        return out;
    }
};

// Cosine-similarity matrix: entry (i, j) compares video i against text j.
template <typename S>
TensorPtr<S> sim_matrix(Tape<S>& tape, const TensorPtr<S>& video, const TensorPtr<S>& text) {
    if (video->shape.rank() != 2 || text->shape.rank() != 2 || video->cols() != text->cols()) {
        throw DimensionError("sim_matrix expects B x D embedding matrices of equal width");
    }
    auto vn = ops::l2_normalize_rows(tape, video);
    auto tn = ops::l2_normalize_rows(tape, text);
    return ops::matmul(tape, vn, ops::transpose(tape, tn));
}

// Symmetric contrastive loss over S/tau: mean of the video-to-text and
// text-to-video cross-entropies against the diagonal. tau = exp(log_tau)
// stays positive and receives gradient.
template <typename S>
TensorPtr<S> vtc_loss(Tape<S>& tape, const TensorPtr<S>& sim, const TensorPtr<S>& log_tau) {
    if (sim->rows() != sim->cols() || sim->rows() < 2) {
        throw UsageError("vtc_loss expects a square similarity matrix with B >= 2");
    }
    auto inv_tau = ops::exp(tape, ops::scale(tape, log_tau, -1.0));
    auto logits = ops::scale_by(tape, sim, inv_tau);
    std::vector<std::int64_t> diag(static_cast<std::size_t>(sim->rows()));
    std::iota(diag.begin(), diag.end(), 0);
    auto l_v2t = ops::cross_entropy_rows(tape, logits, diag);
    auto l_t2v = ops::cross_entropy_rows(tape, ops::transpose(tape, logits), diag);
    return ops::scale(tape, ops::add(tape, l_v2t, l_t2v), 0.5);
}

// Fully-connected probe on a pooled video embedding.
template <typename S>
TensorPtr<S> classify_head(Tape<S>& tape, const TensorPtr<S>& embedding, const TensorPtr<S>& weight,
                           const TensorPtr<S>& bias) {
    auto row = ops::reshape(tape, embedding, Shape{1, embedding->numel()});
    auto logits = ops::add_row_bias(tape, ops::matmul(tape, row, weight), bias);
    return ops::reshape(tape, logits, Shape{logits->cols()});
}

// One loaded pair: frames already sampled to the target count, text tokenized.
struct BatchSample {
    FrameVolume frames;
    TokenSequence tokens;
};

inline std::int64_t frames_for_granularity(const EncoderConfig& cfg, Granularity g) {
    switch (g) {
        case Granularity::SVST: return cfg.d_short;
        case Granularity::LVLT:
        case Granularity::LVST: return cfg.d_long;
        case Granularity::IT: return 1;
    }
    throw DataError("unknown granularity");
}

inline BatchSample load_sample(const ClipRecord& rec, const std::filesystem::path& base_dir,
                               const EncoderConfig& cfg) {
    BatchSample s;
    const std::string& rel = rec.is_image() ? rec.image_path : rec.video_path;
    FrameVolume raw;
    try {
        raw = read_frames(base_dir / rel);
    } catch (const std::exception& e) {
        throw DataError("record '" + rec.id + "': " + e.what());
    }
    const std::int64_t d = frames_for_granularity(cfg, rec.granularity);
    s.frames = raw.d == d ? std::move(raw) : sample_frames(raw, d);
    s.tokens = tokenize(rec.text, cfg);
    return s;
}

template <typename S>
struct PairForward {
    TensorPtr<S> video_embeddings;  // B x D, pooled
    TensorPtr<S> text_embeddings;   // B x D, pooled
    TensorPtr<S> sim;               // B x B
    TensorPtr<S> loss;              // scalar
};

// Encode -> IAM -> pool for each pair, then similarity and VTC loss.
template <typename S>
PairForward<S> forward_pair(Tape<S>& tape, const Model<S>& model, const std::vector<BatchSample>& batch,
                            std::int64_t video_iters, std::int64_t text_iters) {
    if (batch.size() < 2) throw UsageError("contrastive forward needs a batch of >= 2 pairs");
    const AttendOptions opts = model.attend();
    std::vector<TensorPtr<S>> vrows, trows;
    for (const BatchSample& sample : batch) {
        auto vf = encode_video(tape, sample.frames, model.encoder_cfg, model.video_encoder);
        auto vl = iam_forward(tape, vf, model.video_iam, video_iters, opts);
        vrows.push_back(ops::reshape(tape, pool_latents(tape, vl), Shape{1, model.iam_cfg.latent_dim}));
        auto tf = encode_text(tape, sample.tokens, model.encoder_cfg, model.text_encoder);
        auto tl = iam_forward(tape, tf, model.text_iam, text_iters, opts);
        trows.push_back(ops::reshape(tape, pool_latents(tape, tl), Shape{1, model.iam_cfg.latent_dim}));
    }
    PairForward<S> out;
    out.video_embeddings = ops::concat_rows(tape, vrows);
    out.text_embeddings = ops::concat_rows(tape, trows);
    out.sim = sim_matrix(tape, out.video_embeddings, out.text_embeddings);
    out.loss = vtc_loss(tape, out.sim, model.log_tau);
    return out;
}

template <typename S>
AdamW<S> make_optimizer(const Model<S>& model, const TrainConfig& tcfg) {
    LrSchedule schedule;
    schedule.kind = tcfg.schedule == "cosine" ? LrSchedule::Kind::cosine : LrSchedule::Kind::constant;
    schedule.total_steps = tcfg.steps;
    schedule.min_lr = tcfg.min_lr;
    typename AdamW<S>::Group encoders{"encoders", {}, tcfg.lr_encoders, tcfg.weight_decay};
    for (auto& [name, p] : model.encoder_params()) encoders.params.push_back(p);
    typename AdamW<S>::Group other{"other", {}, tcfg.lr_other, tcfg.weight_decay};
    for (auto& [name, p] : model.other_params()) other.params.push_back(p);
    return AdamW<S>({encoders, other}, schedule);
}

namespace detail {

// Moment tensors are stored next to the parameters, named by slot order.
template <typename S>
std::vector<std::string> optimizer_slot_names(const Model<S>& model) {
    std::vector<std::string> names;
    for (auto& [name, p] : model.encoder_params()) names.push_back(name);
    for (auto& [name, p] : model.other_params()) names.push_back(name);
    return names;
}

}  // namespace detail

template <typename S>
void save_checkpoint(const std::filesystem::path& dir, const Model<S>& model, const RunConfig& config,
                     std::int64_t step, AdamW<S>* optimizer = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "tensors");
    CheckpointMeta meta;
    meta.dtype = std::is_same_v<S, float> ? "f32" : "f64";
    meta.step = step;
    meta.config_json = run_config_to_json_text(config);
    for (auto& [name, p] : model.named_params()) {
        gxt::write_tensor(dir / "tensors" / (name + ".gxt"), *p);
        meta.tensor_names.push_back(name);
    }
    if (optimizer != nullptr) {
        meta.has_optimizer = true;
        meta.optimizer_step = optimizer->step_count();
        auto slot_names = detail::optimizer_slot_names(model);
        for (std::size_t i = 0; i < slot_names.size(); ++i) {
            auto m = make_tensor<S>(Shape{static_cast<std::int64_t>(optimizer->moment_m(i).size())},
                                    optimizer->moment_m(i));
            auto v = make_tensor<S>(Shape{static_cast<std::int64_t>(optimizer->moment_v(i).size())},
                                    optimizer->moment_v(i));
            gxt::write_tensor(dir / "tensors" / ("opt.m." + slot_names[i] + ".gxt"), *m);
            gxt::write_tensor(dir / "tensors" / ("opt.v." + slot_names[i] + ".gxt"), *v);
        }
    }
    write_checkpoint_meta(dir, meta);
}

template <typename S>
struct LoadedCheckpoint {
    Model<S> model;
    RunConfig config;
    CheckpointMeta meta;
};

template <typename S>
LoadedCheckpoint<S> load_checkpoint(const std::filesystem::path& dir) {
    CheckpointMeta meta = read_checkpoint_meta(dir);
    const std::string want = std::is_same_v<S, float> ? "f32" : "f64";
    if (meta.dtype != want) {
        throw FormatError("checkpoint dtype is " + meta.dtype + ", expected " + want);
    }
    LoadedCheckpoint<S> out{Model<S>{}, run_config_from_json_text(meta.config_json), meta};
    out.model = Model<S>::init(out.config.encoder, out.config.iam, out.config.train.tau_init, out.config.seed);
    for (auto& [name, p] : out.model.named_params()) {
        auto t = gxt::read_tensor<S>(dir / "tensors" / (name + ".gxt"));
        if (t->shape != p->shape) {
            throw FormatError("checkpoint tensor '" + name + "' has shape " + t->shape.str() + ", expected " +
                              p->shape.str());
        }
        p->data = std::move(t->data);
    }
    return out;
}

template <typename S>
void load_optimizer_state(const std::filesystem::path& dir, const Model<S>& model, AdamW<S>& optimizer) {
    CheckpointMeta meta = read_checkpoint_meta(dir);
    if (!meta.has_optimizer) throw DataError("checkpoint has no optimizer state: " + dir.string());
    auto slot_names = detail::optimizer_slot_names(model);
    for (std::size_t i = 0; i < slot_names.size(); ++i) {
        auto m = gxt::read_tensor<S>(dir / "tensors" / ("opt.m." + slot_names[i] + ".gxt"));
        auto v = gxt::read_tensor<S>(dir / "tensors" / ("opt.v." + slot_names[i] + ".gxt"));
        if (m->data.size() != optimizer.moment_m(i).size()) throw FormatError("optimizer moment size mismatch");
        optimizer.moment_m(i) = m->data;
        optimizer.moment_v(i) = v->data;
    }
    optimizer.set_step_count(meta.optimizer_step);
}

}  // namespace gexia
