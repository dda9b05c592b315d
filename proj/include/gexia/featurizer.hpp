#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gexia/frames.hpp"
#include "gexia/ops.hpp"
#include "gexia/rng.hpp"
#include "gexia/tensor.hpp"

namespace gexia {

enum class Modality { video, text };

struct EncoderConfig {
    std::int64_t frame_h = 32;
    std::int64_t frame_w = 32;
    std::int64_t patch_size = 16;
    std::int64_t c_v = 64;   // video feature width
    std::int64_t c_t = 64;   // text feature width
    std::int64_t m = 32;     // max text tokens
    std::int64_t token_bytes = 2;
    std::int64_t vocab_size = 256;  // byte vocabulary; specials add 3
    std::int64_t d_short = 4;
    std::int64_t d_long = 8;

    std::int64_t patches_per_frame() const { return (frame_h / patch_size) * (frame_w / patch_size); }
    std::int64_t patch_dim() const { return patch_size * patch_size * 3; }

    void validate() const {
        if (patch_size <= 0 || frame_h % patch_size != 0 || frame_w % patch_size != 0) {
            throw ConfigError("frame dims must be divisible by patch_size");
        }
        if (d_short < 1 || d_long < 1 || d_short >= d_long) throw ConfigError("need 1 <= d_short < d_long");
        if (m < 1) throw ConfigError("m must be >= 1");
        if (c_v < 1 || c_t < 1) throw ConfigError("feature widths must be positive");
    }
};

// Special token ids appended after the byte vocabulary.
inline std::int64_t bos_id(const EncoderConfig& cfg) { return cfg.vocab_size; }
inline std::int64_t eos_id(const EncoderConfig& cfg) { return cfg.vocab_size + 1; }
inline std::int64_t pad_id(const EncoderConfig& cfg) { return cfg.vocab_size + 2; }

struct TokenSequence {
    std::vector<std::int64_t> ids;       // length m
    std::vector<std::uint8_t> mask;      // 1 = real token, 0 = padding
};

// M x C dense feature with per-row validity flags. Video features have
// M = d * P rows, text features M = m rows; masked rows hold zero vectors.
template <typename S>
struct DenseFeature {
    TensorPtr<S> matrix;
    Modality modality = Modality::video;
    std::vector<std::uint8_t> mask;

    std::int64_t rows() const { return matrix->rows(); }
    std::int64_t width() const { return matrix->cols(); }
};

// Uniformly spaced frame indices: index i picks floor(i * L / d).
inline std::vector<std::int64_t> sample_frame_indices(std::int64_t total_frames, std::int64_t d) {
    if (total_frames < 1) throw DataError("cannot sample frames from an empty video");
    if (d < 1) throw UsageError("frame count must be >= 1");
    std::vector<std::int64_t> idx(static_cast<std::size_t>(d));
    for (std::int64_t i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = (i * total_frames) / d;
    return idx;
}

inline FrameVolume sample_frames(const FrameVolume& video, std::int64_t d) {
    auto idx = sample_frame_indices(video.d, d);
    FrameVolume out = FrameVolume::blank(d, video.h, video.w);
    const std::size_t stride = static_cast<std::size_t>(video.h * video.w * 3);
    for (std::int64_t i = 0; i < d; ++i) {
        std::copy(video.rgb.begin() + static_cast<std::int64_t>(stride) * idx[static_cast<std::size_t>(i)],
                  video.rgb.begin() + static_cast<std::int64_t>(stride) * (idx[static_cast<std::size_t>(i)] + 1),
                  out.rgb.begin() + static_cast<std::int64_t>(stride) * i);
    }
    return out;
}

template <typename S>
struct VideoEncoderParams {
    TensorPtr<S> patch_proj;  // patch_dim x C_v
    TensorPtr<S> patch_bias;  // C_v
    TensorPtr<S> patch_pos;   // P x C_v
    TensorPtr<S> frame_pos;   // d_long x C_v

    static VideoEncoderParams init(const EncoderConfig& cfg, std::uint64_t seed, const std::string& prefix) {
        VideoEncoderParams p;
        const double fan_in = static_cast<double>(cfg.patch_dim());
        Rng r1(seed, prefix + ".patch_proj");
        p.patch_proj = randn<S>(Shape{cfg.patch_dim(), cfg.c_v}, r1, 1.0 / std::sqrt(fan_in), true);
        p.patch_bias = zeros<S>(Shape{cfg.c_v}, true);
        Rng r2(seed, prefix + ".patch_pos");
        p.patch_pos = randn<S>(Shape{cfg.patches_per_frame(), cfg.c_v}, r2, 0.02, true);
        Rng r3(seed, prefix + ".frame_pos");
        p.frame_pos = randn<S>(Shape{cfg.d_long, cfg.c_v}, r3, 0.02, true);
        return p;
    }

    std::vector<std::pair<std::string, TensorPtr<S>>> named(const std::string& prefix) const {
        return {{prefix + ".patch_proj", patch_proj},
                {prefix + ".patch_bias", patch_bias},
                {prefix + ".patch_pos", patch_pos},
                {prefix + ".frame_pos", frame_pos}};
    }
};

template <typename S>
struct TextEncoderParams {
    TensorPtr<S> tok_embed;  // (vocab_size + 3) x C_t
    TensorPtr<S> pos_embed;  // m x C_t

    static TextEncoderParams init(const EncoderConfig& cfg, std::uint64_t seed, const std::string& prefix) {
        TextEncoderParams p;
        Rng r1(seed, prefix + ".tok_embed");
        p.tok_embed = randn<S>(Shape{cfg.vocab_size + 3, cfg.c_t}, r1, 0.02, true);
        Rng r2(seed, prefix + ".pos_embed");
        p.pos_embed = randn<S>(Shape{cfg.m, cfg.c_t}, r2, 0.02, true);
        return p;
    }

    std::vector<std::pair<std::string, TensorPtr<S>>> named(const std::string& prefix) const {
        return {{prefix + ".tok_embed", tok_embed}, {prefix + ".pos_embed", pos_embed}};
    }
};

// Byte-level tokenization: BOS + bytes (+ EOS) right-padded to m.
inline TokenSequence tokenize(const std::string& text, const EncoderConfig& cfg) {
    const std::int64_t m = cfg.m;
    TokenSequence seq;
    seq.ids.reserve(static_cast<std::size_t>(m));
    seq.ids.push_back(bos_id(cfg));
    for (unsigned char c : text) {
        if (static_cast<std::int64_t>(seq.ids.size()) >= m - 1) break;
        seq.ids.push_back(static_cast<std::int64_t>(c));
    }
    seq.ids.push_back(eos_id(cfg));
    while (static_cast<std::int64_t>(seq.ids.size()) < m) seq.ids.push_back(pad_id(cfg));
    seq.ids.resize(static_cast<std::size_t>(m));
    seq.mask.assign(static_cast<std::size_t>(m), 0);
    for (std::size_t i = 0; i < seq.ids.size(); ++i) seq.mask[i] = seq.ids[i] == pad_id(cfg) ? 0 : 1;
    return seq;
}

inline std::string detokenize(const TokenSequence& seq, const EncoderConfig& cfg) {
    std::string out;
    for (std::int64_t id : seq.ids) {
        if (id >= 0 && id < cfg.vocab_size) out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    }
    return out;
}

// Flattens u8 frames into the d*P x patch_dim matrix, scaled to [0,1].
// Patches scan the frame grid row-major; pixels scan row-major y,x,channel.
template <typename S>
TensorPtr<S> patch_matrix(const FrameVolume& frames, const EncoderConfig& cfg) {
    if (frames.h != cfg.frame_h || frames.w != cfg.frame_w) {
        throw DimensionError("frame dims " + std::to_string(frames.h) + "x" + std::to_string(frames.w) +
                             " do not match config " + std::to_string(cfg.frame_h) + "x" + std::to_string(cfg.frame_w));
    }
    const std::int64_t ps = cfg.patch_size;
    const std::int64_t gx = cfg.frame_w / ps;
    const std::int64_t gy = cfg.frame_h / ps;
    const std::int64_t P = gx * gy;
    auto X = zeros<S>(Shape{frames.d * P, cfg.patch_dim()});
    for (std::int64_t t = 0; t < frames.d; ++t) {
        for (std::int64_t py = 0; py < gy; ++py) {
            for (std::int64_t px = 0; px < gx; ++px) {
                const std::int64_t row = t * P + py * gx + px;
                std::int64_t col = 0;
                for (std::int64_t y = 0; y < ps; ++y) {
                    for (std::int64_t x = 0; x < ps; ++x) {
                        for (std::int64_t c = 0; c < 3; ++c) {
                            X->at(row, col++) =
                                static_cast<S>(frames.at(t, py * ps + y, px * ps + x, c)) / static_cast<S>(255);
                        }
                    }
                }
            }
        }
    }
    return X;
}

// Linear patch embedding plus learned per-patch and per-frame-position
// embeddings; frame features are concatenated in time order.
template <typename S>
DenseFeature<S> encode_video(Tape<S>& tape, const FrameVolume& frames, const EncoderConfig& cfg,
                             const VideoEncoderParams<S>& params) {
    if (frames.d > cfg.d_long) {
        throw DimensionError("video has " + std::to_string(frames.d) + " frames but frame_pos covers " +
                             std::to_string(cfg.d_long));
    }
    const std::int64_t P = cfg.patches_per_frame();
    auto X = patch_matrix<S>(frames, cfg);
    auto Y = ops::add_row_bias(tape, ops::matmul(tape, X, params.patch_proj), params.patch_bias);
    std::vector<std::int64_t> patch_ids(static_cast<std::size_t>(frames.d * P));
    std::vector<std::int64_t> frame_ids(static_cast<std::size_t>(frames.d * P));
    for (std::int64_t t = 0; t < frames.d; ++t) {
        for (std::int64_t p = 0; p < P; ++p) {
            patch_ids[static_cast<std::size_t>(t * P + p)] = p;
            frame_ids[static_cast<std::size_t>(t * P + p)] = t;
        }
    }
    Y = ops::add(tape, Y, ops::gather_rows(tape, params.patch_pos, patch_ids));
    Y = ops::add(tape, Y, ops::gather_rows(tape, params.frame_pos, frame_ids));
    DenseFeature<S> f;
    f.matrix = Y;
    f.modality = Modality::video;
    f.mask.assign(static_cast<std::size_t>(frames.d * P), 1);
    return f;
}

// Token embedding plus learned positional embedding; PAD rows are zeroed
// and masked out of downstream attention.
template <typename S>
DenseFeature<S> encode_text(Tape<S>& tape, const TokenSequence& tokens, const EncoderConfig& cfg,
                            const TextEncoderParams<S>& params) {
    if (static_cast<std::int64_t>(tokens.ids.size()) != cfg.m) {
        throw DimensionError("token sequence length must equal m");
    }
    for (std::int64_t id : tokens.ids) {
        if (id < 0 || id >= cfg.vocab_size + 3) throw DataError("token id " + std::to_string(id) + " out of vocabulary");
    }
    auto E = ops::gather_rows(tape, params.tok_embed, tokens.ids);
    auto Y = ops::add(tape, E, params.pos_embed);
    std::vector<S> maskvec(static_cast<std::size_t>(cfg.m));
    for (std::size_t i = 0; i < maskvec.size(); ++i) maskvec[i] = tokens.mask[i] ? S(1) : S(0);
    Y = ops::scale_rows(tape, Y, make_tensor<S>(Shape{cfg.m}, std::move(maskvec)));
    DenseFeature<S> f;
    f.matrix = Y;
    f.modality = Modality::text;
    f.mask = tokens.mask;
    return f;
}

// Loads a precomputed M x C feature written as GXT1, named by record id.
// Layout: <dir>/<record_id>.<video|text>.gxt
template <typename S>
DenseFeature<S> load_feature_file(const std::filesystem::path& dir, const std::string& record_id,
                                  Modality modality) {
    const std::filesystem::path path =
        dir / (record_id + (modality == Modality::video ? ".video.gxt" : ".text.gxt"));
    if (!std::filesystem::exists(path)) {
        throw DataError("missing feature file for record '" + record_id + "': " + path.string());
    }
    TensorPtr<S> t;
    try {
        t = gxt::read_tensor<S>(path);
    } catch (const FormatError& e) {
        throw FormatError("record '" + record_id + "': " + e.what());
    }
    if (t->shape.rank() != 2) {
        throw FormatError("record '" + record_id + "': feature file must be rank-2, got " + t->shape.str());
    }
    DenseFeature<S> f;
    f.matrix = t;
    f.modality = modality;
    f.mask.assign(static_cast<std::size_t>(t->rows()), 1);
    return f;
}

}  // namespace gexia
