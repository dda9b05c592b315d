#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gexia/featurizer.hpp"
#include "gexia/ops.hpp"

namespace gexia {

struct IamConfig {
    std::int64_t n_latents = 8;   // N
    std::int64_t latent_dim = 64; // D
    std::int64_t heads = 1;

    void validate() const {
        if (n_latents < 1 || latent_dim < 1) throw ConfigError("IAM sizes must be positive");
        if (heads < 1 || latent_dim % heads != 0) throw ConfigError("latent_dim must be divisible by heads");
    }
};

// One approximation block: cross-attention from the latents into a dense
// feature followed by self-attention over the latents. Pre-layernorm on the
// latent stream, residual connections, single projection per role.
template <typename S>
struct AttnBlockParams {
    // cross-attention: query from latents (D->D), key/value from the feature (C->D)
    TensorPtr<S> wq, bq, wk, bk, wv, bv, wo, bo;
    TensorPtr<S> ln1_gain, ln1_bias;
    // self-attention over latents (all D->D)
    TensorPtr<S> swq, sbq, swk, sbk, swv, sbv, swo, sbo;
    TensorPtr<S> ln2_gain, ln2_bias;

    static AttnBlockParams init(std::int64_t D, std::int64_t C, std::uint64_t seed, const std::string& prefix) {
        AttnBlockParams p;
        auto w = [&](const std::string& name, std::int64_t rows, std::int64_t cols) {
            Rng r(seed, prefix + "." + name);
            return randn<S>(Shape{rows, cols}, r, 1.0 / std::sqrt(static_cast<double>(rows)), true);
        };
        p.wq = w("wq", D, D);
        p.wk = w("wk", C, D);
        p.wv = w("wv", C, D);
        p.wo = w("wo", D, D);
        p.bq = zeros<S>(Shape{D}, true);
        p.bk = zeros<S>(Shape{D}, true);
        p.bv = zeros<S>(Shape{D}, true);
        p.bo = zeros<S>(Shape{D}, true);
        p.ln1_gain = full<S>(Shape{D}, S(1), true);
        p.ln1_bias = zeros<S>(Shape{D}, true);
        p.swq = w("swq", D, D);
        p.swk = w("swk", D, D);
        p.swv = w("swv", D, D);
        p.swo = w("swo", D, D);
        p.sbq = zeros<S>(Shape{D}, true);
        p.sbk = zeros<S>(Shape{D}, true);
        p.sbv = zeros<S>(Shape{D}, true);
        p.sbo = zeros<S>(Shape{D}, true);
        p.ln2_gain = full<S>(Shape{D}, S(1), true);
        p.ln2_bias = zeros<S>(Shape{D}, true);
        return p;
    }

    std::vector<std::pair<std::string, TensorPtr<S>>> named(const std::string& prefix) const {
        return {{prefix + ".wq", wq},           {prefix + ".bq", bq},
                {prefix + ".wk", wk},           {prefix + ".bk", bk},
                {prefix + ".wv", wv},           {prefix + ".bv", bv},
                {prefix + ".wo", wo},           {prefix + ".bo", bo},
                {prefix + ".ln1_gain", ln1_gain}, {prefix + ".ln1_bias", ln1_bias},
                {prefix + ".swq", swq},         {prefix + ".sbq", sbq},
                {prefix + ".swk", swk},         {prefix + ".sbk", sbk},
                {prefix + ".swv", swv},         {prefix + ".sbv", sbv},
                {prefix + ".swo", swo},         {prefix + ".sbo", sbo},
                {prefix + ".ln2_gain", ln2_gain}, {prefix + ".ln2_bias", ln2_bias}};
    }
};

// Learnable base embedding plus the unrolled block and the weight-shared
// iterative block. The parameter set never depends on the iteration count.
template <typename S>
struct IamParams {
    TensorPtr<S> base;  // N x D
    AttnBlockParams<S> unrolled;
    AttnBlockParams<S> iterative;
    std::int64_t n_latents = 0, latent_dim = 0, feature_width = 0;

    static IamParams init(const IamConfig& cfg, std::int64_t feature_width, std::uint64_t seed,
                          const std::string& prefix) {
        cfg.validate();
        IamParams p;
        Rng r(seed, prefix + ".base");
        p.base = randn<S>(Shape{cfg.n_latents, cfg.latent_dim}, r, 0.02, true);
        p.unrolled = AttnBlockParams<S>::init(cfg.latent_dim, feature_width, seed, prefix + ".unrolled");
        p.iterative = AttnBlockParams<S>::init(cfg.latent_dim, feature_width, seed, prefix + ".iterative");
        p.n_latents = cfg.n_latents;
        p.latent_dim = cfg.latent_dim;
        p.feature_width = feature_width;
        return p;
    }

    std::vector<std::pair<std::string, TensorPtr<S>>> named(const std::string& prefix) const {
        std::vector<std::pair<std::string, TensorPtr<S>>> out{{prefix + ".base", base}};
        auto u = unrolled.named(prefix + ".unrolled");
        auto i = iterative.named(prefix + ".iterative");
        out.insert(out.end(), u.begin(), u.end());
        out.insert(out.end(), i.begin(), i.end());
        return out;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& [name, t] : named("p")) n += t->data.size();
        return n;
    }
};

struct AttendOptions {
    std::int64_t heads = 1;
    bool bypass_layernorm = false;  // test hook for closed-form oracles
};

namespace detail {

// Scaled dot-product attention, optionally multi-head via column slicing.
template <typename S>
TensorPtr<S> attention(Tape<S>& tape, const TensorPtr<S>& q, const TensorPtr<S>& k, const TensorPtr<S>& v,
                       std::int64_t heads) {
    const std::int64_t d = q->cols();
    const std::int64_t dh = d / heads;
    std::vector<TensorPtr<S>> head_outs;
    head_outs.reserve(static_cast<std::size_t>(heads));
    for (std::int64_t h = 0; h < heads; ++h) {
        auto qh = heads == 1 ? q : ops::slice_cols(tape, q, h * dh, (h + 1) * dh);
        auto kh = heads == 1 ? k : ops::slice_cols(tape, k, h * dh, (h + 1) * dh);
        auto vh = heads == 1 ? v : ops::slice_cols(tape, v, h * dh, (h + 1) * dh);
        auto logits = ops::scale(tape, ops::matmul(tape, qh, ops::transpose(tape, kh)),
                                 1.0 / std::sqrt(static_cast<double>(dh)));
        auto attn = ops::softmax_rows(tape, logits);
        head_outs.push_back(ops::matmul(tape, attn, vh));
    }
    return heads == 1 ? head_outs[0] : ops::concat_cols(tape, head_outs);
}

template <typename S>
std::vector<std::int64_t> valid_row_ids(const DenseFeature<S>& f) {
    std::vector<std::int64_t> ids;
    ids.reserve(f.mask.size());
    for (std::size_t i = 0; i < f.mask.size(); ++i) {
        if (f.mask[i]) ids.push_back(static_cast<std::int64_t>(i));
    }
    return ids;
}

}  // namespace detail

// out = A + OutProj(softmax(Q(LN(A)) K(F)^T / sqrt(D)) V(F)). Masked feature
// rows are excluded from the keys/values, which realizes their -inf logits
// exactly: they receive zero attention and pass zero gradient.
template <typename S>
TensorPtr<S> cross_attend(Tape<S>& tape, const TensorPtr<S>& latents, const DenseFeature<S>& feature,
                          const AttnBlockParams<S>& block, const AttendOptions& opts = {}) {
    if (feature.matrix->cols() != block.wk->rows()) {
        throw DimensionError("feature width " + std::to_string(feature.matrix->cols()) +
                             " does not match block key projection " + block.wk->shape.str());
    }
    auto ids = detail::valid_row_ids(feature);
    if (ids.empty()) throw DegenerateInputError("cross_attend: all feature rows are masked");
    auto fv = static_cast<std::int64_t>(ids.size()) == feature.matrix->rows()
                  ? feature.matrix
                  : ops::gather_rows(tape, feature.matrix, ids);
    auto h = opts.bypass_layernorm ? latents : ops::layernorm(tape, latents, block.ln1_gain, block.ln1_bias);
    auto q = ops::add_row_bias(tape, ops::matmul(tape, h, block.wq), block.bq);
    auto k = ops::add_row_bias(tape, ops::matmul(tape, fv, block.wk), block.bk);
    auto v = ops::add_row_bias(tape, ops::matmul(tape, fv, block.wv), block.bv);
    auto ctx = detail::attention(tape, q, k, v, opts.heads);
    auto out = ops::add_row_bias(tape, ops::matmul(tape, ctx, block.wo), block.bo);
    return ops::add(tape, latents, out);
}

// out = A + OutProj(softmax(q(LN(A)) k(LN(A))^T / sqrt(D)) v(LN(A))).
template <typename S>
TensorPtr<S> self_attend(Tape<S>& tape, const TensorPtr<S>& latents, const AttnBlockParams<S>& block,
                         const AttendOptions& opts = {}) {
    auto h = opts.bypass_layernorm ? latents : ops::layernorm(tape, latents, block.ln2_gain, block.ln2_bias);
    auto q = ops::add_row_bias(tape, ops::matmul(tape, h, block.swq), block.sbq);
    auto k = ops::add_row_bias(tape, ops::matmul(tape, h, block.swk), block.sbk);
    auto v = ops::add_row_bias(tape, ops::matmul(tape, h, block.swv), block.sbv);
    auto ctx = detail::attention(tape, q, k, v, opts.heads);
    auto out = ops::add_row_bias(tape, ops::matmul(tape, ctx, block.swo), block.sbo);
    return ops::add(tape, latents, out);
}

// A0 from the unrolled block, then `iters` applications of the shared
// iterative block. iters = 0 returns A0, the image-granularity case.
template <typename S>
TensorPtr<S> iam_forward(Tape<S>& tape, const DenseFeature<S>& feature, const IamParams<S>& params,
                         std::int64_t iters, const AttendOptions& opts = {}) {
    if (iters < 0) throw UsageError("iteration count must be >= 0");
    if (feature.matrix->cols() != params.feature_width) {
        throw DimensionError("feature width " + std::to_string(feature.matrix->cols()) +
                             " does not match IAM width " + std::to_string(params.feature_width));
    }
    auto a = cross_attend(tape, params.base, feature, params.unrolled, opts);
    a = self_attend(tape, a, params.unrolled, opts);
    for (std::int64_t k = 0; k < iters; ++k) {
        a = cross_attend(tape, a, feature, params.iterative, opts);
        a = self_attend(tape, a, params.iterative, opts);
    }
    return a;
}

// Average pooling over the N latent rows.
template <typename S>
TensorPtr<S> pool_latents(Tape<S>& tape, const TensorPtr<S>& latents) {
    return ops::mean_rows(tape, latents);
}

// Per-granularity iteration counts for the video and text branches.
struct IterPolicy {
    struct Setting {
        std::int64_t video_iters = 1;
        std::int64_t text_iters = 1;
    };
    std::map<std::string, Setting> by_granularity = {
        {"SVST", {1, 1}},
        {"LVLT", {3, 3}},
        {"LVST", {3, 1}},
        {"IT", {0, 1}},
    };

    Setting at(const std::string& granularity) const {
        auto it = by_granularity.find(granularity);
        if (it == by_granularity.end()) throw ConfigError("no #iter policy entry for granularity " + granularity);
        return it->second;
    }
};

}  // namespace gexia
