#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gexia/alignment.hpp"

namespace gexia {

struct GradCheckRow {
    std::string name;
    double max_rel_err = 0.0;
    std::int64_t elements = 0;
};

// Central finite differences against the tape's analytic gradients, per
// parameter tensor. The forward closure must rebuild the graph from the
// parameters' current values on every call.
template <typename S>
std::vector<GradCheckRow> gradcheck_params(const std::vector<std::pair<std::string, TensorPtr<S>>>& params,
                                           const std::function<TensorPtr<S>(Tape<S>&)>& forward, double eps) {
    Tape<S> tape;
    auto loss = forward(tape);
    tape.backward(loss);
    std::map<std::string, std::vector<S>> analytic;
    for (const auto& [name, p] : params) {
        analytic[name] = p->grad.empty() ? std::vector<S>(p->data.size(), S(0)) : p->grad;
    }

    auto eval_loss = [&]() {
        Tape<S> t;
        return static_cast<double>(forward(t)->data[0]);
    };

    std::vector<GradCheckRow> rows;
    for (const auto& [name, p] : params) {
        GradCheckRow row;
        row.name = name;
        row.elements = static_cast<std::int64_t>(p->data.size());
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const S orig = p->data[i];
            p->data[i] = orig + static_cast<S>(eps);
            const double lp = eval_loss();
            p->data[i] = orig - static_cast<S>(eps);
            const double lm = eval_loss();
            p->data[i] = orig;
            const double fd = (lp - lm) / (2.0 * eps);
            const double an = static_cast<double>(analytic[name][i]);
            const double denom = std::max({1e-6, std::abs(fd), std::abs(an)});
            row.max_rel_err = std::max(row.max_rel_err, std::abs(an - fd) / denom);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// The tiny full-pipeline configuration used by the gradient oracle:
// B=2 pairs, N=4 latents, D=8, d=2 frames of 4 patches, m=8 tokens.
inline RunConfig gradcheck_run_config() {
    RunConfig cfg;
    cfg.dtype = "f64";
    cfg.encoder.frame_h = 8;
    cfg.encoder.frame_w = 8;
    cfg.encoder.patch_size = 4;
    cfg.encoder.c_v = 8;
    cfg.encoder.c_t = 8;
    cfg.encoder.m = 8;
    cfg.encoder.d_short = 1;
    cfg.encoder.d_long = 2;
    cfg.iam.n_latents = 4;
    cfg.iam.latent_dim = 8;
    return cfg;
}

// Full forward: toy encoders -> both IAMs at the given #iter -> VTC loss.
template <typename S>
std::vector<GradCheckRow> gradcheck_full_pipeline(std::uint64_t seed, double eps, std::int64_t iters = 3) {
    RunConfig cfg = gradcheck_run_config();
    auto model = Model<S>::init(cfg.encoder, cfg.iam, cfg.train.tau_init, seed);

    std::vector<BatchSample> batch;
    const char* captions[] = {"a red toy", "blue block"};
    for (int b = 0; b < 2; ++b) {
        BatchSample s;
        s.frames = FrameVolume::blank(2, cfg.encoder.frame_h, cfg.encoder.frame_w);
        Rng rng(seed, "gradcheck.frames", static_cast<std::uint64_t>(b));
        for (auto& px : s.frames.rgb) px = static_cast<std::uint8_t>(rng.uniform_index(256));
        s.tokens = tokenize(captions[b], cfg.encoder);
        batch.push_back(std::move(s));
    }

    auto forward = [&, batch](Tape<S>& tape) {
        return forward_pair(tape, model, batch, iters, iters).loss;
    };
    return gradcheck_params<S>(model.named_params(), forward, eps);
}

}  // namespace gexia
