#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "gexia/alignment.hpp"

namespace gexia {

// Per-granularity record pools eligible for batch sampling, with their
// sampling weights. A granularity enters the mix only if it can fill a batch.
struct SamplingPlan {
    std::vector<Granularity> granularities;
    std::vector<std::vector<const ClipRecord*>> pools;
    std::vector<double> weights;
};

inline SamplingPlan build_sampling_plan(const Manifest& data, const TrainConfig& tcfg) {
    SamplingPlan plan;
    const Granularity order[] = {Granularity::SVST, Granularity::LVLT, Granularity::LVST, Granularity::IT};
    for (Granularity g : order) {
        auto pool = data.with_granularity(g);
        double weight = 0.0;
        if (tcfg.mix_weights.empty()) {
            weight = static_cast<double>(pool.size());
        } else {
            auto it = tcfg.mix_weights.find(to_string(g));
            if (it != tcfg.mix_weights.end()) weight = it->second;
        }
        if (weight <= 0.0) continue;
        if (static_cast<std::int64_t>(pool.size()) < tcfg.batch_size) {
            if (!tcfg.mix_weights.empty()) {
                throw ConfigError("granularity " + to_string(g) + " is in the mix but has only " +
                                  std::to_string(pool.size()) + " records (batch_size " +
                                  std::to_string(tcfg.batch_size) + ")");
            }
            continue;  // proportional mix simply skips granularities that cannot fill a batch
        }
        plan.granularities.push_back(g);
        plan.pools.push_back(std::move(pool));
        plan.weights.push_back(weight);
    }
    if (plan.granularities.empty()) {
        throw ConfigError("no granularity has enough records to fill a batch");
    }
    return plan;
}

// Deterministic per-step choice keyed by (seed, step): first the granularity
// by mix weight, then batch_size distinct records within it.
inline std::vector<const ClipRecord*> sample_batch(const SamplingPlan& plan, std::uint64_t seed, std::int64_t step,
                                                   std::int64_t batch_size, Granularity* chosen) {
    Rng rng(seed, "sampler", static_cast<std::uint64_t>(step));
    double total = 0.0;
    for (double w : plan.weights) total += w;
    double u = rng.uniform() * total;
    std::size_t gi = 0;
    for (; gi + 1 < plan.weights.size(); ++gi) {
        if (u < plan.weights[gi]) break;
        u -= plan.weights[gi];
    }
    const auto& pool = plan.pools[gi];
    if (chosen != nullptr) *chosen = plan.granularities[gi];

    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<const ClipRecord*> batch;
    for (std::int64_t b = 0; b < batch_size; ++b) {
        const std::size_t j = b + static_cast<std::size_t>(rng.uniform_index(idx.size() - b));
        std::swap(idx[static_cast<std::size_t>(b)], idx[j]);
        batch.push_back(pool[idx[static_cast<std::size_t>(b)]]);
    }
    return batch;
}

// Contrastive pretraining loop: homogeneous-granularity batches, two lr
// groups, per-step metrics, periodic checkpoints into out_dir. The lr
// schedule always spans cfg.train.steps; end_step < that trains a prefix
// whose checkpoint can be resumed bit-exactly.
template <typename S>
std::int64_t train(const Manifest& data, const std::filesystem::path& data_dir, const RunConfig& cfg,
                   Model<S>& model, AdamW<S>& optimizer, std::int64_t start_step,
                   const std::filesystem::path& out_dir, std::ostream* metrics, std::int64_t end_step = -1) {
    if (data.size() == 0) throw DataError("training manifest is empty");
    const TrainConfig& tcfg = cfg.train;
    if (end_step < 0) end_step = tcfg.steps;
    SamplingPlan plan = build_sampling_plan(data, tcfg);

    for (std::int64_t step = start_step; step < end_step; ++step) {
        Granularity g = Granularity::SVST;
        auto records = sample_batch(plan, cfg.seed, step, tcfg.batch_size, &g);
        std::vector<BatchSample> batch;
        batch.reserve(records.size());
        for (const ClipRecord* rec : records) batch.push_back(load_sample(*rec, data_dir, model.encoder_cfg));

        const auto iters = cfg.iter_policy.at(to_string(g));
        Tape<S> tape;
        auto fwd = forward_pair(tape, model, batch, iters.video_iters, iters.text_iters);
        const double loss = static_cast<double>(fwd.loss->data[0]);
        if (!std::isfinite(loss)) {
            throw NumericError("non-finite loss " + std::to_string(loss) + " at step " + std::to_string(step) +
                               " (granularity " + to_string(g) + ")");
        }
        const double tau_used = model.tau();
        const double lr_encoders = optimizer.current_lr(0);
        const double lr_other = optimizer.current_lr(1);
        tape.backward(fwd.loss);
        optimizer.step();

        if (metrics != nullptr) {
            char line[512];
            std::snprintf(line, sizeof(line),
                          "{\"step\":%" PRId64 ",\"granularity\":\"%s\",\"loss\":%.17g,\"tau\":%.17g,"
                          "\"lr_other\":%.17g,\"lr_encoders\":%.17g}",
                          step, to_string(g).c_str(), loss, tau_used, lr_other, lr_encoders);
            (*metrics) << line << '\n';
        }

        const std::int64_t done = step + 1;
        if (tcfg.checkpoint_every > 0 && done % tcfg.checkpoint_every == 0 && done < end_step) {
            save_checkpoint(out_dir, model, cfg, done, &optimizer);
        }
    }
    save_checkpoint(out_dir, model, cfg, end_step, &optimizer);
    return end_step;
}

}  // namespace gexia
