#pragma once

#include <cstdint>
#include <filesystem>

#include "gexia/manifest.hpp"

namespace gexia {

// Desk-scale corpus generator: each pair renders a distinct moving colored
// shape keyed by its caption words, so contrastive alignment is learnable.
struct SynthConfig {
    std::int64_t pairs = 32;
    std::int64_t sources = 8;
    std::uint64_t seed = 7;
    std::int64_t frame_h = 32;
    std::int64_t frame_w = 32;
    std::int64_t frames_per_clip = 8;
    double clip_seconds = 4.0;
};

// Writes frames/<id>.gxt volumes plus manifest.jsonl under out_dir and
// returns the manifest. Deterministic under (seed, config).
Manifest synthesize_corpus(const std::filesystem::path& out_dir, const SynthConfig& config);

}  // namespace gexia
