#include "gexia/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "gexia/frames.hpp"
#include "gexia/rng.hpp"

namespace gexia {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr std::array<const char*, 8> kColors = {"red",    "green",  "blue", "yellow",
                                                "purple", "orange", "cyan", "white"};
constexpr std::array<Rgb, 8> kColorValues = {{{220, 40, 40},
                                              {40, 200, 60},
                                              {50, 80, 220},
                                              {230, 220, 50},
                                              {160, 60, 200},
                                              {240, 140, 40},
                                              {60, 210, 210},
                                              {235, 235, 235}}};
constexpr std::array<const char*, 8> kShapes = {"square", "disk", "ring", "cross", "stripe", "dot", "bar", "diamond"};
constexpr std::array<const char*, 8> kMotions = {"slides left", "slides right", "rises",  "falls",
                                                 "spins",       "blinks",       "grows",  "shrinks"};

bool inside_shape(int shape, double dx, double dy, double r) {
    const double ax = std::abs(dx), ay = std::abs(dy);
    switch (shape) {
        case 0: return ax < r && ay < r;                                   // square
        case 1: return dx * dx + dy * dy < r * r;                          // disk
        case 2: {                                                          // ring
            const double d2 = dx * dx + dy * dy;
            return d2 < r * r && d2 > 0.25 * r * r;
        }
        case 3: return (ax < r / 3 || ay < r / 3) && ax < r && ay < r;     // cross
        case 4: return ay < r / 3 && ax < r;                               // stripe
        case 5: return dx * dx + dy * dy < 0.25 * r * r;                   // dot
        case 6: return ax < r / 3 && ay < r;                               // bar
        case 7: return ax + ay < r;                                        // diamond
    }
    return false;
}

void render_clip(FrameVolume& fv, int color, int shape, int motion) {
    const double h = static_cast<double>(fv.h), w = static_cast<double>(fv.w);
    const Rgb rgb = kColorValues[static_cast<std::size_t>(color)];
    for (std::int64_t t = 0; t < fv.d; ++t) {
        const double phase = fv.d > 1 ? static_cast<double>(t) / static_cast<double>(fv.d - 1) : 0.0;
        double cx = w / 2, cy = h / 2, r = h / 4;
        bool visible = true;
        switch (motion) {
            case 0: cx = w * (0.75 - 0.5 * phase); break;  // slides left
            case 1: cx = w * (0.25 + 0.5 * phase); break;  // slides right
            case 2: cy = h * (0.75 - 0.5 * phase); break;  // rises
            case 3: cy = h * (0.25 + 0.5 * phase); break;  // falls
            case 4:                                        // spins
                cx = w / 2 + 0.25 * w * std::cos(6.283185307179586 * phase);
                cy = h / 2 + 0.25 * h * std::sin(6.283185307179586 * phase);
                break;
            case 5: visible = t % 2 == 0; break;           // blinks
            case 6: r = h * (0.125 + 0.21 * phase); break; // grows
            case 7: r = h * (0.335 - 0.21 * phase); break; // shrinks
        }
        if (!visible) continue;
        for (std::int64_t y = 0; y < fv.h; ++y) {
            for (std::int64_t x = 0; x < fv.w; ++x) {
                if (inside_shape(shape, static_cast<double>(x) - cx, static_cast<double>(y) - cy, r)) {
                    fv.at(t, y, x, 0) = rgb.r;
                    fv.at(t, y, x, 1) = rgb.g;
                    fv.at(t, y, x, 2) = rgb.b;
                }
            }
        }
    }
}

}  // namespace

Manifest synthesize_corpus(const std::filesystem::path& out_dir, const SynthConfig& config) {
    if (config.pairs < 1 || config.sources < 1) throw UsageError("synth needs positive pair and source counts");
    const std::int64_t combos = static_cast<std::int64_t>(kColors.size() * kShapes.size() * kMotions.size());
    if (config.pairs > combos) {
        throw UsageError("at most " + std::to_string(combos) + " pairs have distinct captions");
    }

    // Seeded permutation of caption combinations keeps captions unique.
    std::vector<std::int64_t> perm(static_cast<std::size_t>(combos));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(config.seed, "synth.combos");
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
        std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
    }

    std::filesystem::create_directories(out_dir / "frames");
    Manifest manifest;
    for (std::int64_t i = 0; i < config.pairs; ++i) {
        const std::int64_t combo = perm[static_cast<std::size_t>(i)];
        const int color = static_cast<int>(combo % 8);
        const int shape = static_cast<int>((combo / 8) % 8);
        const int motion = static_cast<int>(combo / 64);

        FrameVolume fv = FrameVolume::blank(config.frames_per_clip, config.frame_h, config.frame_w);
        render_clip(fv, color, shape, motion);

        char id[32], src[32];
        std::snprintf(id, sizeof(id), "sv%04lld", static_cast<long long>(i));
        std::snprintf(src, sizeof(src), "src%02lld", static_cast<long long>(i % config.sources));
        const std::string rel = std::string("frames/") + id + ".gxt";
        write_frames(out_dir / rel, fv);

        ClipRecord rec;
        rec.id = id;
        rec.granularity = Granularity::SVST;
        rec.source_id = src;
        const std::int64_t slot = i / config.sources;
        rec.t_start = static_cast<double>(slot) * config.clip_seconds;
        rec.t_end = rec.t_start + config.clip_seconds;
        rec.video_path = rel;
        rec.text = std::string(kColors[static_cast<std::size_t>(color)]) + " " +
                   kShapes[static_cast<std::size_t>(shape)] + " " + kMotions[static_cast<std::size_t>(motion)];
        manifest.append(std::move(rec));
    }
    save_manifest(manifest, out_dir / "manifest.jsonl");
    return manifest;
}

}  // namespace gexia
