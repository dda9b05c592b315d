#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gexia/gxt.hpp"

namespace gexia {

// Decoded RGB frames, d x h x w x 3, u8. Images are one-frame volumes.
struct FrameVolume {
    std::int64_t d = 0;
    std::int64_t h = 0;
    std::int64_t w = 0;
    std::vector<std::uint8_t> rgb;

    std::uint8_t& at(std::int64_t t, std::int64_t y, std::int64_t x, std::int64_t c) {
        return rgb[static_cast<std::size_t>(((t * h + y) * w + x) * 3 + c)];
    }
    std::uint8_t at(std::int64_t t, std::int64_t y, std::int64_t x, std::int64_t c) const {
        return rgb[static_cast<std::size_t>(((t * h + y) * w + x) * 3 + c)];
    }

    static FrameVolume blank(std::int64_t d, std::int64_t h, std::int64_t w) {
        FrameVolume fv;
        fv.d = d;
        fv.h = h;
        fv.w = w;
        fv.rgb.assign(static_cast<std::size_t>(d * h * w * 3), 0);
        return fv;
    }

    FrameVolume frame(std::int64_t t) const {
        FrameVolume fv = blank(1, h, w);
        const std::size_t stride = static_cast<std::size_t>(h * w * 3);
        std::copy(rgb.begin() + static_cast<std::int64_t>(stride) * t,
                  rgb.begin() + static_cast<std::int64_t>(stride) * (t + 1), fv.rgb.begin());
        return fv;
    }
};

inline void write_frames(const std::filesystem::path& path, const FrameVolume& fv) {
    gxt::write_u8(path, Shape{fv.d, fv.h, fv.w, 3}, fv.rgb);
}

inline FrameVolume read_frames(const std::filesystem::path& path) {
    auto [shape, bytes] = gxt::read_u8(path);
    if (shape.rank() != 4 || shape[3] != 3) {
        throw FormatError("frame file must be rank-4 d x h x w x 3: " + path.string() + " has " + shape.str());
    }
    FrameVolume fv;
    fv.d = shape[0];
    fv.h = shape[1];
    fv.w = shape[2];
    fv.rgb = std::move(bytes);
    return fv;
}

}  // namespace gexia
