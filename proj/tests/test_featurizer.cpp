#include <doctest.h>

#include <array>

#include "gexia/featurizer.hpp"
#include "gexia/gxt.hpp"
#include "test_util.hpp"

using namespace gexia;

namespace {

EncoderConfig small_cfg() {
    EncoderConfig cfg;
    cfg.frame_h = 32;
    cfg.frame_w = 32;
    cfg.patch_size = 16;
    cfg.c_v = 8;
    cfg.c_t = 8;
    cfg.m = 8;
    cfg.d_short = 2;
    cfg.d_long = 4;
    return cfg;
}

FrameVolume random_frames(std::int64_t d, std::int64_t h, std::int64_t w, std::uint64_t seed) {
    FrameVolume fv = FrameVolume::blank(d, h, w);
    Rng rng(seed, "frames");
    for (auto& px : fv.rgb) px = static_cast<std::uint8_t>(rng.uniform_index(256));
    return fv;
}

}  // namespace

TEST_SUITE_BEGIN("featurizer");

TEST_CASE("tokenize: empty, short, truncated") {
    EncoderConfig cfg = small_cfg();
    const std::int64_t BOS = bos_id(cfg), EOS = eos_id(cfg), PAD = pad_id(cfg);

    auto empty = tokenize("", cfg);
    CHECK(empty.ids == std::vector<std::int64_t>{BOS, EOS, PAD, PAD, PAD, PAD, PAD, PAD});
    CHECK(empty.mask == std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0, 0, 0});

    auto ab = tokenize("ab", cfg);
    CHECK(ab.ids == std::vector<std::int64_t>{BOS, 97, 98, EOS, PAD, PAD, PAD, PAD});

    std::string longtext(100, 'q');
    auto t = tokenize(longtext, cfg);
    CHECK(t.ids.size() == 8);
    CHECK(t.ids.back() == EOS);
    for (auto m : t.mask) CHECK(m == 1);
}

TEST_CASE("tokenize/detokenize round trip under the budget") {
    EncoderConfig cfg = small_cfg();
    cfg.m = 24;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed, "roundtrip");
        const std::size_t len = rng.uniform_index(static_cast<std::uint64_t>(cfg.m - 1));  // <= m-2
        std::string text;
        for (std::size_t i = 0; i < len; ++i) text.push_back(static_cast<char>(32 + rng.uniform_index(95)));
        CHECK(detokenize(tokenize(text, cfg), cfg) == text);
    }
}

TEST_CASE("encode_video: bias rows, frame symmetry, shape") {
    EncoderConfig cfg = small_cfg();
    auto params = VideoEncoderParams<double>::init(cfg, 5, "enc");

    SUBCASE("all-zero frames with zero position embeddings give bias rows") {
        std::fill(params.patch_pos->data.begin(), params.patch_pos->data.end(), 0.0);
        std::fill(params.frame_pos->data.begin(), params.frame_pos->data.end(), 0.0);
        Rng rng(1, "bias");
        params.patch_bias = randn<double>(Shape{cfg.c_v}, rng, 1.0, true);
        Tape<double> tape;
        auto f = encode_video(tape, FrameVolume::blank(2, 32, 32), cfg, params);
        for (std::int64_t i = 0; i < f.rows(); ++i)
            for (std::int64_t j = 0; j < cfg.c_v; ++j)
                CHECK(f.matrix->at(i, j) == params.patch_bias->data[static_cast<std::size_t>(j)]);
    }

    SUBCASE("identical frames with zero frame positions repeat row blocks") {
        std::fill(params.frame_pos->data.begin(), params.frame_pos->data.end(), 0.0);
        FrameVolume one = random_frames(1, 32, 32, 2);
        FrameVolume two = FrameVolume::blank(2, 32, 32);
        std::copy(one.rgb.begin(), one.rgb.end(), two.rgb.begin());
        std::copy(one.rgb.begin(), one.rgb.end(), two.rgb.begin() + static_cast<std::int64_t>(one.rgb.size()));
        Tape<double> tape;
        auto f = encode_video(tape, two, cfg, params);
        const std::int64_t P = cfg.patches_per_frame();
        for (std::int64_t p = 0; p < P; ++p)
            for (std::int64_t j = 0; j < cfg.c_v; ++j)
                CHECK(f.matrix->at(p, j) == f.matrix->at(P + p, j));
    }

    SUBCASE("random input has shape (d*P) x C_v and all-valid mask") {
        Tape<double> tape;
        auto f = encode_video(tape, random_frames(2, 32, 32, 3), cfg, params);
        CHECK(f.matrix->shape == Shape{8, cfg.c_v});
        CHECK(f.mask.size() == 8);
        for (auto m : f.mask) CHECK(m == 1);
    }
}

TEST_CASE("feature rows are proportional to input length") {
    EncoderConfig cfg = small_cfg();
    auto params = VideoEncoderParams<double>::init(cfg, 5, "enc");
    Tape<double> tape;
    auto f2 = encode_video(tape, random_frames(2, 32, 32, 4), cfg, params);
    auto f4 = encode_video(tape, random_frames(4, 32, 32, 4), cfg, params);
    CHECK(f4.rows() == 2 * f2.rows());
}

TEST_CASE("encode_video is frame-permutation equivariant without frame positions") {
    EncoderConfig cfg = small_cfg();
    auto params = VideoEncoderParams<double>::init(cfg, 9, "enc");
    std::fill(params.frame_pos->data.begin(), params.frame_pos->data.end(), 0.0);
    FrameVolume fv = random_frames(4, 32, 32, 10);
    FrameVolume swapped = FrameVolume::blank(4, 32, 32);
    const std::array<std::int64_t, 4> perm = {2, 0, 3, 1};
    const std::size_t stride = static_cast<std::size_t>(32 * 32 * 3);
    for (std::int64_t t = 0; t < 4; ++t) {
        std::copy(fv.rgb.begin() + static_cast<std::int64_t>(stride) * perm[static_cast<std::size_t>(t)],
                  fv.rgb.begin() + static_cast<std::int64_t>(stride) * (perm[static_cast<std::size_t>(t)] + 1),
                  swapped.rgb.begin() + static_cast<std::int64_t>(stride) * t);
    }
    Tape<double> tape;
    auto base = encode_video(tape, fv, cfg, params);
    auto perm_out = encode_video(tape, swapped, cfg, params);
    const std::int64_t P = cfg.patches_per_frame();
    for (std::int64_t t = 0; t < 4; ++t)
        for (std::int64_t p = 0; p < P; ++p)
            for (std::int64_t j = 0; j < cfg.c_v; ++j)
                CHECK(perm_out.matrix->at(t * P + p, j) ==
                      base.matrix->at(perm[static_cast<std::size_t>(t)] * P + p, j));
}

TEST_CASE("encode_text: padding, positions, contract") {
    EncoderConfig cfg = small_cfg();
    auto params = TextEncoderParams<double>::init(cfg, 5, "txt");

    SUBCASE("all-PAD rows give a zero matrix and zero mask") {
        TokenSequence seq;
        seq.ids.assign(static_cast<std::size_t>(cfg.m), pad_id(cfg));
        seq.mask.assign(static_cast<std::size_t>(cfg.m), 0);
        Tape<double> tape;
        auto f = encode_text(tape, seq, cfg, params);
        for (double v : f.matrix->data) CHECK(v == 0.0);
        for (auto m : f.mask) CHECK(m == 0);
    }

    SUBCASE("repeated token differs only by the positional delta") {
        auto seq = tokenize("aa", cfg);
        Tape<double> tape;
        auto f = encode_text(tape, seq, cfg, params);
        for (std::int64_t j = 0; j < cfg.c_t; ++j) {
            const double delta_rows = f.matrix->at(1, j) - f.matrix->at(2, j);
            const double delta_pos = params.pos_embed->at(1, j) - params.pos_embed->at(2, j);
            CHECK(delta_rows == doctest::Approx(delta_pos).epsilon(1e-12));
        }
    }

    SUBCASE("shape is m x C_t regardless of text length") {
        Tape<double> tape;
        for (const char* text : {"", "hi", "something quite a bit longer than m bytes for sure"}) {
            auto f = encode_text(tape, tokenize(text, cfg), cfg, params);
            CHECK(f.matrix->shape == Shape{cfg.m, cfg.c_t});
        }
    }

    SUBCASE("out-of-vocabulary id is rejected") {
        TokenSequence seq = tokenize("x", cfg);
        seq.ids[1] = cfg.vocab_size + 3;
        Tape<double> tape;
        CHECK_THROWS_AS(encode_text(tape, seq, cfg, params), DataError);
    }
}

TEST_CASE("sample_frames spacing") {
    CHECK(sample_frame_indices(16, 16) ==
          std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
    CHECK(sample_frame_indices(32, 16) ==
          std::vector<std::int64_t>{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30});
    CHECK(sample_frame_indices(1, 16) == std::vector<std::int64_t>(16, 0));
    CHECK_THROWS_AS(sample_frame_indices(0, 4), DataError);
}

TEST_CASE("precomputed feature provider") {
    EncoderConfig cfg = small_cfg();
    auto params = VideoEncoderParams<float>::init(cfg, 5, "enc");
    TempDir tmp("features");
    Tape<float> tape;
    auto f = encode_video(tape, random_frames(2, 32, 32, 6), cfg, params);
    gxt::write_tensor(tmp.path() / "rec1.video.gxt", *f.matrix);

    auto loaded = load_feature_file<float>(tmp.path(), "rec1", Modality::video);
    CHECK(loaded.matrix->shape == f.matrix->shape);
    CHECK(loaded.matrix->data == f.matrix->data);
    for (auto m : loaded.mask) CHECK(m == 1);

    CHECK_THROWS_WITH_AS(load_feature_file<float>(tmp.path(), "missing", Modality::video),
                         doctest::Contains("missing"), DataError);

    auto rank3 = zeros<float>(Shape{2, 2, 2});
    gxt::write_tensor(tmp.path() / "bad.video.gxt", *rank3);
    CHECK_THROWS_AS(load_feature_file<float>(tmp.path(), "bad", Modality::video), FormatError);
}

TEST_SUITE_END();
