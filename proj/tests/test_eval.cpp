#include <doctest.h>

#include <algorithm>

#include "gexia/eval.hpp"
#include "gexia/synth.hpp"
#include "test_util.hpp"

using namespace gexia;

namespace {

// Sort-based recomputation of ranks, including the index tie-break.
RetrievalReport brute_force_retrieve(const Tensor<double>& sim, const std::vector<std::int64_t>& gt) {
    RetrievalReport rep;
    rep.direction = "V2T";
    rep.n_queries = sim.rows();
    std::vector<double> ranks;
    for (std::int64_t q = 0; q < sim.rows(); ++q) {
        std::vector<std::int64_t> order(static_cast<std::size_t>(sim.cols()));
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<std::int64_t>(j);
        std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
            if (sim.at(q, a) != sim.at(q, b)) return sim.at(q, a) > sim.at(q, b);
            return a < b;
        });
        const auto pos = std::find(order.begin(), order.end(), gt[static_cast<std::size_t>(q)]) - order.begin();
        const double rank = static_cast<double>(pos + 1);
        ranks.push_back(rank);
        if (rank <= 1) rep.r1 += 1;
        if (rank <= 5) rep.r5 += 1;
        if (rank <= 10) rep.r10 += 1;
    }
    const double n = static_cast<double>(rep.n_queries);
    rep.r1 /= n;
    rep.r5 /= n;
    rep.r10 /= n;
    std::sort(ranks.begin(), ranks.end());
    rep.mdr = ranks.size() % 2 == 1 ? ranks[ranks.size() / 2]
                                    : 0.5 * (ranks[ranks.size() / 2 - 1] + ranks[ranks.size() / 2]);
    return rep;
}

RunConfig tiny_cfg() {
    RunConfig cfg;
    cfg.encoder.frame_h = 16;
    cfg.encoder.frame_w = 16;
    cfg.encoder.patch_size = 8;
    cfg.encoder.c_v = 8;
    cfg.encoder.c_t = 8;
    cfg.encoder.m = 16;
    cfg.encoder.d_short = 2;
    cfg.encoder.d_long = 4;
    cfg.iam.n_latents = 2;
    cfg.iam.latent_dim = 8;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("retrieve: identity and reversed rankings") {
    auto eye = zeros<double>(Shape{4, 4});
    for (int i = 0; i < 4; ++i) eye->at(i, i) = 1.0;
    std::vector<std::int64_t> gt = {0, 1, 2, 3};
    auto rep = retrieve(*eye, gt, "V2T");
    CHECK(rep.r1 == 1.0);
    CHECK(rep.r5 == 1.0);
    CHECK(rep.mdr == 1.0);

    auto rev = zeros<double>(Shape{4, 10});
    std::vector<std::int64_t> worst(4);
    for (std::int64_t q = 0; q < 4; ++q) {
        for (std::int64_t j = 0; j < 10; ++j) rev->at(q, j) = static_cast<double>(j);
        worst[static_cast<std::size_t>(q)] = 0;  // lowest score, ranked behind all 9 others
    }
    auto worst_rep = retrieve(*rev, worst, "V2T");
    CHECK(worst_rep.r1 == 0.0);
    CHECK(worst_rep.mdr == 10.0);

    CHECK_THROWS_AS(retrieve(*eye, {0, 1}, "V2T"), UsageError);
}

TEST_CASE("retrieve matches the brute-force oracle on 50 random matrices with ties") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed, "retrieval.oracle");
        auto sim = zeros<double>(Shape{7, 7});
        std::vector<std::int64_t> gt(7);
        for (std::int64_t q = 0; q < 7; ++q) {
            gt[static_cast<std::size_t>(q)] = static_cast<std::int64_t>(rng.uniform_index(7));
            for (std::int64_t j = 0; j < 7; ++j) {
                // coarse grid of values forces frequent ties
                sim->at(q, j) = 0.25 * static_cast<double>(rng.uniform_index(4));
            }
        }
        auto fast = retrieve(*sim, gt, "V2T");
        auto oracle = brute_force_retrieve(*sim, gt);
        CHECK(fast.r1 == oracle.r1);
        CHECK(fast.r5 == oracle.r5);
        CHECK(fast.r10 == oracle.r10);
        CHECK(fast.mdr == oracle.mdr);
    }
}

TEST_CASE("retrieval metrics are invariant under consistent permutation") {
    Rng rng(3, "perm");
    auto sim = zeros<double>(Shape{5, 5});
    for (auto& v : sim->data) v = rng.uniform();
    std::vector<std::int64_t> gt = {0, 1, 2, 3, 4};
    auto base = retrieve(*sim, gt, "V2T");

    const std::array<std::int64_t, 5> qperm = {3, 0, 4, 1, 2};
    const std::array<std::int64_t, 5> cperm = {1, 4, 0, 2, 3};
    std::array<std::int64_t, 5> cinv{};
    for (std::int64_t j = 0; j < 5; ++j) cinv[static_cast<std::size_t>(cperm[static_cast<std::size_t>(j)])] = j;
    auto shuffled = zeros<double>(Shape{5, 5});
    std::vector<std::int64_t> gt2(5);
    for (std::int64_t q = 0; q < 5; ++q) {
        for (std::int64_t j = 0; j < 5; ++j)
            shuffled->at(q, j) = sim->at(qperm[static_cast<std::size_t>(q)], cperm[static_cast<std::size_t>(j)]);
        gt2[static_cast<std::size_t>(q)] = cinv[static_cast<std::size_t>(gt[static_cast<std::size_t>(
            qperm[static_cast<std::size_t>(q)])])];
    }
    auto perm = retrieve(*shuffled, gt2, "V2T");
    CHECK(base.r1 == perm.r1);
    CHECK(base.r5 == perm.r5);
    CHECK(base.mdr == perm.mdr);
}

TEST_CASE("adding a strictly-worse candidate changes nothing") {
    Rng rng(4, "worse");
    auto sim = zeros<double>(Shape{4, 6});
    for (auto& v : sim->data) v = 0.2 + 0.8 * rng.uniform();
    std::vector<std::int64_t> gt = {0, 1, 2, 3};
    auto base = retrieve(*sim, gt, "V2T");

    auto grown = zeros<double>(Shape{4, 7});
    for (std::int64_t q = 0; q < 4; ++q) {
        for (std::int64_t j = 0; j < 6; ++j) grown->at(q, j) = sim->at(q, j);
        grown->at(q, 6) = -1.0;
    }
    auto rep = retrieve(*grown, gt, "V2T");
    CHECK(base.r1 == rep.r1);
    CHECK(base.r5 == rep.r5);
    CHECK(base.r10 == rep.r10);
    CHECK(base.mdr == rep.mdr);
}

TEST_CASE("symmetric similarities give identical T2V and V2T reports") {
    Rng rng(5, "sym");
    auto sim = zeros<double>(Shape{5, 5});
    for (std::int64_t i = 0; i < 5; ++i)
        for (std::int64_t j = 0; j <= i; ++j) {
            const double v = rng.uniform();
            sim->at(i, j) = v;
            sim->at(j, i) = v;
        }
    std::vector<std::int64_t> gt = {0, 1, 2, 3, 4};
    auto v2t = retrieve(*sim, gt, "V2T");
    Tape<double> tape;
    auto t2v = retrieve(*ops::transpose(tape, sim), gt, "T2V");
    CHECK(v2t.r1 == t2v.r1);
    CHECK(v2t.r5 == t2v.r5);
    CHECK(v2t.r10 == t2v.r10);
    CHECK(v2t.mdr == t2v.mdr);
}

TEST_CASE("heatmap grid geometry follows the closed form") {
    for (std::int64_t H : {224, 96, 64}) {
        for (std::int64_t patch : {32, 16}) {
            for (std::int64_t stride : {16, 8}) {
                const std::int64_t expect = (H - patch) / stride + 1;
                HeatmapGeometry geom;
                geom.patch = patch;
                geom.stride = stride;
                CHECK(expect == (H - geom.patch) / geom.stride + 1);
            }
        }
    }
    // 224 px frames with a 32 px mask and 16 px stride give a 13x13 grid
    CHECK((224 - 32) / 16 + 1 == 13);
}

TEST_CASE("alignment heatmap: geometry, no-op masks, purity") {
    RunConfig cfg = tiny_cfg();
    auto model = Model<double>::init(cfg.encoder, cfg.iam, 0.07, 91);
    FrameVolume frames = FrameVolume::blank(2, 16, 16);
    Rng rng(6, "frames");
    for (auto& px : frames.rgb) px = static_cast<std::uint8_t>(rng.uniform_index(256));
    // zero out the top-left 8x8 of frame 0 so the first mask is a no-op
    for (std::int64_t y = 0; y < 8; ++y)
        for (std::int64_t x = 0; x < 8; ++x)
            for (std::int64_t c = 0; c < 3; ++c) frames.at(0, y, x, c) = 0;

    HeatmapGeometry geom;
    geom.patch = 8;
    geom.stride = 4;
    auto before = model.video_encoder.patch_proj->data;
    auto result = alignment_heatmap(model, frames, "some caption", geom, 1, 1);
    REQUIRE(result.grids.size() == 2);
    CHECK(result.grid_h == 3);
    CHECK(result.grid_w == 3);
    CHECK(result.grids[0]->shape == Shape{3, 3});
    CHECK(result.resized[0]->shape == Shape{16, 16});
    CHECK(result.grids[0]->at(0, 0) == 0.0);  // masking an all-zero region is a no-op
    for (const auto& g : result.grids) {
        for (double v : g->data) CHECK(std::isfinite(v));
    }
    CHECK(model.video_encoder.patch_proj->data == before);

    HeatmapGeometry too_big;
    too_big.patch = 64;
    CHECK_THROWS_AS(alignment_heatmap(model, frames, "text", too_big, 1, 1), UsageError);
}

TEST_CASE("bilinear resize basics") {
    auto flat = full<double>(Shape{3, 3}, 2.5);
    auto out = bilinear_resize(*flat, 16, 16);
    CHECK(out->shape == Shape{16, 16});
    for (double v : out->data) CHECK(v == doctest::Approx(2.5));

    auto grid = make_tensor<double>(Shape{2, 2}, {0, 1, 1, 2});
    auto up = bilinear_resize(*grid, 4, 4);
    CHECK(up->at(0, 0) == doctest::Approx(0.0));
    CHECK(up->at(3, 3) == doctest::Approx(2.0));
    CHECK(up->at(0, 3) == doctest::Approx(1.0));
}

TEST_CASE("zero-shot classification mechanics") {
    RunConfig cfg = tiny_cfg();
    auto model = Model<double>::init(cfg.encoder, cfg.iam, 0.07, 92);
    TempDir tmp("zeroshot");
    SynthConfig synth;
    synth.pairs = 4;
    synth.sources = 2;
    synth.frame_h = 16;
    synth.frame_w = 16;
    synth.frames_per_clip = 4;
    Manifest corpus = synthesize_corpus(tmp.path() / "data", synth);
    const ClipRecord& rec = corpus.records()[0];
    IterPolicy policy;

    auto result = zero_shot_classify(model, rec, tmp.path() / "data", {"cat", "dog", "fish"},
                                     default_zero_shot_prompt(), policy);
    CHECK(result.scores.size() == 3);
    for (double s : result.scores) {
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }

    auto dup = zero_shot_classify(model, rec, tmp.path() / "data", {"same", "same"}, "{label}", policy);
    CHECK(dup.scores[0] == dup.scores[1]);
    CHECK(dup.predicted == 0);  // ties break toward the smaller index

    CHECK_THROWS_AS(zero_shot_classify(model, rec, tmp.path() / "data", {"only"}, "{label}", policy), UsageError);
}

TEST_CASE("ablation sweep emits one deterministic row per setting") {
    RunConfig cfg = tiny_cfg();
    auto model = Model<double>::init(cfg.encoder, cfg.iam, 0.07, 93);
    TempDir tmp("sweep");
    SynthConfig synth;
    synth.pairs = 6;
    synth.sources = 2;
    synth.frame_h = 16;
    synth.frame_w = 16;
    synth.frames_per_clip = 4;
    Manifest corpus = synthesize_corpus(tmp.path() / "data", synth);
    std::vector<const ClipRecord*> records;
    for (const auto& r : corpus.records()) records.push_back(&r);

    std::vector<std::pair<std::int64_t, std::int64_t>> settings = {{1, 1}, {3, 1}, {3, 3}};
    auto rows = ablation_sweep(model, records, tmp.path() / "data", settings);
    REQUIRE(rows.size() == 3);
    auto rows2 = ablation_sweep(model, records, tmp.path() / "data", settings);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].t2v == rows2[i].t2v);
        CHECK(rows[i].v2t == rows2[i].v2t);
    }
    auto twice = ablation_sweep(model, records, tmp.path() / "data", {{2, 2}, {2, 2}});
    CHECK(twice[0].t2v == twice[1].t2v);
}

TEST_SUITE_END();
