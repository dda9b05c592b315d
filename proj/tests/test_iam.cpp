#include <doctest.h>

#include <Eigen/Dense>

#include <array>

#include "gexia/gradcheck.hpp"
#include "gexia/iam.hpp"
#include "test_util.hpp"

using namespace gexia;

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EMat to_eigen(const Tensor<double>& t) {
    return Eigen::Map<const EMat>(t.data.data(), t.rows(), t.cols());
}

DenseFeature<double> feature_of(TensorPtr<double> matrix, std::vector<std::uint8_t> mask = {}) {
    DenseFeature<double> f;
    if (mask.empty()) mask.assign(static_cast<std::size_t>(matrix->rows()), 1);
    f.matrix = std::move(matrix);
    f.mask = std::move(mask);
    f.modality = Modality::video;
    return f;
}

TensorPtr<double> random_mat(Shape shape, std::uint64_t seed, const std::string& name, bool rg = false) {
    Rng rng(seed, name);
    return randn<double>(shape, rng, 1.0, rg);
}

void set_identity(TensorPtr<double>& w) {
    std::fill(w->data.begin(), w->data.end(), 0.0);
    for (std::int64_t i = 0; i < w->rows(); ++i) w->at(i, i) = 1.0;
}

}  // namespace

TEST_SUITE_BEGIN("iam");

TEST_CASE("cross_attend with a single key reduces to A + OutProj(V(F0))") {
    const std::int64_t N = 3, D = 4, C = 5;
    auto block = AttnBlockParams<double>::init(D, C, 77, "blk");
    auto A = random_mat(Shape{N, D}, 1, "A");
    auto F = feature_of(random_mat(Shape{1, C}, 2, "F"));
    Tape<double> tape;
    auto out = cross_attend(tape, A, F, block);

    // independent recomputation: attention weight over one key is exactly 1
    EMat v = to_eigen(*F.matrix) * to_eigen(*block.wv);
    for (std::int64_t j = 0; j < D; ++j) v(0, j) += block.bv->data[static_cast<std::size_t>(j)];
    EMat proj = v * to_eigen(*block.wo);
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = 0; j < D; ++j) {
            const double expect = A->at(i, j) + proj(0, j) + block.bo->data[static_cast<std::size_t>(j)];
            CHECK(out->at(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("cross_attend uniform-attention closed form: A + column mean of F") {
    const std::int64_t N = 2, D = 4, C = 4, M = 4;
    auto block = AttnBlockParams<double>::init(D, C, 78, "blk");
    std::fill(block.wq->data.begin(), block.wq->data.end(), 0.0);  // constant logits
    std::fill(block.bq->data.begin(), block.bq->data.end(), 0.0);
    set_identity(block.wv);
    std::fill(block.bv->data.begin(), block.bv->data.end(), 0.0);
    set_identity(block.wo);
    std::fill(block.bo->data.begin(), block.bo->data.end(), 0.0);

    auto A = random_mat(Shape{N, D}, 3, "A");
    auto F = feature_of(random_mat(Shape{M, C}, 4, "F"));
    AttendOptions opts;
    opts.bypass_layernorm = true;
    Tape<double> tape;
    auto out = cross_attend(tape, A, F, block, opts);
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = 0; j < D; ++j) {
            double mean = 0;
            for (std::int64_t r = 0; r < M; ++r) mean += F.matrix->at(r, j);
            mean /= static_cast<double>(M);
            CHECK(out->at(i, j) == doctest::Approx(A->at(i, j) + mean).epsilon(1e-12));
        }
}

TEST_CASE("masked rows are invisible: appending or inserting them changes nothing") {
    const std::int64_t N = 4, D = 8, C = 6, M = 5;
    auto block = AttnBlockParams<double>::init(D, C, 79, "blk");
    auto A = random_mat(Shape{N, D}, 5, "A");
    auto F = feature_of(random_mat(Shape{M, C}, 6, "F"));
    Tape<double> tape;
    auto base = cross_attend(tape, A, F, block);

    SUBCASE("append one masked row") {
        auto padded = zeros<double>(Shape{M + 1, C});
        std::copy(F.matrix->data.begin(), F.matrix->data.end(), padded->data.begin());
        for (std::int64_t j = 0; j < C; ++j) padded->at(M, j) = 123.0;  // garbage, must not matter
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(M + 1), 1);
        mask.back() = 0;
        auto out = cross_attend(tape, A, feature_of(padded, mask), block);
        CHECK(out->data == base->data);
    }

    SUBCASE("insert masked rows at front and middle") {
        auto padded = zeros<double>(Shape{M + 2, C});
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(M + 2), 1);
        mask[0] = 0;
        mask[3] = 0;
        std::int64_t src = 0;
        for (std::int64_t r = 0; r < M + 2; ++r) {
            if (mask[static_cast<std::size_t>(r)] == 0) {
                for (std::int64_t j = 0; j < C; ++j) padded->at(r, j) = -7.0;
            } else {
                for (std::int64_t j = 0; j < C; ++j) padded->at(r, j) = F.matrix->at(src, j);
                ++src;
            }
        }
        auto out = cross_attend(tape, A, feature_of(padded, mask), block);
        CHECK(out->data == base->data);
    }

    SUBCASE("all rows masked is degenerate") {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(M), 0);
        CHECK_THROWS_AS(cross_attend(tape, A, feature_of(F.matrix, mask), block), DegenerateInputError);
    }
}

TEST_CASE("self_attend single latent and uniform attention forms") {
    const std::int64_t D = 4;
    auto block = AttnBlockParams<double>::init(D, D, 80, "blk");

    SUBCASE("N=1: out = A + OutProj(v(LN(A)))") {
        auto A = random_mat(Shape{1, D}, 7, "A");
        Tape<double> tape;
        auto out = self_attend(tape, A, block);
        auto h = ops::layernorm(tape, A, block.ln2_gain, block.ln2_bias);
        EMat v = to_eigen(*h) * to_eigen(*block.swv);
        for (std::int64_t j = 0; j < D; ++j) v(0, j) += block.sbv->data[static_cast<std::size_t>(j)];
        EMat proj = v * to_eigen(*block.swo);
        for (std::int64_t j = 0; j < D; ++j) {
            const double expect = A->at(0, j) + proj(0, j) + block.sbo->data[static_cast<std::size_t>(j)];
            CHECK(out->at(0, j) == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    SUBCASE("zero query projection: residual plus OutProj of the mean value") {
        const std::int64_t N = 5;
        std::fill(block.swq->data.begin(), block.swq->data.end(), 0.0);
        std::fill(block.sbq->data.begin(), block.sbq->data.end(), 0.0);
        auto A = random_mat(Shape{N, D}, 8, "A");
        AttendOptions opts;
        opts.bypass_layernorm = true;
        Tape<double> tape;
        auto out = self_attend(tape, A, block, opts);
        EMat v = to_eigen(*A) * to_eigen(*block.swv);
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < D; ++j) v(i, j) += block.sbv->data[static_cast<std::size_t>(j)];
        EMat mean = v.colwise().mean();
        EMat proj = mean * to_eigen(*block.swo);
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < D; ++j) {
                const double expect = A->at(i, j) + proj(0, j) + block.sbo->data[static_cast<std::size_t>(j)];
                CHECK(out->at(i, j) == doctest::Approx(expect).epsilon(1e-12));
            }
    }

    SUBCASE("latent permutation equivariance") {
        const std::int64_t N = 4;
        auto A = random_mat(Shape{N, D}, 9, "A");
        const std::array<std::int64_t, 4> perm = {3, 1, 0, 2};
        auto Ap = zeros<double>(Shape{N, D});
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < D; ++j) Ap->at(i, j) = A->at(perm[static_cast<std::size_t>(i)], j);
        Tape<double> tape;
        auto out = self_attend(tape, A, block);
        auto outp = self_attend(tape, Ap, block);
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < D; ++j)
                CHECK(outp->at(i, j) ==
                      doctest::Approx(out->at(perm[static_cast<std::size_t>(i)], j)).epsilon(1e-12));
    }
}

TEST_CASE("iam_forward: iteration semantics and fixed-size contract") {
    IamConfig cfg;
    cfg.n_latents = 8;
    cfg.latent_dim = 16;
    const std::int64_t C = 12;
    auto params = IamParams<double>::init(cfg, C, 81, "iam");

    SUBCASE("iters=0 equals the unrolled block alone") {
        auto F = feature_of(random_mat(Shape{6, C}, 10, "F"));
        Tape<double> t1, t2;
        auto all = iam_forward(t1, F, params, 0);
        auto manual = self_attend(t2, cross_attend(t2, params.base, F, params.unrolled), params.unrolled);
        CHECK(all->data == manual->data);
    }

    SUBCASE("iters=2 equals composing the iterative block twice on A0") {
        auto F = feature_of(random_mat(Shape{6, C}, 11, "F"));
        Tape<double> t1, t2;
        auto all = iam_forward(t1, F, params, 2);
        auto a = self_attend(t2, cross_attend(t2, params.base, F, params.unrolled), params.unrolled);
        for (int k = 0; k < 2; ++k) a = self_attend(t2, cross_attend(t2, a, F, params.iterative), params.iterative);
        CHECK(all->data == a->data);
    }

    SUBCASE("output is N x D for any feature length and iteration count") {
        for (std::int64_t M : {4, 64, 256}) {
            auto F = feature_of(random_mat(Shape{M, C}, 12 + static_cast<std::uint64_t>(M), "F"));
            for (std::int64_t iters : {0, 1, 3, 5}) {
                Tape<double> tape;
                auto out = iam_forward(tape, F, params, iters);
                CHECK(out->shape == Shape{cfg.n_latents, cfg.latent_dim});
            }
        }
    }

    SUBCASE("negative iteration count is a usage error") {
        auto F = feature_of(random_mat(Shape{4, C}, 13, "F"));
        Tape<double> tape;
        CHECK_THROWS_AS(iam_forward(tape, F, params, -1), UsageError);
    }

    SUBCASE("parameter count is independent of the iteration count") {
        const std::size_t count = params.parameter_count();
        auto F = feature_of(random_mat(Shape{4, C}, 14, "F"));
        for (std::int64_t iters : {0, 1, 3, 5}) {
            Tape<double> tape;
            (void)iam_forward(tape, F, params, iters);
            CHECK(params.parameter_count() == count);
        }
        auto again = IamParams<double>::init(cfg, C, 99, "iam2");
        CHECK(again.parameter_count() == count);
    }

    SUBCASE("deterministic: same seed gives bit-identical outputs") {
        auto p2 = IamParams<double>::init(cfg, C, 81, "iam");
        auto F = feature_of(random_mat(Shape{5, C}, 15, "F"));
        Tape<double> t1, t2;
        CHECK(iam_forward(t1, F, params, 3)->data == iam_forward(t2, F, p2, 3)->data);
    }
}

TEST_CASE("pool_latents") {
    Tape<double> tape;
    auto same = make_tensor<double>(Shape{3, 2}, {1.5, -2.0, 1.5, -2.0, 1.5, -2.0});
    auto pooled = pool_latents(tape, same);
    CHECK(pooled->data == std::vector<double>{1.5, -2.0});

    auto two = make_tensor<double>(Shape{2, 2}, {1, 0, 0, 1});
    CHECK(pool_latents(tape, two)->data == std::vector<double>{0.5, 0.5});

    auto swapped = make_tensor<double>(Shape{2, 2}, {0, 1, 1, 0});
    CHECK(pool_latents(tape, swapped)->data == pool_latents(tape, two)->data);
}

TEST_CASE("iam_forward gradients match finite differences, including F") {
    IamConfig cfg;
    cfg.n_latents = 3;
    cfg.latent_dim = 4;
    const std::int64_t C = 5, M = 6;
    auto params = IamParams<double>::init(cfg, C, 82, "iam");
    auto F = feature_of(random_mat(Shape{M, C}, 16, "F", true));
    auto weights = random_mat(Shape{cfg.n_latents, cfg.latent_dim}, 17, "w");

    auto fwd = [&](Tape<double>& t) {
        auto out = iam_forward(t, F, params, 3);
        return ops::sum_all(t, ops::mul(t, out, weights));
    };
    auto tensors = params.named("iam");
    tensors.emplace_back("feature", F.matrix);
    for (const auto& row : gradcheck_params<double>(tensors, fwd, 1e-5)) {
        CAPTURE(row.name);
        CHECK(row.max_rel_err < 1e-5);
    }
}

TEST_CASE("multi-head attention: shapes and gradients") {
    IamConfig cfg;
    cfg.n_latents = 3;
    cfg.latent_dim = 8;
    cfg.heads = 2;
    const std::int64_t C = 5;
    auto params = IamParams<double>::init(cfg, C, 83, "iam");
    auto F = feature_of(random_mat(Shape{4, C}, 18, "F"));
    AttendOptions opts;
    opts.heads = 2;
    Tape<double> tape;
    auto out = iam_forward(tape, F, params, 1, opts);
    CHECK(out->shape == Shape{3, 8});

    auto weights = random_mat(Shape{3, 8}, 19, "w");
    auto fwd = [&](Tape<double>& t) {
        return ops::sum_all(t, ops::mul(t, iam_forward(t, F, params, 1, opts), weights));
    };
    auto rows = gradcheck_params<double>(
        {{"base", params.base}, {"wq", params.unrolled.wq}, {"swo", params.iterative.swo}}, fwd, 1e-5);
    for (const auto& row : rows) CHECK(row.max_rel_err < 1e-5);

    IamConfig bad = cfg;
    bad.heads = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("iter policy covers every granularity with the documented counts") {
    IterPolicy policy;
    CHECK(policy.at("SVST").video_iters == 1);
    CHECK(policy.at("SVST").text_iters == 1);
    CHECK(policy.at("LVLT").video_iters == 3);
    CHECK(policy.at("LVLT").text_iters == 3);
    CHECK(policy.at("LVST").video_iters == 3);
    CHECK(policy.at("LVST").text_iters == 1);
    CHECK(policy.at("IT").video_iters == 0);
    CHECK(policy.at("IT").text_iters == 1);
    CHECK_THROWS_AS(policy.at("XXL"), ConfigError);
}

TEST_SUITE_END();
