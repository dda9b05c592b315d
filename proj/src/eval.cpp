#include "gexia/eval.hpp"

#include <algorithm>
#include <cmath>

namespace gexia {

RetrievalReport retrieve(const Tensor<double>& sim, const std::vector<std::int64_t>& ground_truth,
                         const std::string& direction) {
    if (sim.shape.rank() != 2) throw DimensionError("retrieve expects a rank-2 similarity matrix");
    const std::int64_t q_count = sim.rows(), c_count = sim.cols();
    if (q_count == 0) throw UsageError("retrieve needs at least one query");
    if (static_cast<std::int64_t>(ground_truth.size()) != q_count) {
        throw UsageError("retrieve needs exactly one ground-truth index per query");
    }
    std::vector<double> ranks(static_cast<std::size_t>(q_count));
    RetrievalReport report;
    report.direction = direction;
    report.n_queries = q_count;
    for (std::int64_t q = 0; q < q_count; ++q) {
        const std::int64_t gt = ground_truth[static_cast<std::size_t>(q)];
        if (gt < 0 || gt >= c_count) throw UsageError("ground-truth index out of range");
        const double gt_score = sim.at(q, gt);
        std::int64_t rank = 1;
        for (std::int64_t j = 0; j < c_count; ++j) {
            if (sim.at(q, j) > gt_score) ++rank;
            else if (sim.at(q, j) == gt_score && j < gt) ++rank;
        }
        ranks[static_cast<std::size_t>(q)] = static_cast<double>(rank);
        if (rank <= 1) report.r1 += 1.0;
        if (rank <= 5) report.r5 += 1.0;
        if (rank <= 10) report.r10 += 1.0;
    }
    report.r1 /= static_cast<double>(q_count);
    report.r5 /= static_cast<double>(q_count);
    report.r10 /= static_cast<double>(q_count);
    std::sort(ranks.begin(), ranks.end());
    const std::size_t n = ranks.size();
    report.mdr = n % 2 == 1 ? ranks[n / 2] : 0.5 * (ranks[n / 2 - 1] + ranks[n / 2]);
    return report;
}

TensorPtr<double> bilinear_resize(const Tensor<double>& grid, std::int64_t out_h, std::int64_t out_w) {
    if (grid.shape.rank() != 2) throw DimensionError("bilinear_resize expects a rank-2 grid");
    const std::int64_t gh = grid.rows(), gw = grid.cols();
    auto out = zeros<double>(Shape{out_h, out_w});
    for (std::int64_t y = 0; y < out_h; ++y) {
        double sy = (static_cast<double>(y) + 0.5) * static_cast<double>(gh) / static_cast<double>(out_h) - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(gh - 1));
        const std::int64_t y0 = static_cast<std::int64_t>(std::floor(sy));
        const std::int64_t y1 = std::min(y0 + 1, gh - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::int64_t x = 0; x < out_w; ++x) {
            double sx = (static_cast<double>(x) + 0.5) * static_cast<double>(gw) / static_cast<double>(out_w) - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(gw - 1));
            const std::int64_t x0 = static_cast<std::int64_t>(std::floor(sx));
            const std::int64_t x1 = std::min(x0 + 1, gw - 1);
            const double fx = sx - static_cast<double>(x0);
            const double top = grid.at(y0, x0) * (1.0 - fx) + grid.at(y0, x1) * fx;
            const double bot = grid.at(y1, x0) * (1.0 - fx) + grid.at(y1, x1) * fx;
            out->at(y, x) = top * (1.0 - fy) + bot * fy;
        }
    }
    return out;
}

}  // namespace gexia
