#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gexia/featurizer.hpp"
#include "gexia/iam.hpp"
#include "gexia/manifest.hpp"
#include "gexia/summarizer.hpp"

namespace gexia {

struct GexConfig {
    std::size_t min_group = 4;        // source groups smaller than this are dropped
    bool with_images = false;         // also emit IT records via middle-frame extraction
    bool random_fallback = false;     // random integration when no usable source groups exist
    std::size_t random_children = 4;  // children per randomly integrated record
    std::size_t max_children = 0;     // cap on children per integrated record; 0 = whole group
    std::uint64_t seed = 0;
    Granularity base = Granularity::SVST;
    SummarizerConfig summarizer;
};

struct GexResult {
    Manifest manifest;
    std::map<std::string, std::size_t> histogram;
    std::vector<std::string> warnings;
};

// Records grouped by source_id and sorted by t_start; groups smaller than
// min_group are dropped. Groups come back sorted by source_id.
std::vector<std::vector<const ClipRecord*>> group_by_source(const Manifest& manifest, std::size_t min_group,
                                                            Granularity base = Granularity::SVST);

// Frame-wise concatenation of same-source records in time order; texts are
// joined with a single space.
ClipRecord integrate(const std::vector<const ClipRecord*>& group, const std::filesystem::path& in_dir,
                     const std::filesystem::path& out_dir, const std::string& id);

// n records, each concatenating k distinct uniformly sampled records.
std::vector<ClipRecord> integrate_random(const std::vector<const ClipRecord*>& population, std::size_t k,
                                         std::size_t n, std::uint64_t seed, const std::filesystem::path& in_dir,
                                         const std::filesystem::path& out_dir);

// New record sharing the video with a summarized text.
ClipRecord compress_text(const ClipRecord& long_record, Summarizer& summarizer, std::size_t max_words,
                         std::vector<std::string>* warnings);

// IT record holding the middle frame (index floor(d/2)) of the source video.
ClipRecord compress_video(const ClipRecord& record, const std::filesystem::path& in_dir,
                          const std::filesystem::path& out_dir);

// Full pipeline: input records pass through untouched (paths re-based onto
// out_dir), then integration and compression products are appended sorted by
// id. Output manifest and generated frame files land under out_dir.
GexResult expand(const Manifest& input, const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                 const GexConfig& config);

struct AuditResult {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t pairs = 0;
};

// Embeds two index-paired text sets through the text branch and reports the
// mean and population standard deviation of the positive-pair cosines.
template <typename S>
AuditResult similarity_audit(const std::vector<std::string>& set_a, const std::vector<std::string>& set_b,
                             const EncoderConfig& cfg, const TextEncoderParams<S>& text_params,
                             const IamParams<S>& text_iam, std::int64_t iters, std::int64_t heads = 1) {
    if (set_a.size() != set_b.size()) throw UsageError("similarity_audit requires equal-size text sets");
    if (set_a.empty()) throw UsageError("similarity_audit requires at least one pair");
    AttendOptions opts;
    opts.heads = heads;
    auto embed = [&](const std::string& text) {
        Tape<S> tape;
        auto feat = encode_text(tape, tokenize(text, cfg), cfg, text_params);
        auto lat = iam_forward(tape, feat, text_iam, iters, opts);
        return pool_latents(tape, lat);
    };
    std::vector<double> sims;
    sims.reserve(set_a.size());
    for (std::size_t i = 0; i < set_a.size(); ++i) {
        auto ea = embed(set_a[i]);
        auto eb = embed(set_b[i]);
        sims.push_back(ops::cosine_sim(*ea, *eb));
    }
    AuditResult r;
    r.pairs = sims.size();
    for (double s : sims) r.mean += s;
    r.mean /= static_cast<double>(sims.size());
    for (double s : sims) r.stddev += (s - r.mean) * (s - r.mean);
    r.stddev = std::sqrt(r.stddev / static_cast<double>(sims.size()));
    return r;
}

}  // namespace gexia
