#include "gexia/gex.hpp"

#include <algorithm>
#include <set>

#include "gexia/frames.hpp"
#include "gexia/rng.hpp"

namespace gexia {

namespace fs = std::filesystem;

namespace {

std::string rebase_path(const std::string& rel, const fs::path& from_dir, const fs::path& to_dir) {
    if (rel.empty()) return rel;
    fs::path abs = fs::weakly_canonical(from_dir / rel);
    std::error_code ec;
    fs::path out = fs::relative(abs, fs::weakly_canonical(to_dir), ec);
    if (ec || out.empty()) return abs.string();
    return out.generic_string();
}

FrameVolume load_record_frames(const ClipRecord& rec, const fs::path& base_dir) {
    const std::string& rel = rec.is_image() ? rec.image_path : rec.video_path;
    try {
        return read_frames(base_dir / rel);
    } catch (const std::exception& e) {
        throw DataError("record '" + rec.id + "': " + e.what());
    }
}

ClipRecord concatenate_group(const std::vector<const ClipRecord*>& group, const fs::path& in_dir,
                             const fs::path& out_dir, const std::string& id, const std::string& op,
                             const std::string& source_id) {
    FrameVolume merged;
    std::string text;
    for (const ClipRecord* child : group) {
        FrameVolume fv = load_record_frames(*child, in_dir);
        if (merged.d == 0) {
            merged = fv;
        } else {
            if (fv.h != merged.h || fv.w != merged.w) {
                throw DataError("record '" + child->id + "': frame geometry differs within group");
            }
            merged.d += fv.d;
            merged.rgb.insert(merged.rgb.end(), fv.rgb.begin(), fv.rgb.end());
        }
        if (!text.empty()) text.push_back(' ');
        text += child->text;
    }
    fs::create_directories(out_dir / "frames");
    const std::string rel = "frames/" + id + ".gxt";
    write_frames(out_dir / rel, merged);

    ClipRecord rec;
    rec.id = id;
    rec.granularity = Granularity::LVLT;
    rec.source_id = source_id;
    rec.t_start = group.front()->t_start;
    rec.t_end = group.back()->t_end;
    rec.video_path = rel;
    rec.text = text;
    rec.provenance.op = op;
    for (const ClipRecord* child : group) rec.provenance.children.push_back(child->id);
    return rec;
}

}  // namespace

std::vector<std::vector<const ClipRecord*>> group_by_source(const Manifest& manifest, std::size_t min_group,
                                                            Granularity base) {
    std::map<std::string, std::vector<const ClipRecord*>> by_source;
    for (const ClipRecord* rec : manifest.with_granularity(base)) by_source[rec->source_id].push_back(rec);
    std::vector<std::vector<const ClipRecord*>> groups;
    for (auto& [source, recs] : by_source) {
        if (recs.size() < std::max<std::size_t>(min_group, 1)) continue;
        std::stable_sort(recs.begin(), recs.end(),
                         [](const ClipRecord* a, const ClipRecord* b) { return a->t_start < b->t_start; });
        groups.push_back(std::move(recs));
    }
    return groups;  // map iteration keeps groups sorted by source_id
}

ClipRecord integrate(const std::vector<const ClipRecord*>& group, const fs::path& in_dir, const fs::path& out_dir,
                     const std::string& id) {
    if (group.size() < 2) throw UsageError("integrate needs at least 2 records");
    const std::string& source = group.front()->source_id;
    double prev = group.front()->t_start;
    for (const ClipRecord* rec : group) {
        if (rec->source_id != source) throw UsageError("integrate requires a single source_id, got '" +
                                                       rec->source_id + "' vs '" + source + "'");
        if (rec->t_start < prev) throw UsageError("integrate group must be sorted by t_start");
        prev = rec->t_start;
    }
    return concatenate_group(group, in_dir, out_dir, id, "integrate", source);
}

std::vector<ClipRecord> integrate_random(const std::vector<const ClipRecord*>& population, std::size_t k,
                                         std::size_t n, std::uint64_t seed, const fs::path& in_dir,
                                         const fs::path& out_dir) {
    if (k < 2) throw UsageError("random integration needs k >= 2 children");
    if (population.size() < k) {
        throw UsageError("random integration needs at least k=" + std::to_string(k) + " records, have " +
                         std::to_string(population.size()));
    }
    std::vector<ClipRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, "gex.integrate_random", i);
        std::vector<std::size_t> chosen;
        std::set<std::size_t> used;
        while (chosen.size() < k) {
            std::size_t idx = static_cast<std::size_t>(rng.uniform_index(population.size()));
            if (used.insert(idx).second) chosen.push_back(idx);
        }
        std::vector<const ClipRecord*> group;
        for (std::size_t idx : chosen) group.push_back(population[idx]);
        ClipRecord rec = concatenate_group(group, in_dir, out_dir, "lvlt_rand_" + std::to_string(i),
                                           "integrate_random", "random");
        // Random children come from mixed sources; the record spans its own
        // concatenated timeline.
        rec.t_start = 0.0;
        rec.t_end = 0.0;
        for (const ClipRecord* child : group) rec.t_end += child->t_end - child->t_start;
        out.push_back(std::move(rec));
    }
    return out;
}

ClipRecord compress_text(const ClipRecord& long_record, Summarizer& summarizer, std::size_t max_words,
                         std::vector<std::string>* warnings) {
    if (long_record.granularity != Granularity::LVLT) {
        throw UsageError("compress_text expects an LVLT record, got " + to_string(long_record.granularity));
    }
    std::string summary;
    if (long_record.text.empty()) {
        if (warnings) warnings->push_back("record '" + long_record.id + "': empty text, empty summary emitted");
    } else {
        summary = summarizer.summarize(long_record.text);
        if (count_words(summary) > max_words) summary = truncate_words(summary, max_words);
    }
    ClipRecord rec = long_record;
    std::string suffix = long_record.id;
    if (suffix.rfind("lvlt_", 0) == 0) suffix = suffix.substr(5);
    rec.id = "lvst_" + suffix;
    rec.granularity = Granularity::LVST;
    rec.text = summary;
    rec.provenance.op = "compress_text";
    rec.provenance.children = {long_record.id};
    return rec;
}

ClipRecord compress_video(const ClipRecord& record, const fs::path& in_dir, const fs::path& out_dir) {
    if (record.is_image()) throw UsageError("compress_video expects a video record");
    FrameVolume fv = load_record_frames(record, in_dir);
    FrameVolume middle = fv.frame(fv.d / 2);
    fs::create_directories(out_dir / "frames");
    const std::string id = "it_" + record.id;
    const std::string rel = "frames/" + id + ".gxt";
    write_frames(out_dir / rel, middle);

    ClipRecord rec;
    rec.id = id;
    rec.granularity = Granularity::IT;
    rec.source_id = record.source_id;
    rec.t_start = rec.t_end = 0.5 * (record.t_start + record.t_end);
    rec.image_path = rel;
    rec.text = record.text;
    rec.provenance.op = "compress_video";
    rec.provenance.children = {record.id};
    return rec;
}

GexResult expand(const Manifest& input, const fs::path& in_dir, const fs::path& out_dir, const GexConfig& config) {
    if (input.size() == 0) throw DataError("expand: input manifest is empty");
    auto base_records = input.with_granularity(config.base);
    if (base_records.empty()) {
        throw UsageError("expand: input has no records of base granularity " + to_string(config.base));
    }

    GexResult result;
    fs::create_directories(out_dir);

    // Pass-through of every input record, paths re-based onto out_dir.
    for (const ClipRecord& rec : input.records()) {
        ClipRecord copy = rec;
        copy.video_path = rebase_path(copy.video_path, in_dir, out_dir);
        copy.image_path = rebase_path(copy.image_path, in_dir, out_dir);
        result.manifest.append(std::move(copy));
    }

    std::vector<ClipRecord> generated;
    auto groups = group_by_source(input, config.min_group, config.base);
    if (groups.empty()) {
        if (config.random_fallback && base_records.size() >= config.random_children) {
            const std::size_t n = base_records.size() / config.random_children;
            for (auto& rec : integrate_random(base_records, config.random_children, n, config.seed, in_dir, out_dir)) {
                generated.push_back(std::move(rec));
            }
        } else {
            result.warnings.push_back("no source group reaches min_group=" + std::to_string(config.min_group) +
                                      "; no integration performed");
        }
    } else {
        for (auto& group : groups) {
            if (config.max_children > 0 && group.size() > config.max_children) group.resize(config.max_children);
            std::string id = "lvlt_" + group.front()->source_id;
            int bump = 1;
            while (input.contains(id)) id = "lvlt_" + group.front()->source_id + "_x" + std::to_string(++bump);
            generated.push_back(integrate(group, in_dir, out_dir, id));
        }
    }

    // Text compression on every integrated record. Remote failures fall back
    // to the extractive scorer unless fail_hard is set.
    std::unique_ptr<Summarizer> summarizer = make_summarizer(config.summarizer);
    std::vector<ClipRecord> compressed;
    for (const ClipRecord& lvlt : generated) {
        try {
            compressed.push_back(compress_text(lvlt, *summarizer, config.summarizer.max_words, &result.warnings));
        } catch (const RemoteServiceError& e) {
            if (config.summarizer.fail_hard) throw;
            result.warnings.push_back("record '" + lvlt.id + "': remote summarizer failed (" + e.what() +
                                      "); extractive fallback used");
            ExtractiveSummarizer fallback(config.summarizer.max_words);
            compressed.push_back(compress_text(lvlt, fallback, config.summarizer.max_words, &result.warnings));
        }
    }
    for (auto& rec : compressed) generated.push_back(std::move(rec));

    if (config.with_images) {
        for (const ClipRecord* rec : base_records) {
            if (!rec->is_image()) generated.push_back(compress_video(*rec, in_dir, out_dir));
        }
    }

    std::stable_sort(generated.begin(), generated.end(),
                     [](const ClipRecord& a, const ClipRecord& b) { return a.id < b.id; });
    for (auto& rec : generated) result.manifest.append(std::move(rec));

    result.manifest.validate();
    result.histogram = result.manifest.histogram();
    return result;
}

}  // namespace gexia
