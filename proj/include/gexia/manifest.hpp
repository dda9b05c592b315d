#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gexia/errors.hpp"

namespace gexia {

// Granularity labels: short/long video x short/long text, plus image-text.
enum class Granularity { SVST, LVLT, LVST, IT };

std::string to_string(Granularity g);
Granularity granularity_from_string(const std::string& s);

struct Provenance {
    std::string op = "raw";  // raw | integrate | integrate_random | compress_text | compress_video
    std::vector<std::string> children;
};

// One manifest entry: a clip (or image) with its text and provenance.
struct ClipRecord {
    std::string id;
    Granularity granularity = Granularity::SVST;
    std::string source_id;
    double t_start = 0.0;
    double t_end = 0.0;
    std::string video_path;  // GXT1 u8 frames, relative to the manifest dir
    std::string image_path;  // GXT1 u8 single frame for IT records
    std::string text;
    Provenance provenance;

    bool is_image() const { return granularity == Granularity::IT; }
};

class Manifest {
public:
    Manifest() = default;
    explicit Manifest(std::vector<ClipRecord> records);

    void append(ClipRecord rec);
    const std::vector<ClipRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool contains(const std::string& id) const { return index_.count(id) > 0; }
    const ClipRecord& by_id(const std::string& id) const;

    std::vector<const ClipRecord*> with_granularity(Granularity g) const;
    std::map<std::string, std::size_t> histogram() const;

    // Structural invariants: unique ids, resolvable children, time ordering,
    // per-op provenance rules.
    void validate() const;

private:
    std::vector<ClipRecord> records_;
    std::map<std::string, std::size_t> index_;
};

// Line-delimited JSON, one record per line, UTF-8.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace gexia
