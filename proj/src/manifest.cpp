#include "gexia/manifest.hpp"

#include <fstream>
#include <json.hpp>

namespace gexia {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Granularity g) {
    switch (g) {
        case Granularity::SVST: return "SVST";
        case Granularity::LVLT: return "LVLT";
        case Granularity::LVST: return "LVST";
        case Granularity::IT: return "IT";
    }
    throw DataError("unknown granularity");
}

Granularity granularity_from_string(const std::string& s) {
    if (s == "SVST") return Granularity::SVST;
    if (s == "LVLT") return Granularity::LVLT;
    if (s == "LVST") return Granularity::LVST;
    if (s == "IT") return Granularity::IT;
    throw DataError("unknown granularity label '" + s + "'");
}

Manifest::Manifest(std::vector<ClipRecord> records) {
    for (auto& r : records) append(std::move(r));
}

void Manifest::append(ClipRecord rec) {
    if (index_.count(rec.id)) throw DataError("duplicate record id '" + rec.id + "'");
    index_[rec.id] = records_.size();
    records_.push_back(std::move(rec));
}

const ClipRecord& Manifest::by_id(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("no record with id '" + id + "'");
    return records_[it->second];
}

std::vector<const ClipRecord*> Manifest::with_granularity(Granularity g) const {
    std::vector<const ClipRecord*> out;
    for (const auto& r : records_) {
        if (r.granularity == g) out.push_back(&r);
    }
    return out;
}

std::map<std::string, std::size_t> Manifest::histogram() const {
    std::map<std::string, std::size_t> h;
    for (const auto& r : records_) ++h[to_string(r.granularity)];
    return h;
}

void Manifest::validate() const {
    for (const auto& r : records_) {
        if (r.is_image()) {
            if (r.t_start != r.t_end) throw DataError("record '" + r.id + "': IT records need t_start == t_end");
            if (r.image_path.empty()) throw DataError("record '" + r.id + "': IT record has no image_path");
        } else {
            if (!(r.t_end > r.t_start)) throw DataError("record '" + r.id + "': t_end must exceed t_start");
            if (r.video_path.empty()) throw DataError("record '" + r.id + "': video record has no video_path");
        }
        const auto& p = r.provenance;
        if (p.op == "raw") {
            if (!p.children.empty()) throw DataError("record '" + r.id + "': raw records cannot list children");
            continue;
        }
        for (const auto& c : p.children) {
            if (!contains(c)) throw DataError("record '" + r.id + "': unresolvable child '" + c + "'");
        }
        if (p.op == "integrate" || p.op == "integrate_random") {
            if (p.children.size() < 2) throw DataError("record '" + r.id + "': integrated records need >= 2 children");
            if (p.op == "integrate") {
                double prev = -1e300;
                for (const auto& c : p.children) {
                    const auto& child = by_id(c);
                    if (child.source_id != r.source_id) {
                        throw DataError("record '" + r.id + "': integrate children must share its source_id");
                    }
                    if (child.t_start < prev) throw DataError("record '" + r.id + "': children not in time order");
                    prev = child.t_start;
                }
            }
        } else if (p.op == "compress_text" || p.op == "compress_video") {
            if (p.children.size() != 1) throw DataError("record '" + r.id + "': compression records need 1 child");
        } else {
            throw DataError("record '" + r.id + "': unknown provenance op '" + p.op + "'");
        }
    }
}

namespace {

ordered_json record_to_json(const ClipRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["granularity"] = to_string(r.granularity);
    j["source_id"] = r.source_id;
    j["t_start"] = r.t_start;
    j["t_end"] = r.t_end;
    j["video_path"] = r.video_path;
    j["image_path"] = r.image_path;
    j["text"] = r.text;
    j["provenance"] = ordered_json{{"op", r.provenance.op}, {"children", r.provenance.children}};
    return j;
}

ClipRecord record_from_json(const ordered_json& j, std::size_t line_no) {
    const char* required[] = {"id",         "granularity", "source_id", "t_start",   "t_end",
                              "video_path", "image_path",  "text",      "provenance"};
    for (const char* key : required) {
        if (!j.contains(key)) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": missing field '" + key + "'");
        }
    }
    ClipRecord r;
    r.id = j.at("id").get<std::string>();
    r.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    r.source_id = j.at("source_id").get<std::string>();
    r.t_start = j.at("t_start").get<double>();
    r.t_end = j.at("t_end").get<double>();
    r.video_path = j.at("video_path").get<std::string>();
    r.image_path = j.at("image_path").get<std::string>();
    r.text = j.at("text").get<std::string>();
    const auto& p = j.at("provenance");
    r.provenance.op = p.at("op").get<std::string>();
    r.provenance.children = p.at("children").get<std::vector<std::string>>();
    return r;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest: " + path.string());
    Manifest m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        m.append(record_from_json(j, line_no));
    }
    return m;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write manifest: " + path.string());
    for (const auto& r : manifest.records()) os << record_to_json(r).dump() << '\n';
    if (!os) throw DataError("manifest write failed: " + path.string());
}

}  // namespace gexia
