#include "gexia/checkpoint_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <json.hpp>

namespace gexia {

using ordered_json = nlohmann::ordered_json;

void write_checkpoint_meta(const std::filesystem::path& dir, const CheckpointMeta& meta) {
    ordered_json j;
    j["format"] = "gexia-checkpoint-v1";
    j["dtype"] = meta.dtype;
    j["step"] = meta.step;
    j["config"] = ordered_json::parse(meta.config_json);
    j["tensors"] = meta.tensor_names;
    j["optimizer"] = ordered_json{{"present", meta.has_optimizer}, {"step", meta.optimizer_step}};
    std::ofstream os(dir / "meta.json", std::ios::trunc);
    if (!os) throw DataError("cannot write checkpoint meta in " + dir.string());
    os << j.dump(2) << '\n';
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir) {
    std::ifstream is(dir / "meta.json");
    if (!is) throw DataError("not a checkpoint directory (no meta.json): " + dir.string());
    ordered_json j;
    try {
        is >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("corrupt checkpoint meta in " + dir.string() + ": " + e.what());
    }
    if (!j.contains("format") || j.at("format").get<std::string>() != "gexia-checkpoint-v1") {
        throw FormatError("unknown checkpoint format in " + dir.string());
    }
    CheckpointMeta meta;
    meta.dtype = j.at("dtype").get<std::string>();
    meta.step = j.at("step").get<std::int64_t>();
    meta.config_json = j.at("config").dump();
    meta.tensor_names = j.at("tensors").get<std::vector<std::string>>();
    meta.has_optimizer = j.at("optimizer").at("present").get<bool>();
    meta.optimizer_step = j.at("optimizer").at("step").get<std::int64_t>();
    return meta;
}

RunLock::RunLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    path_ = dir / ".lock";
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw DataError("run directory is locked by another writer: " + path_.string());
    }
    ::close(fd);
}

RunLock::~RunLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

}  // namespace gexia
