#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gexia/errors.hpp"

namespace gexia {

struct CheckpointMeta {
    std::string dtype;  // f32 | f64
    std::int64_t step = 0;
    std::string config_json;  // embedded effective RunConfig
    std::vector<std::string> tensor_names;
    bool has_optimizer = false;
    std::int64_t optimizer_step = 0;
};

void write_checkpoint_meta(const std::filesystem::path& dir, const CheckpointMeta& meta);
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir);

// Exclusive lock file guarding a run directory against concurrent writers.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

}  // namespace gexia
