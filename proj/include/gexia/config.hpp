#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "gexia/featurizer.hpp"
#include "gexia/iam.hpp"
#include "gexia/summarizer.hpp"

namespace gexia {

struct TrainConfig {
    std::int64_t batch_size = 16;
    std::int64_t steps = 2000;
    double lr_other = 1e-3;
    double lr_encoders = 1e-5;  // encoders train 100x slower than the rest
    double weight_decay = 0.01;
    std::string schedule = "cosine";  // cosine | constant
    double min_lr = 0.0;
    double tau_init = 0.07;
    std::int64_t checkpoint_every = 500;
    // Granularity sampling weights; empty means proportional to the dataset.
    std::map<std::string, double> mix_weights;

    void validate() const {
        if (batch_size < 2) throw ConfigError("contrastive training needs batch_size >= 2");
        if (steps < 1) throw ConfigError("steps must be positive");
        if (schedule != "cosine" && schedule != "constant") throw ConfigError("schedule must be cosine or constant");
        if (tau_init <= 0) throw ConfigError("tau_init must be positive");
    }
};

// One structured config file drives a run; CLI flags override single fields.
struct RunConfig {
    std::uint64_t seed = 7;
    std::string dtype = "f32";  // f32 | f64
    EncoderConfig encoder;
    IamConfig iam;
    IterPolicy iter_policy;
    TrainConfig train;
    SummarizerConfig summarizer;

    void validate() const {
        if (dtype != "f32" && dtype != "f64") throw ConfigError("dtype must be f32 or f64");
        encoder.validate();
        iam.validate();
        train.validate();
    }
};

RunConfig run_config_from_json_text(const std::string& text);
std::string run_config_to_json_text(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace gexia
