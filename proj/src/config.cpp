#include "gexia/config.hpp"

#include <fstream>
#include <json.hpp>

namespace gexia {

using ordered_json = nlohmann::ordered_json;

namespace {

void reject_unknown(const ordered_json& j, std::initializer_list<const char*> known, const std::string& section) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown config key '" + section + it.key() + "'");
    }
}

template <typename T>
void read_if(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_encoder(const ordered_json& j, EncoderConfig& cfg) {
    reject_unknown(j,
                   {"frame_h", "frame_w", "patch_size", "c_v", "c_t", "m", "token_bytes", "vocab_size", "d_short",
                    "d_long"},
                   "encoder.");
    read_if(j, "frame_h", cfg.frame_h);
    read_if(j, "frame_w", cfg.frame_w);
    read_if(j, "patch_size", cfg.patch_size);
    read_if(j, "c_v", cfg.c_v);
    read_if(j, "c_t", cfg.c_t);
    read_if(j, "m", cfg.m);
    read_if(j, "token_bytes", cfg.token_bytes);
    read_if(j, "vocab_size", cfg.vocab_size);
    read_if(j, "d_short", cfg.d_short);
    read_if(j, "d_long", cfg.d_long);
}

void parse_iam(const ordered_json& j, IamConfig& cfg) {
    reject_unknown(j, {"n_latents", "latent_dim", "heads"}, "iam.");
    read_if(j, "n_latents", cfg.n_latents);
    read_if(j, "latent_dim", cfg.latent_dim);
    read_if(j, "heads", cfg.heads);
}

void parse_iter_policy(const ordered_json& j, IterPolicy& policy) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto pair = it.value().get<std::vector<std::int64_t>>();
        if (pair.size() != 2) throw ConfigError("iter_policy entries are [video_iters, text_iters]");
        if (pair[0] < 0 || pair[1] < 0) throw ConfigError("iteration counts must be >= 0");
        policy.by_granularity[it.key()] = IterPolicy::Setting{pair[0], pair[1]};
    }
}

void parse_train(const ordered_json& j, TrainConfig& cfg) {
    reject_unknown(j,
                   {"batch_size", "steps", "lr_other", "lr_encoders", "weight_decay", "schedule", "min_lr",
                    "tau_init", "checkpoint_every", "mix_weights"},
                   "train.");
    read_if(j, "batch_size", cfg.batch_size);
    read_if(j, "steps", cfg.steps);
    read_if(j, "lr_other", cfg.lr_other);
    read_if(j, "lr_encoders", cfg.lr_encoders);
    read_if(j, "weight_decay", cfg.weight_decay);
    read_if(j, "schedule", cfg.schedule);
    read_if(j, "min_lr", cfg.min_lr);
    read_if(j, "tau_init", cfg.tau_init);
    read_if(j, "checkpoint_every", cfg.checkpoint_every);
    if (j.contains("mix_weights")) {
        cfg.mix_weights.clear();
        for (auto it = j.at("mix_weights").begin(); it != j.at("mix_weights").end(); ++it) {
            cfg.mix_weights[it.key()] = it.value().get<double>();
        }
    }
}

void parse_summarizer(const ordered_json& j, SummarizerConfig& cfg) {
    reject_unknown(j,
                   {"kind", "endpoint", "model", "auth_env", "max_words", "timeout_ms", "retries", "backoff_base_ms",
                    "prompt_template", "fail_hard"},
                   "summarizer.");
    if (j.contains("kind")) {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "extractive") {
            cfg.kind = SummarizerConfig::Kind::extractive;
        } else if (kind == "remote_chat") {
            cfg.kind = SummarizerConfig::Kind::remote_chat;
        } else {
            throw ConfigError("summarizer.kind must be extractive or remote_chat");
        }
    }
    read_if(j, "endpoint", cfg.endpoint);
    read_if(j, "model", cfg.model);
    read_if(j, "auth_env", cfg.auth_env);
    read_if(j, "max_words", cfg.max_words);
    read_if(j, "timeout_ms", cfg.timeout_ms);
    read_if(j, "retries", cfg.retries);
    read_if(j, "backoff_base_ms", cfg.backoff_base_ms);
    read_if(j, "prompt_template", cfg.prompt_template);
    read_if(j, "fail_hard", cfg.fail_hard);
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"seed", "dtype", "encoder", "iam", "iter_policy", "train", "summarizer"}, "");
    RunConfig cfg;
    read_if(j, "seed", cfg.seed);
    read_if(j, "dtype", cfg.dtype);
    if (j.contains("encoder")) parse_encoder(j.at("encoder"), cfg.encoder);
    if (j.contains("iam")) parse_iam(j.at("iam"), cfg.iam);
    if (j.contains("iter_policy")) parse_iter_policy(j.at("iter_policy"), cfg.iter_policy);
    if (j.contains("train")) parse_train(j.at("train"), cfg.train);
    if (j.contains("summarizer")) parse_summarizer(j.at("summarizer"), cfg.summarizer);
    cfg.validate();
    return cfg;
}

std::string run_config_to_json_text(const RunConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["dtype"] = cfg.dtype;
    j["encoder"] = ordered_json{
        {"frame_h", cfg.encoder.frame_h},   {"frame_w", cfg.encoder.frame_w},
        {"patch_size", cfg.encoder.patch_size}, {"c_v", cfg.encoder.c_v},
        {"c_t", cfg.encoder.c_t},           {"m", cfg.encoder.m},
        {"token_bytes", cfg.encoder.token_bytes}, {"vocab_size", cfg.encoder.vocab_size},
        {"d_short", cfg.encoder.d_short},   {"d_long", cfg.encoder.d_long},
    };
    j["iam"] = ordered_json{
        {"n_latents", cfg.iam.n_latents}, {"latent_dim", cfg.iam.latent_dim}, {"heads", cfg.iam.heads}};
    ordered_json policy;
    for (const auto& [name, setting] : cfg.iter_policy.by_granularity) {
        policy[name] = std::vector<std::int64_t>{setting.video_iters, setting.text_iters};
    }
    j["iter_policy"] = policy;
    ordered_json train{
        {"batch_size", cfg.train.batch_size},
        {"steps", cfg.train.steps},
        {"lr_other", cfg.train.lr_other},
        {"lr_encoders", cfg.train.lr_encoders},
        {"weight_decay", cfg.train.weight_decay},
        {"schedule", cfg.train.schedule},
        {"min_lr", cfg.train.min_lr},
        {"tau_init", cfg.train.tau_init},
        {"checkpoint_every", cfg.train.checkpoint_every},
    };
    ordered_json mix = ordered_json::object();
    for (const auto& [name, weight] : cfg.train.mix_weights) mix[name] = weight;
    train["mix_weights"] = mix;
    j["train"] = train;
    j["summarizer"] = ordered_json{
        {"kind", cfg.summarizer.kind == SummarizerConfig::Kind::extractive ? "extractive" : "remote_chat"},
        {"endpoint", cfg.summarizer.endpoint},
        {"model", cfg.summarizer.model},
        {"auth_env", cfg.summarizer.auth_env},
        {"max_words", cfg.summarizer.max_words},
        {"timeout_ms", cfg.summarizer.timeout_ms},
        {"retries", cfg.summarizer.retries},
        {"backoff_base_ms", cfg.summarizer.backoff_base_ms},
        {"prompt_template", cfg.summarizer.prompt_template},
        {"fail_hard", cfg.summarizer.fail_hard},
    };
    return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return run_config_from_json_text(text);
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write config: " + path.string());
    os << run_config_to_json_text(config);
}

}  // namespace gexia
