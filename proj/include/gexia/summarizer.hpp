#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gexia/errors.hpp"

namespace gexia {

struct SummarizerConfig {
    enum class Kind { extractive, remote_chat };
    Kind kind = Kind::extractive;
    std::string endpoint;                             // full URL, remote mode only
    std::string model;                                // remote model name
    std::string auth_env = "GEXIA_SUMMARIZER_TOKEN";  // environment variable holding the token
    std::size_t max_words = 20;
    int timeout_ms = 30000;
    int retries = 3;            // retries beyond the first attempt
    int backoff_base_ms = 250;  // doubled per retry
    std::string prompt_template;  // [SENTENCES] placeholder; empty -> default
    bool fail_hard = false;     // remote failure aborts instead of extractive fallback

    void validate() const {
        if (kind == Kind::remote_chat && endpoint.empty()) throw ConfigError("remote summarizer requires an endpoint");
        if (max_words == 0) throw ConfigError("max_words must be positive");
    }
};

std::string default_summary_prompt_template();

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual std::string summarize(const std::string& text) = 0;
};

// Offline frequency-based extractive summarizer. Sentences are scored by the
// sum of document-level frequencies of their non-stopword words; the highest
// scoring sentences are taken greedily while the word budget allows, then
// re-emitted in document order.
class ExtractiveSummarizer : public Summarizer {
public:
    explicit ExtractiveSummarizer(std::size_t max_words = 20) : max_words_(max_words) {}
    std::string summarize(const std::string& text) override;

private:
    std::size_t max_words_;
};

std::vector<std::string> split_sentences(const std::string& text);
std::vector<std::string> content_words(const std::string& sentence);
std::size_t count_words(const std::string& text);
std::string truncate_words(const std::string& text, std::size_t max_words);

// Chat-completion HTTP client with bounded retries and exponential backoff.
// Sends one user message built from the prompt template at temperature 0.
class RemoteSummarizer : public Summarizer {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit RemoteSummarizer(SummarizerConfig config, Sleeper sleeper = nullptr);
    std::string summarize(const std::string& text) override;

    int request_count() const { return request_count_; }
    const std::vector<std::chrono::milliseconds>& backoff_delays() const { return delays_; }

private:
    SummarizerConfig config_;
    Sleeper sleeper_;
    std::string token_;
    int request_count_ = 0;
    std::vector<std::chrono::milliseconds> delays_;
};

std::unique_ptr<Summarizer> make_summarizer(const SummarizerConfig& config);

}  // namespace gexia
