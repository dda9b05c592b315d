#include "gexia/summarizer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace gexia {

namespace {

const char* kStopwords[] = {"a",  "an",  "the",  "and", "or",   "of",   "to",  "in",   "on",  "at",  "is", "are",
                            "was", "were", "it",  "its", "this", "that", "with", "for", "as", "by", "be"};

bool is_stopword(const std::string& w) {
    for (const char* s : kStopwords) {
        if (w == s) return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\n\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\n\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        cur.push_back(c);
        if (c == '.' || c == '!' || c == '?') {
            std::string s = trim(cur);
            if (!s.empty()) out.push_back(s);
            cur.clear();
        }
    }
    std::string tail = trim(cur);
    if (!tail.empty()) out.push_back(tail);
    return out;
}

std::vector<std::string> content_words(const std::string& sentence) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : sentence) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            if (!is_stopword(cur)) words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty() && !is_stopword(cur)) words.push_back(cur);
    return words;
}

std::size_t count_words(const std::string& text) {
    std::istringstream is(text);
    std::string w;
    std::size_t n = 0;
    while (is >> w) ++n;
    return n;
}

std::string truncate_words(const std::string& text, std::size_t max_words) {
    std::istringstream is(text);
    std::string w, out;
    std::size_t n = 0;
    while (is >> w && n < max_words) {
        if (n) out.push_back(' ');
        out += w;
        ++n;
    }
    return out;
}

std::string ExtractiveSummarizer::summarize(const std::string& text) {
    auto sentences = split_sentences(text);
    if (sentences.empty()) return "";

    std::map<std::string, std::size_t> freq;
    for (const auto& s : sentences) {
        for (const auto& w : content_words(s)) ++freq[w];
    }
    std::vector<double> score(sentences.size(), 0.0);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        for (const auto& w : content_words(sentences[i])) score[i] += static_cast<double>(freq[w]);
    }

    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

    std::vector<bool> picked(sentences.size(), false);
    std::size_t budget = 0;
    bool first = true;
    for (std::size_t idx : order) {
        const std::size_t words = count_words(sentences[idx]);
        if (first || budget + words <= max_words_) {
            picked[idx] = true;
            budget += words;
            first = false;
        }
    }

    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!picked[i]) continue;
        if (!out.empty()) out.push_back(' ');
        out += sentences[i];
    }
    if (count_words(out) > max_words_) out = truncate_words(out, max_words_);
    return out;
}

std::string default_summary_prompt_template() {
    return "You will be given a few sentences which describe the content of several clips within a video. "
           "Here are the sentences: [SENTENCES]. Please summarize the provided sentences into a concise summary "
           "as short as possible of no more than twenty words. Assistant:";
}

RemoteSummarizer::RemoteSummarizer(SummarizerConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
    config_.validate();
    const char* tok = std::getenv(config_.auth_env.c_str());
    if (tok == nullptr || *tok == '\0') {
        throw ConfigError("remote summarizer needs an auth token in $" + config_.auth_env);
    }
    token_ = tok;
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds ms) { std::this_thread::sleep_for(ms); };
    }
}

std::string RemoteSummarizer::summarize(const std::string& text) {
    const std::string tmpl =
        config_.prompt_template.empty() ? default_summary_prompt_template() : config_.prompt_template;
    std::string prompt = tmpl;
    const std::string placeholder = "[SENTENCES]";
    if (auto pos = prompt.find(placeholder); pos != std::string::npos) {
        prompt.replace(pos, placeholder.size(), text);
    }

    // Split the endpoint URL into base and path for the HTTP client.
    std::string url = config_.endpoint;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be a full URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    nlohmann::json body{
        {"model", config_.model},
        {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", prompt}}})},
        {"temperature", 0},
    };
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long long>(config_.backoff_base_ms) * (1LL << (attempt - 1)));
            delays_.push_back(delay);
            sleeper_(delay);
        }
        httplib::Client client(base);
        client.set_connection_timeout(0, config_.timeout_ms * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        httplib::Headers headers{{"Authorization", "Bearer " + token_}};
        ++request_count_;
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed to " + base;
            continue;
        }
        if (res->status == 200) {
            try {
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const std::exception& e) {
                throw RemoteServiceError(std::string("malformed chat-completion response: ") + e.what());
            }
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        throw RemoteServiceError("chat-completion request rejected with HTTP " + std::to_string(res->status));
    }
    throw RemoteServiceError("summarization failed after " + std::to_string(config_.retries + 1) +
                             " attempts: " + last_error);
}

std::unique_ptr<Summarizer> make_summarizer(const SummarizerConfig& config) {
    config.validate();
    if (config.kind == SummarizerConfig::Kind::extractive) {
        return std::make_unique<ExtractiveSummarizer>(config.max_words);
    }
    return std::make_unique<RemoteSummarizer>(config);
}

}  // namespace gexia
