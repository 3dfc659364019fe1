#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "spikecast/core/serialize.hpp"
#include "spikecast/core/text.hpp"
#include "spikecast/http.hpp"

namespace spikecast {

struct DecodingParams {
    double temperature = 0.6;
    int max_tokens = 2048;
    int run_index = 0;  // distinguishes ensemble runs; also the sampling seed
};

// send(prompt, params) -> completion text.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string send(const std::string& prompt, const DecodingParams& params) = 0;
};

// Stable key of a prompt in fixture maps.
inline std::string prompt_hash(std::string_view prompt) { return hex64(fnv1a64(prompt)); }

// Replays completions from a fixture map keyed by prompt hash. A fixture is
// either one completion or a list indexed by run_index (mod its length).
class StubBackend : public LlmBackend {
public:
    explicit StubBackend(Json fixtures) : fixtures_(std::move(fixtures)) {
        if (fixtures_.contains("fixtures")) fixtures_ = Json(fixtures_["fixtures"]);
        if (!fixtures_.is_object()) throw ConfigError("stub fixtures must be a JSON object");
    }

    static StubBackend from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open stub fixtures " + path.string());
        return StubBackend(Json::parse(in));
    }

    std::string send(const std::string& prompt, const DecodingParams& params) override {
        const std::string key = prompt_hash(prompt);
        auto it = fixtures_.find(key);
        if (it == fixtures_.end()) throw MissingFixtureError(key);
        if (it->is_string()) return it->get<std::string>();
        if (it->is_array() && !it->empty()) {
            auto idx = static_cast<std::size_t>(params.run_index) % it->size();
            return (*it)[idx].get<std::string>();
        }
        throw ConfigError("stub fixture " + key + " must be a string or non-empty list");
    }

private:
    Json fixtures_;
};

struct HttpBackendConfig {
    std::string endpoint_url;  // full URL of the completion endpoint
    std::string model_name;
    double temperature = 0.6;
    int max_output_tokens = 2048;
    int timeout_seconds = 120;
    std::string api_key_env;  // env var holding a bearer token
};

inline void validate(const HttpBackendConfig& c) {
    if (c.endpoint_url.empty()) throw ConfigError("backend endpoint_url is empty");
    if (c.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (c.timeout_seconds <= 0) throw ConfigError("timeout_seconds must be > 0");
}

// Pulls the completion text out of common response shapes.
inline std::string completion_from_response(const Json& body) {
    if (body.contains("completion") && body["completion"].is_string()) return body["completion"];
    if (body.contains("output_text") && body["output_text"].is_string()) return body["output_text"];
    if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
        const auto& c = body["choices"][0];
        if (c.contains("message") && c["message"].contains("content")) return c["message"]["content"];
        if (c.contains("text")) return c["text"];
    }
    if (body.contains("response") && body["response"].is_string()) return body["response"];
    throw BackendError("response carries no completion text", false);
}

// POST {model, messages, temperature, max_tokens, seed} -> JSON with one completion.
class HttpBackend : public LlmBackend {
public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        url_ = split_url(cfg_.endpoint_url);
        token_ = token_from_env(cfg_.api_key_env);
    }

    std::string send(const std::string& prompt, const DecodingParams& params) override {
        Json req{{"model", cfg_.model_name},
                 {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", params.temperature},
                 {"max_tokens", params.max_tokens},
                 {"seed", params.run_index}};
        auto client = make_http_client(url_.origin, cfg_.timeout_seconds);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        auto res = client->Post(url_.target, headers, req.dump(), "application/json");
        if (!res) throw BackendError("request failed: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw BackendError("HTTP " + std::to_string(res->status), is_retryable_status(res->status));
        auto body = Json::parse(res->body, nullptr, false);
        if (body.is_discarded()) throw BackendError("response is not JSON", false);
        return completion_from_response(body);
    }

    const HttpBackendConfig& config() const { return cfg_; }

private:
    HttpBackendConfig cfg_;
    SplitUrl url_;
    std::string token_;
};

// Forwards to another backend and records every completion by prompt hash
// and run index, producing a fixture map a StubBackend can replay.
class RecordingBackend : public LlmBackend {
public:
    explicit RecordingBackend(LlmBackend& inner) : inner_(inner) {}

    std::string send(const std::string& prompt, const DecodingParams& params) override {
        std::string out = inner_.send(prompt, params);
        std::lock_guard lock(mu_);
        auto& slot = recorded_[prompt_hash(prompt)];
        if (slot.size() <= static_cast<std::size_t>(params.run_index))
            slot.resize(static_cast<std::size_t>(params.run_index) + 1);
        slot[static_cast<std::size_t>(params.run_index)] = out;
        prompts_[prompt_hash(prompt)] = prompt;
        return out;
    }

    // Single-run fixtures collapse to a plain string.
    Json fixtures() const {
        std::lock_guard lock(mu_);
        Json j = Json::object();
        for (const auto& [hash, runs] : recorded_) {
            bool uniform = std::all_of(runs.begin(), runs.end(), [&](const auto& r) { return r == runs[0]; });
            j[hash] = uniform ? Json(runs[0]) : Json(runs);
        }
        return j;
    }

    const std::map<std::string, std::string>& prompts() const { return prompts_; }

private:
    LlmBackend& inner_;
    std::map<std::string, std::vector<std::string>> recorded_;
    std::map<std::string, std::string> prompts_;
    mutable std::mutex mu_;
};

}  // namespace spikecast
