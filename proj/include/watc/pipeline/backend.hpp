// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <map>
#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "watc/errors.hpp"
#include "watc/text.hpp"

namespace watc::pipeline {

struct BackendConfig {
    std::string endpoint = "mock";  // base URL, or "mock" for the in-process table
    std::string model = "wat2c";
    double temperature = 0.0;       // determinism contract: reruns must match
    int max_output_tokens = 1024;
    int timeout_seconds = 60;
    int retry_budget = 2;           // transport retries beyond the first attempt
    std::string mock_table_path;    // completions keyed by snippet hash, JSONL
    std::string api_key_env = "WATC_API_KEY";
};

struct CompletionRequest {
    std::string prompt;        // full rendered prompt
    std::string snippet_text;  // the wat snippet alone; the mock's lookup key
    std::string function;
    int block_id = 0;
};

inline std::string block_label(const CompletionRequest& req) {
    return req.function + "_" + std::to_string(req.block_id);
}

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
};

/// In-process stand-in for a completion service: completions are looked up by
/// the hash of the snippet text, so tests can pin exact outputs.
class MockBackend : public Backend {
public:
    MockBackend() = default;

    explicit MockBackend(std::map<std::uint64_t, std::string> table)
        : table_(std::move(table)) {}

    /// Loads `{"wat": ..., "c": ...}` records, one JSON object per line.
    static MockBackend from_jsonl(const std::string& jsonl_text) {
        MockBackend backend;
        for (const auto& line : text::split_lines(jsonl_text)) {
            if (text::trim(line).empty()) continue;
            nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.contains("wat") || !rec.contains("c") ||
                !rec["wat"].is_string() || !rec["c"].is_string())
                throw FormatError("mock table line is not a {\"wat\", \"c\"} record: " + line);
            backend.add(rec["wat"].get<std::string>(), rec["c"].get<std::string>());
        }
        return backend;
    }

    void add(const std::string& wat_snippet, const std::string& c_snippet) {
        table_[text::fnv1a(wat_snippet)] = c_snippet;
    }

    std::string complete(const CompletionRequest& req) override {
        auto it = table_.find(text::fnv1a(req.snippet_text));
        if (it == table_.end()) throw EmptyCompletion(block_label(req));
        return it->second;
    }

    std::size_t size() const { return table_.size(); }

private:
    std::map<std::uint64_t, std::string> table_;
};

/// Client for any service speaking the open completion wire shape:
/// POST /v1/completions with (model, prompt, temperature, max_tokens),
/// completion text back in choices[0].text.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {}

    std::string complete(const CompletionRequest& req) override {
        nlohmann::json body = {
            {"model", config_.model},
            {"prompt", req.prompt},
            {"temperature", config_.temperature},
            {"max_tokens", config_.max_output_tokens},
        };
        std::string payload = body.dump();

        std::string last_error = "no attempt made";
        for (int attempt = 0; attempt <= config_.retry_budget; ++attempt) {
            httplib::Client client(config_.endpoint);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            if (const char* key = std::getenv(config_.api_key_env.c_str()))
                client.set_default_headers({{"Authorization", std::string("Bearer ") + key}});

            auto res = client.Post("/v1/completions", payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server returned status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendUnavailable("server returned status " + std::to_string(res->status),
                                         block_label(req));
            nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
            if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
                !reply["choices"][0].contains("text"))
                throw BackendUnavailable("malformed completion response", block_label(req));
            std::string completion = reply["choices"][0]["text"].get<std::string>();
            if (text::trim(completion).empty()) throw EmptyCompletion(block_label(req));
            return completion;
        }
        throw BudgetExhausted(last_error, block_label(req));
    }

private:
    BackendConfig config_;
};

/// Picks the backend implementation the config names.
inline std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                             const std::string& mock_jsonl = "") {
    if (config.endpoint == "mock") {
        if (!mock_jsonl.empty())
            return std::make_unique<MockBackend>(MockBackend::from_jsonl(mock_jsonl));
        return std::make_unique<MockBackend>();
    }
    return std::make_unique<HttpBackend>(config);
}

}  // namespace watc::pipeline
