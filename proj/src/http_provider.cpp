#include "pf/http_provider.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <thread>

#include "pf/serialize.hpp"

namespace pf {

using nlohmann::json;

namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

// Retry-After in seconds; missing or non-numeric yields nullopt.
std::optional<unsigned> retry_after_seconds(const httplib::Response& res) {
    if (!res.has_header("Retry-After")) return std::nullopt;
    try {
        return static_cast<unsigned>(std::stoul(res.get_header_value("Retry-After")));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

FinishReason finish_from_wire(const json& choice) {
    if (!choice.contains("finish_reason") || choice["finish_reason"].is_null()) {
        return FinishReason::Stop;
    }
    const auto name = choice["finish_reason"].get<std::string>();
    if (auto parsed = parse_finish_reason(name)) return *parsed;
    return FinishReason::Error;
}

}  // namespace

HttpProvider::HttpProvider(std::string base_url, std::string api_key, RetryPolicy retry)
    : api_key_(std::move(api_key)), retry_(retry) {
    if (retry_.max_attempts == 0) retry_.max_attempts = 1;
    const auto scheme_end = base_url.find("://");
    const auto path_start =
        base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
        origin_ = base_url;
    } else {
        origin_ = base_url.substr(0, path_start);
        path_prefix_ = base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
    json body{{"model", request.model_id}, {"temperature", request.temperature}};
    body["messages"] = json::array();
    for (const ChatMessage& m : request.messages) {
        body["messages"].push_back({{"role", message_role_name(m.role)}, {"content", m.content}});
    }
    const std::string payload = body.dump();
    const std::string path = path_prefix_ + "/chat/completions";

    std::string last_error;
    bool last_was_rate_limit = false;

    for (std::size_t attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        // One client per call keeps concurrent complete() calls independent.
        httplib::Client client(origin_);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(path, headers, payload, "application/json");

        std::optional<unsigned> wait_s;
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            last_was_rate_limit = false;
        } else if (res->status == 200) {
            json parsed;
            try {
                parsed = json::parse(res->body);
            } catch (const json::exception& e) {
                throw ProviderError(ProviderError::Kind::Malformed,
                                    std::string("response is not valid JSON: ") + e.what());
            }
            if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
                parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
                !parsed["choices"][0]["message"].contains("content")) {
                throw ProviderError(ProviderError::Kind::Malformed,
                                    "response lacks choices[0].message.content");
            }
            const json& choice = parsed["choices"][0];
            ChatResponse out;
            out.content = choice["message"]["content"].is_null()
                              ? std::string{}
                              : choice["message"]["content"].get<std::string>();
            out.finish_reason = finish_from_wire(choice);
            return out;
        } else if (retryable_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            last_was_rate_limit = res->status == 429;
            wait_s = retry_after_seconds(*res);
        } else {
            throw ProviderError(ProviderError::Kind::Transport,
                                "HTTP " + std::to_string(res->status) + ": " + res->body);
        }

        if (attempt < retry_.max_attempts) {
            const auto backoff =
                wait_s ? std::chrono::milliseconds(*wait_s * 1000u)
                       : std::chrono::milliseconds(retry_.initial_backoff_ms
                                                   << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
    }
    throw ProviderError(last_was_rate_limit ? ProviderError::Kind::RateLimited
                                            : ProviderError::Kind::Transport,
                        last_error + " after " + std::to_string(retry_.max_attempts) +
                            " attempts");
}

}  // namespace pf
