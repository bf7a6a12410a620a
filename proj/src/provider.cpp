#include "pf/provider.hpp"

#include <fstream>

#include "pf/serialize.hpp"

namespace pf {

std::string message_role_name(MessageRole r) {
    switch (r) {
        case MessageRole::System: return "system";
        case MessageRole::User: return "user";
        case MessageRole::Assistant: return "assistant";
    }
    return "user";
}

std::optional<MessageRole> parse_message_role(const std::string& name) {
    if (name == "system") return MessageRole::System;
    if (name == "user") return MessageRole::User;
    if (name == "assistant") return MessageRole::Assistant;
    return std::nullopt;
}

std::string finish_reason_name(FinishReason r) {
    switch (r) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Refusal: return "refusal";
        case FinishReason::Error: return "error";
    }
    return "error";
}

std::optional<FinishReason> parse_finish_reason(const std::string& name) {
    if (name == "stop") return FinishReason::Stop;
    if (name == "length") return FinishReason::Length;
    if (name == "refusal" || name == "content_filter") return FinishReason::Refusal;
    if (name == "error") return FinishReason::Error;
    return std::nullopt;
}

std::string provider_error_kind_name(ProviderError::Kind k) {
    switch (k) {
        case ProviderError::Kind::Transport: return "transport_error";
        case ProviderError::Kind::RateLimited: return "rate_limited";
        case ProviderError::Kind::Refusal: return "provider_refusal";
        case ProviderError::Kind::Malformed: return "malformed_response";
        case ProviderError::Kind::ScriptExhausted: return "script_exhausted";
        case ProviderError::Kind::CassetteExhausted: return "cassette_exhausted";
        case ProviderError::Kind::CassetteMismatch: return "cassette_mismatch";
    }
    return "transport_error";
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> script) {
    script_.reserve(script.size());
    for (auto& s : script) script_.push_back(Entry{std::move(s), FinishReason::Stop});
}

ScriptedProvider ScriptedProvider::from_entries(std::vector<Entry> script) {
    ScriptedProvider p(std::vector<std::string>{});
    p.script_ = std::move(script);
    return p;
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
    requests_.push_back(request);
    if (cursor_ >= script_.size()) {
        throw ProviderError(ProviderError::Kind::ScriptExhausted,
                            "script exhausted after " + std::to_string(script_.size()) +
                                " calls");
    }
    const Entry& e = script_[cursor_++];
    return ChatResponse{e.content, e.finish};
}

Cassette Cassette::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open cassette: " + path);
    Cassette c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            c.exchanges.push_back(nlohmann::json::parse(line).get<ChatExchange>());
        } catch (const std::exception& e) {
            throw std::runtime_error("cassette line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
    }
    return c;
}

void Cassette::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cassette: " + path);
    for (const ChatExchange& e : exchanges) {
        out << nlohmann::json(e).dump() << '\n';
    }
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner)
    : inner_(std::move(inner)) {}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
    ChatResponse response = inner_->complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    cassette_.exchanges.push_back(ChatExchange{request, response});
    return response;
}

Cassette RecordingProvider::cassette() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cassette_;
}

ReplayProvider::ReplayProvider(Cassette cassette) : cassette_(std::move(cassette)) {
    if (cassette_.match_mode == CassetteMatchMode::HashOfRequest) {
        for (std::size_t i = 0; i < cassette_.exchanges.size(); ++i) {
            by_hash_[request_hash(cassette_.exchanges[i].request)].push_back(i);
        }
    }
}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (cassette_.match_mode == CassetteMatchMode::StrictSequence) {
        if (cursor_ >= cassette_.exchanges.size()) {
            throw ProviderError(ProviderError::Kind::CassetteExhausted, "cassette exhausted");
        }
        return cassette_.exchanges[cursor_++].response;
    }
    auto it = by_hash_.find(request_hash(request));
    if (it == by_hash_.end()) {
        throw ProviderError(ProviderError::Kind::CassetteMismatch,
                            "request hash not present in cassette");
    }
    if (it->second.empty()) {
        throw ProviderError(ProviderError::Kind::CassetteExhausted,
                            "all recorded responses for this request consumed");
    }
    const std::size_t idx = it->second.front();
    it->second.pop_front();
    return cassette_.exchanges[idx].response;
}

std::uint64_t request_hash(const ChatRequest& request) {
    const std::string canonical = nlohmann::json(request).dump();
    // FNV-1a 64-bit.
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace pf
