#pragma once
// Abstract chat-completion provider with interchangeable backends.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pf {

enum class MessageRole { System, User, Assistant };

std::string message_role_name(MessageRole r);
std::optional<MessageRole> parse_message_role(const std::string& name);

struct ChatMessage {
    MessageRole role = MessageRole::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

enum class FinishReason { Stop, Length, Refusal, Error };

std::string finish_reason_name(FinishReason r);
std::optional<FinishReason> parse_finish_reason(const std::string& name);

struct ChatRequest {
    std::string model_id;
    double temperature = 0.0;
    std::vector<ChatMessage> messages;

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::Stop;

    friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

// One completed request/response pair, the unit a cassette stores.
struct ChatExchange {
    ChatRequest request;
    ChatResponse response;

    friend bool operator==(const ChatExchange&, const ChatExchange&) = default;
};

class ProviderError : public std::runtime_error {
  public:
    enum class Kind {
        Transport,
        RateLimited,
        Refusal,
        Malformed,
        ScriptExhausted,
        CassetteExhausted,
        CassetteMismatch,
    };

    ProviderError(Kind kind, const std::string& message, std::string agent = "")
        : std::runtime_error(message), kind_(kind), agent_(std::move(agent)) {}

    Kind kind() const { return kind_; }
    // Role label of the agent whose call surfaced the error, when known.
    const std::string& agent() const { return agent_; }

  private:
    Kind kind_;
    std::string agent_;
};

std::string provider_error_kind_name(ProviderError::Kind k);

class Provider {
  public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Deterministic provider that replays a fixed script regardless of request
// content. Per-dialogue state: confine each instance to a single worker.
class ScriptedProvider : public Provider {
  public:
    struct Entry {
        std::string content;
        FinishReason finish = FinishReason::Stop;
    };

    explicit ScriptedProvider(std::vector<std::string> script);
    static ScriptedProvider from_entries(std::vector<Entry> script);

    ChatResponse complete(const ChatRequest& request) override;

    std::size_t calls() const { return cursor_; }
    std::size_t remaining() const { return script_.size() - cursor_; }
    // Every request seen so far, in call order.
    const std::vector<ChatRequest>& requests() const { return requests_; }

  private:
    std::vector<Entry> script_;
    std::size_t cursor_ = 0;
    std::vector<ChatRequest> requests_;
};

enum class CassetteMatchMode { StrictSequence, HashOfRequest };

// An ordered recording of provider exchanges, serializable as JSONL
// (one ChatExchange per line, UTF-8).
struct Cassette {
    std::vector<ChatExchange> exchanges;
    CassetteMatchMode match_mode = CassetteMatchMode::StrictSequence;

    static Cassette load(const std::string& path);  // throws std::runtime_error on parse failure
    void save(const std::string& path) const;
};

// Wraps any provider and appends every exchange to a cassette.
// Thread-safe; exchanges are appended in completion order.
class RecordingProvider : public Provider {
  public:
    explicit RecordingProvider(std::shared_ptr<Provider> inner);

    ChatResponse complete(const ChatRequest& request) override;

    Cassette cassette() const;

  private:
    std::shared_ptr<Provider> inner_;
    mutable std::mutex mutex_;
    Cassette cassette_;
};

// Serves responses from a cassette. StrictSequence replays in record order;
// HashOfRequest matches each request against recorded ones by content hash.
class ReplayProvider : public Provider {
  public:
    explicit ReplayProvider(Cassette cassette);

    ChatResponse complete(const ChatRequest& request) override;

  private:
    Cassette cassette_;
    std::mutex mutex_;
    std::size_t cursor_ = 0;
    std::map<std::uint64_t, std::deque<std::size_t>> by_hash_;
};

// Content hash used by HashOfRequest matching (FNV-1a over the canonical
// JSON form of the request).
std::uint64_t request_hash(const ChatRequest& request);

}  // namespace pf
