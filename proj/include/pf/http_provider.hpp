#pragma once
// Live backend speaking the OpenAI-compatible chat-completions wire shape.

#include <string>

#include "pf/provider.hpp"

namespace pf {

struct RetryPolicy {
    std::size_t max_attempts = 3;
    // Base delay for exponential backoff; a server-provided Retry-After
    // header takes precedence.
    unsigned initial_backoff_ms = 250;
};

// POSTs to {base_url}/chat/completions and reads
// choices[0].message.content / choices[0].finish_reason. Unknown response
// fields are ignored. Safe for concurrent complete() calls.
class HttpProvider : public Provider {
  public:
    HttpProvider(std::string base_url, std::string api_key, RetryPolicy retry = {});

    ChatResponse complete(const ChatRequest& request) override;

  private:
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // anything after the origin, e.g. /v1
    std::string api_key_;
    RetryPolicy retry_;
};

}  // namespace pf
