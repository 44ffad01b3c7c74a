#pragma once

// Client for OpenAI-compatible chat-completion endpoints. This is the only
// code path that touches the network.

#include <chrono>
#include <cstddef>
#include <string>

#include "hric/guidance.hpp"

namespace hric {

struct LlmEndpointConfig {
    std::string base_url = "http://127.0.0.1:8000/v1";
    std::string model_name = "meta-llama/Llama-3.1-8B-Instruct";
    double temperature = 0.6;
    double top_p = 0.9;
    double timeout_seconds = 2.0;
    std::size_t max_retries = 2;
    std::string api_key_env_var = "HRIC_LLM_API_KEY";

    void validate() const;

    friend bool operator==(const LlmEndpointConfig&, const LlmEndpointConfig&) = default;
};

/// POST {base_url}/chat/completions with system + user messages. Transient
/// failures (transport, timeout, 429, 5xx) are retried up to max_retries
/// times; the whole call stays within timeout * (max_retries + 1).
class ChatCompletionClient final : public GuidanceProvider {
  public:
    explicit ChatCompletionClient(LlmEndpointConfig config);

    [[nodiscard]] CompletionResult complete(const GuidanceRequest& request) override;
    [[nodiscard]] std::string name() const override { return "endpoint"; }

    /// Sends one prompt; exposed for callers that do not go through guidance.
    [[nodiscard]] CompletionResult complete_prompt(const Prompt& prompt);

    /// Request body as sent on the wire.
    [[nodiscard]] std::string request_body(const Prompt& prompt) const;

    /// Maps an HTTP status and body to the assistant text or an error.
    [[nodiscard]] static CompletionResult interpret_response(int status, const std::string& body);

    [[nodiscard]] const LlmEndpointConfig& config() const noexcept { return config_; }

  private:
    LlmEndpointConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
};

}  // namespace hric
