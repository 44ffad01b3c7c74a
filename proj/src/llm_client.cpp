#include "hric/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace hric {

namespace {

bool is_transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

void LlmEndpointConfig::validate() const {
    if (!(timeout_seconds > 0.0)) {
        throw std::invalid_argument("endpoint.timeout_seconds must be > 0");
    }
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
        throw std::invalid_argument("endpoint.base_url must start with http:// or https://");
    }
    if (!(temperature >= 0.0)) {
        throw std::invalid_argument("endpoint.temperature must be >= 0");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw std::invalid_argument("endpoint.top_p must lie in (0, 1]");
    }
}

ChatCompletionClient::ChatCompletionClient(LlmEndpointConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto scheme_end = config_.base_url.find("://") + 3;
    const auto path_start = config_.base_url.find('/', scheme_end);
    scheme_host_port_ = config_.base_url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
        path_prefix_.pop_back();
    }
}

std::string ChatCompletionClient::request_body(const Prompt& prompt) const {
    const nlohmann::json body = {
        {"model", config_.model_name},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", prompt.system}},
                                {{"role", "user"}, {"content", prompt.user}}})},
        {"temperature", config_.temperature},
        {"top_p", config_.top_p},
    };
    return body.dump();
}

CompletionResult ChatCompletionClient::interpret_response(int status, const std::string& body) {
    if (status < 200 || status >= 300) {
        return RequestError{RequestErrorKind::HttpStatus, status, "endpoint answered HTTP " + std::to_string(status)};
    }
    const auto json = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (json.is_discarded()) {
        return RequestError{RequestErrorKind::MalformedResponse, status, "response body is not JSON"};
    }
    try {
        const auto& content = json.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) {
            return RequestError{RequestErrorKind::MalformedResponse, status, "choices[0].message.content is not text"};
        }
        auto text = content.get<std::string>();
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
            return RequestError{RequestErrorKind::EmptyCompletion, status, "empty completion"};
        }
        return text;
    } catch (const nlohmann::json::exception&) {
        return RequestError{RequestErrorKind::MalformedResponse, status, "missing choices[0].message.content"};
    }
}

CompletionResult ChatCompletionClient::complete(const GuidanceRequest& request) {
    return complete_prompt(request.prompt);
}

CompletionResult ChatCompletionClient::complete_prompt(const Prompt& prompt) {
    using Clock = std::chrono::steady_clock;
    const auto per_attempt = std::chrono::duration<double>(config_.timeout_seconds);
    const auto deadline = Clock::now() + per_attempt * static_cast<double>(config_.max_retries + 1);
    const std::string body = request_body(prompt);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env_var.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    RequestError last{RequestErrorKind::Transport, 0, "no attempt made"};
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        const auto remaining = std::chrono::duration<double>(deadline - Clock::now());
        if (remaining.count() <= 0.0) {
            break;
        }
        const double budget = std::min(per_attempt.count(), remaining.count());
        const auto usec = std::chrono::microseconds(static_cast<long long>(budget * 1e6));

        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(usec).count(),
                                      static_cast<time_t>(usec.count() % 1000000));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(usec).count(),
                                static_cast<time_t>(usec.count() % 1000000));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(usec).count(),
                                 static_cast<time_t>(usec.count() % 1000000));

        const auto started = Clock::now();
        auto response = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
        const double elapsed = std::chrono::duration<double>(Clock::now() - started).count();

        if (!response) {
            const auto err = response.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                                    elapsed >= 0.9 * budget);
            last = RequestError{timed_out ? RequestErrorKind::Timeout : RequestErrorKind::Transport, 0,
                                httplib::to_string(err)};
        } else {
            CompletionResult result = interpret_response(response->status, response->body);
            const auto* error = std::get_if<RequestError>(&result);
            if (error == nullptr) {
                return result;
            }
            if (error->kind != RequestErrorKind::HttpStatus || !is_transient_status(error->http_status)) {
                return result;
            }
            last = *error;
        }
        if (attempt < config_.max_retries) {
            const auto backoff = std::chrono::milliseconds(50 * (attempt + 1));
            if (Clock::now() + backoff >= deadline) {
                break;
            }
            std::this_thread::sleep_for(backoff);
        }
    }
    return last;
}

}  // namespace hric
