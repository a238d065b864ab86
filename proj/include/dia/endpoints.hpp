#pragma once

#include "dia/abgm.hpp"
#include "dia/chat_template.hpp"
#include "dia/errors.hpp"
#include "dia/template_inference.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dia {

// How a victim (or helper) endpoint is reached.
//   chat_api            role/content message list, chat-completions JSON
//   webui_single_string one user string per request; the server side does
//                       the template wrapping (this is the injection surface)
//   raw_completion      caller supplies the fully rendered prompt string
enum class EndpointMode { chat_api, webui_single_string, raw_completion };

const char* mode_name(EndpointMode mode);
EndpointMode mode_from_name(const std::string& name); // throws FormatError

struct EndpointConfig {
    std::string name = "endpoint";
    std::string base_url; // e.g. http://127.0.0.1:8080
    // Name of the environment variable holding the credential. Only the
    // variable NAME is ever stored or serialized; the value is read at
    // request time and never appears in logs, errors, or records.
    std::string auth_env;
    EndpointMode mode = EndpointMode::chat_api;
    std::string model = "default";
    double timeout_s = 30.0;
    int max_retries = 2;
    int backoff_ms = 100;                // exponential base between retries
    double requests_per_second = 1.0;    // token-bucket rate; 0 = unlimited

    void validate() const; // throws FormatError
};

// JSON array of EndpointConfig objects; unknown fields rejected by name in
// the error message. Throws FormatError.
std::vector<EndpointConfig> load_endpoints(const std::string& path);
EndpointConfig find_endpoint(const std::vector<EndpointConfig>& list, const std::string& name);

// Blocking HTTP client for one endpoint: rate-limited, retrying transient
// failures (connect/read errors, 429, 5xx) with exponential backoff.
// Throws Timeout when the final failure was a timeout, RetriesExhausted for
// other exhausted transients, HttpError for non-retryable statuses or
// malformed 200 bodies, and EndpointError when the credential variable is
// unset. Credential bytes are scrubbed from every error message.
class HttpClient {
  public:
    explicit HttpClient(EndpointConfig cfg);
    ~HttpClient();
    HttpClient(const HttpClient&) = delete;
    HttpClient& operator=(const HttpClient&) = delete;

    const EndpointConfig& config() const;

    // mode == chat_api; messages must be non-empty (EmptyInput).
    std::string send_chat(const std::vector<Message>& messages);

    // mode == webui_single_string; empty input is an EmptyInput error.
    std::string send_webui(const std::string& user_text);

    // mode == raw_completion; the string goes out as the literal prompt.
    std::string send_raw(const std::string& rendered_prompt);

    // Sends one user message in whatever mode this endpoint speaks.
    std::string send_user_text(const std::string& text);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Adapters onto the narrow interfaces the attack modules consume.
class HttpChatEndpoint : public ChatEndpoint {
  public:
    explicit HttpChatEndpoint(HttpClient& client) : client_(client) {}
    std::string send_user(const std::string& text) override {
        return client_.send_user_text(text);
    }

  private:
    HttpClient& client_;
};

class HttpAuxiliary : public AuxiliaryClient {
  public:
    explicit HttpAuxiliary(HttpClient& client) : client_(client) {}
    std::string query(const std::string& instruction) override {
        return client_.send_user_text(instruction);
    }

  private:
    HttpClient& client_;
};

// A safety classifier's judgment of one (prompt, response) pair.
struct GuardVerdict {
    bool safe = true;
    std::optional<std::string> category; // e.g. "S9" when unsafe
    std::string raw;                     // verbatim guard output
};

// Accepts "safe" or "unsafe" (optionally followed by a category token) on
// the first line, case-insensitive. Anything else throws GuardParseFailure;
// a verdict is never silently coerced to safe.
GuardVerdict parse_guard_verdict(const std::string& raw);

// Sends the pair as a two-message conversation to a chat_api guard endpoint
// and parses its verdict.
GuardVerdict classify(HttpClient& guard, const std::string& prompt, const std::string& response);

} // namespace dia
