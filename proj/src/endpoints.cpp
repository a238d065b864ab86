#include "dia/endpoints.hpp"

#include "dia/util.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace dia {

using nlohmann::json;

const char* mode_name(EndpointMode mode) {
    switch (mode) {
    case EndpointMode::chat_api: return "chat_api";
    case EndpointMode::webui_single_string: return "webui_single_string";
    case EndpointMode::raw_completion: return "raw_completion";
    }
    return "?";
}

EndpointMode mode_from_name(const std::string& name) {
    const std::string n = lower_ascii(trim(name));
    if (n == "chat_api" || n == "chat") return EndpointMode::chat_api;
    if (n == "webui_single_string" || n == "webui") return EndpointMode::webui_single_string;
    if (n == "raw_completion" || n == "raw") return EndpointMode::raw_completion;
    throw FormatError("unknown endpoint mode '" + name +
                      "' (expected chat_api, webui_single_string, or raw_completion)");
}

void EndpointConfig::validate() const {
    if (base_url.empty()) throw FormatError("endpoint '" + name + "': base_url is required");
    if (!(timeout_s > 0)) throw FormatError("endpoint '" + name + "': timeout_s must be > 0");
    if (max_retries < 0) throw FormatError("endpoint '" + name + "': max_retries must be >= 0");
    if (backoff_ms < 0) throw FormatError("endpoint '" + name + "': backoff_ms must be >= 0");
    if (requests_per_second < 0)
        throw FormatError("endpoint '" + name + "': requests_per_second must be >= 0");
}

std::vector<EndpointConfig> load_endpoints(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("endpoints file '" + path + "': " + e.what());
    }
    if (!doc.is_array()) throw FormatError("endpoints file '" + path + "': expected a JSON array");

    std::vector<EndpointConfig> out;
    for (size_t i = 0; i < doc.size(); ++i) {
        const json& e = doc[i];
        const std::string where = "endpoints[" + std::to_string(i) + "]";
        if (!e.is_object()) throw FormatError(where + ": expected an object");
        EndpointConfig cfg;
        try {
            cfg.name = e.value("name", "endpoint-" + std::to_string(i));
            if (!e.contains("base_url")) throw FormatError(where + ": missing base_url");
            cfg.base_url = e.at("base_url").get<std::string>();
            cfg.auth_env = e.value("auth_env", "");
            cfg.mode = mode_from_name(e.value("mode", "chat_api"));
            cfg.model = e.value("model", "default");
            cfg.timeout_s = e.value("timeout_s", 30.0);
            cfg.max_retries = e.value("max_retries", 2);
            cfg.backoff_ms = e.value("backoff_ms", 100);
            cfg.requests_per_second = e.value("requests_per_second", 1.0);
        } catch (const json::exception& ex) {
            throw FormatError(where + ": " + ex.what());
        }
        cfg.validate();
        for (const auto& prev : out)
            if (prev.name == cfg.name)
                throw FormatError(where + ": duplicate endpoint name '" + cfg.name + "'");
        out.push_back(std::move(cfg));
    }
    return out;
}

EndpointConfig find_endpoint(const std::vector<EndpointConfig>& list, const std::string& name) {
    for (const auto& cfg : list)
        if (cfg.name == name) return cfg;
    throw FormatError("no endpoint named '" + name + "' in config");
}

namespace {

// Removes the credential bytes from any outward-bound text.
std::string scrub(std::string text, const std::string& secret) {
    if (!secret.empty()) text = replace_all(text, secret, "***");
    return text;
}

std::string excerpt(const std::string& body, size_t limit = 160) {
    std::string e = trim(body).substr(0, limit);
    for (char& c : e)
        if (c == '\n' || c == '\r') c = ' ';
    return e;
}

// httplib reports read/write timeouts as Read/Write errors; connect
// timeouts get their own code. Plain refused connections come back as
// Error::Connection and are not in this set.
bool timeoutish(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

} // namespace

struct HttpClient::Impl {
    EndpointConfig cfg;
    httplib::Client cli;
    std::mutex bucket_mu;
    std::chrono::steady_clock::time_point next_slot{};

    explicit Impl(EndpointConfig c) : cfg(std::move(c)), cli(cfg.base_url) {
        const auto whole = static_cast<time_t>(cfg.timeout_s);
        const auto micros = static_cast<time_t>((cfg.timeout_s - static_cast<double>(whole)) * 1e6);
        cli.set_connection_timeout(whole, micros);
        cli.set_read_timeout(whole, micros);
        cli.set_write_timeout(whole, micros);
        cli.set_keep_alive(true);
        // Small JSON POSTs hit the Nagle/delayed-ACK stall (~40 ms per
        // request) without this, which dominates loopback latency.
        cli.set_tcp_nodelay(true);
    }

    std::string credential() {
        if (cfg.auth_env.empty()) return {};
        const char* value = std::getenv(cfg.auth_env.c_str());
        if (!value || !*value)
            throw EndpointError("endpoint '" + cfg.name + "': credential variable " +
                                cfg.auth_env + " is not set");
        return value;
    }

    void take_slot() {
        if (cfg.requests_per_second <= 0) return;
        const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / cfg.requests_per_second));
        std::chrono::steady_clock::time_point wait_until;
        {
            std::lock_guard<std::mutex> lock(bucket_mu);
            const auto now = std::chrono::steady_clock::now();
            wait_until = next_slot;
            next_slot = std::max(now, next_slot) + interval;
        }
        std::this_thread::sleep_until(wait_until);
    }

    std::string post_json(const std::string& path, const std::string& body) {
        const std::string secret = credential();
        const int attempts = cfg.max_retries + 1;
        std::string last_failure = "no attempt made";
        bool last_was_timeout = false;

        for (int attempt = 0; attempt < attempts; ++attempt) {
            if (attempt > 0 && cfg.backoff_ms > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(cfg.backoff_ms * (1LL << (attempt - 1))));
            take_slot();

            httplib::Headers headers;
            if (!secret.empty()) headers.emplace("Authorization", "Bearer " + secret);
            auto res = cli.Post(path, headers, body, "application/json");

            if (!res) {
                last_failure = std::string("transport: ") + httplib::to_string(res.error());
                last_was_timeout = timeoutish(res.error());
                continue;
            }
            if (res->status == 200) return res->body;
            if (res->status == 429 || res->status >= 500) {
                last_failure = "HTTP " + std::to_string(res->status);
                last_was_timeout = false;
                continue; // transient per protocol convention
            }
            throw HttpError(res->status,
                            scrub("endpoint '" + cfg.name + "' returned HTTP " +
                                      std::to_string(res->status) + ": " + excerpt(res->body),
                                  secret));
        }
        const std::string what =
            scrub("endpoint '" + cfg.name + "': " + std::to_string(attempts) +
                      " attempt(s) failed; last failure: " + last_failure,
                  secret);
        if (last_was_timeout) throw Timeout(what);
        throw RetriesExhausted(what);
    }
};

HttpClient::HttpClient(EndpointConfig cfg) {
    cfg.validate();
    impl_ = std::make_unique<Impl>(std::move(cfg));
}

HttpClient::~HttpClient() = default;

const EndpointConfig& HttpClient::config() const { return impl_->cfg; }

namespace {

std::string require_mode(const EndpointConfig& cfg, EndpointMode expected) {
    if (cfg.mode != expected)
        throw FormatError("endpoint '" + cfg.name + "' is configured as " +
                          mode_name(cfg.mode) + ", not " + mode_name(expected));
    return {};
}

[[noreturn]] void throw_malformed(const std::string& name, const std::string& body) {
    throw HttpError(200, "endpoint '" + name + "' returned a malformed body: " + excerpt(body));
}

std::string extract_chat_content(const std::string& body, const std::string& name) {
    try {
        return json::parse(body).at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const json::exception&) {
        throw_malformed(name, body);
    }
}

std::string extract_raw_text(const std::string& body, const std::string& name) {
    try {
        return json::parse(body).at("choices").at(0).at("text").get<std::string>();
    } catch (const json::exception&) {
        throw_malformed(name, body);
    }
}

} // namespace

std::string HttpClient::send_chat(const std::vector<Message>& messages) {
    require_mode(impl_->cfg, EndpointMode::chat_api);
    if (messages.empty()) throw EmptyInput("send_chat: no messages");
    json body;
    body["model"] = impl_->cfg.model;
    body["messages"] = json::array();
    for (const Message& m : messages)
        body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.text}});
    return extract_chat_content(impl_->post_json("/v1/chat/completions", body.dump()),
                                impl_->cfg.name);
}

std::string HttpClient::send_webui(const std::string& user_text) {
    require_mode(impl_->cfg, EndpointMode::webui_single_string);
    if (user_text.empty()) throw EmptyInput("send_webui: empty user string");
    json body;
    body["model"] = impl_->cfg.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", user_text}}});
    return extract_chat_content(impl_->post_json("/v1/chat/completions", body.dump()),
                                impl_->cfg.name);
}

std::string HttpClient::send_raw(const std::string& rendered_prompt) {
    require_mode(impl_->cfg, EndpointMode::raw_completion);
    if (rendered_prompt.empty()) throw EmptyInput("send_raw: empty prompt");
    json body;
    body["model"] = impl_->cfg.model;
    body["prompt"] = rendered_prompt;
    return extract_raw_text(impl_->post_json("/v1/completions", body.dump()), impl_->cfg.name);
}

std::string HttpClient::send_user_text(const std::string& text) {
    switch (impl_->cfg.mode) {
    case EndpointMode::chat_api: return send_chat({{Role::user, text}});
    case EndpointMode::webui_single_string: return send_webui(text);
    case EndpointMode::raw_completion: return send_raw(text);
    }
    throw FormatError("endpoint '" + impl_->cfg.name + "': unknown mode");
}

GuardVerdict parse_guard_verdict(const std::string& raw) {
    GuardVerdict v;
    v.raw = raw;
    const std::vector<std::string> lines = split_lines(trim(raw));
    if (lines.empty() || trim(lines[0]).empty())
        throw GuardParseFailure("guard produced no verdict text");

    // first line: "safe" | "unsafe" | "unsafe <category>"
    std::string head = lower_ascii(trim(lines[0]));
    std::string head_rest;
    if (const size_t sp = head.find(' '); sp != std::string::npos) {
        head_rest = trim(lines[0]).substr(sp + 1);
        head = head.substr(0, sp);
    }
    if (head == "safe" && head_rest.empty()) {
        v.safe = true;
        return v;
    }
    if (head == "unsafe") {
        v.safe = false;
        std::string category = head_rest;
        if (category.empty() && lines.size() > 1) category = trim(lines[1]);
        if (!category.empty()) v.category = category;
        return v;
    }
    throw GuardParseFailure("unrecognized guard verdict: " + excerpt(raw, 80));
}

GuardVerdict classify(HttpClient& guard, const std::string& prompt, const std::string& response) {
    const std::vector<Message> pair = {{Role::user, prompt}, {Role::assistant, response}};
    return parse_guard_verdict(guard.send_chat(pair));
}

} // namespace dia
