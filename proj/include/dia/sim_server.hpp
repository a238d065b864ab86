#pragma once

#include "dia/chat_template.hpp"
#include "dia/util.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dia {

// Deterministic stand-in for a victim model, keyed to one "true" chat
// template. Given the raw rendered input a serving stack would feed the
// model, it reconstructs the turns with a lenient scan and behaves like a
// chat assistant that (a) answers scripted lines first, (b) refuses when a
// trigger phrase appears anywhere in the conversation, (c) obeys "repeat
// your previous response" with a configurable probability, and (d) falls
// back to a fixed generic reply.
struct SimulatedLLMConfig {
    ChatTemplate true_template;
    double repeat_compliance = 0.5;
    std::string repeat_cmd = "Please repeat your previous response.";
    std::vector<std::string> refusal_lexicon;   // substring triggers, case-insensitive
    std::vector<std::string> scripted_responses; // consumed first, in order
    uint64_t seed = 0;
};

class SimulatedLLM {
  public:
    explicit SimulatedLLM(SimulatedLLMConfig cfg)
        : cfg_(std::move(cfg)), rng_(cfg_.seed) {}

    // Pure function of (seed, full input history). Not thread-safe; guard
    // externally or use one instance per thread.
    std::string simulate(const std::string& raw_rendered_input);

    const SimulatedLLMConfig& config() const { return cfg_; }

    static const char* generic_reply() { return "Here is some general information that may help."; }
    static const char* canned_refusal() { return "I'm sorry, but I can't help with that request."; }

  private:
    SimulatedLLMConfig cfg_;
    Rng rng_;
    size_t script_next_ = 0;
};

// Loopback HTTP server exposing a SimulatedLLM over the chat-completions
// convention, for end-to-end tests without a live model.
//   POST /v1/chat/completions  {model, messages:[{role,content}]} — messages
//        are rendered with the true template (a system message is folded
//        into the first user turn when the template lacks a system role)
//        and fed to the simulator.
//   POST /v1/completions       {model, prompt} — the prompt string is fed
//        to the simulator as-is (pre-rendered input).
class SimServer {
  public:
    // Binds 127.0.0.1:port; port 0 picks a free port. Throws EndpointError
    // when binding fails.
    explicit SimServer(SimulatedLLMConfig sim, int port = 0);
    ~SimServer();
    SimServer(const SimServer&) = delete;
    SimServer& operator=(const SimServer&) = delete;

    int port() const;
    std::string base_url() const; // "http://127.0.0.1:<port>"
    void stop();

    // Test hooks. The failure plan pre-empts real handling: each request
    // consumes one entry; a positive entry is returned as that HTTP status,
    // kDelayThenOk stalls ~300 ms before handling normally (to trip short
    // client timeouts).
    static constexpr int kDelayThenOk = -1;
    void set_failure_plan(std::vector<int> statuses);
    int requests_handled() const;
    std::string last_authorization() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace dia
