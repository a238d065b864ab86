#include "dia/sim_server.hpp"

#include "dia/errors.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <mutex>
#include <thread>

namespace dia {

using nlohmann::json;

std::string SimulatedLLM::simulate(const std::string& raw_rendered_input) {
    if (script_next_ < cfg_.scripted_responses.size())
        return cfg_.scripted_responses[script_next_++];

    const std::vector<Message> turns = parse_lenient(cfg_.true_template, raw_rendered_input);

    for (const Message& m : turns)
        for (const std::string& trigger : cfg_.refusal_lexicon)
            if (!trigger.empty() && icontains(m.text, trigger)) return canned_refusal();

    const Message* last_user = nullptr;
    const Message* last_assistant = nullptr;
    for (const Message& m : turns) {
        if (m.role == Role::user) last_user = &m;
        if (m.role == Role::assistant) last_assistant = &m;
    }
    if (last_user && last_assistant && icontains(last_user->text, cfg_.repeat_cmd) &&
        rng_.next_double() < cfg_.repeat_compliance)
        return last_assistant->text;

    return generic_reply();
}

struct SimServer::Impl {
    httplib::Server srv;
    std::thread worker;
    int port = 0;

    std::mutex mu; // guards everything below
    SimulatedLLM sim;
    std::vector<int> failure_plan;
    size_t plan_next = 0;
    int handled = 0;
    std::string last_auth;

    explicit Impl(SimulatedLLMConfig cfg) : sim(std::move(cfg)) {}

    // Returns the planned status for this request: 0 = handle normally.
    int consume_plan_entry() {
        if (plan_next >= failure_plan.size()) return 0;
        return failure_plan[plan_next++];
    }

    void note_request(const httplib::Request& req) {
        ++handled;
        if (req.has_header("Authorization")) last_auth = req.get_header_value("Authorization");
    }

    static void reply_error(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", message}}.dump(), "application/json");
    }

    void handle_chat(const httplib::Request& req, httplib::Response& res) {
        int planned;
        {
            std::lock_guard<std::mutex> lock(mu);
            note_request(req);
            planned = consume_plan_entry();
        }
        if (planned > 0) {
            reply_error(res, planned, "planned failure");
            return;
        }
        if (planned == kDelayThenOk)
            std::this_thread::sleep_for(std::chrono::milliseconds(300));

        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            reply_error(res, 400, std::string("bad JSON: ") + e.what());
            return;
        }
        std::vector<Message> msgs;
        try {
            for (const json& m : body.at("messages"))
                msgs.push_back({role_from_name(m.at("role").get<std::string>()),
                                m.at("content").get<std::string>()});
        } catch (const std::exception& e) {
            reply_error(res, 400, std::string("bad messages: ") + e.what());
            return;
        }
        if (msgs.empty()) {
            reply_error(res, 400, "messages must be non-empty");
            return;
        }

        std::string reply;
        {
            std::lock_guard<std::mutex> lock(mu);
            const ChatTemplate& tmpl = sim.config().true_template;
            if (!tmpl.supports_system_role) {
                // Serving stacks for system-less templates fold the system
                // text into the first user turn rather than erroring out.
                std::vector<Message> folded;
                std::string pending_system;
                for (Message& m : msgs) {
                    if (m.role == Role::system) {
                        pending_system += (pending_system.empty() ? "" : "\n\n") + m.text;
                        continue;
                    }
                    if (!pending_system.empty() && m.role == Role::user) {
                        m.text = pending_system + "\n\n" + m.text;
                        pending_system.clear();
                    }
                    folded.push_back(std::move(m));
                }
                if (!pending_system.empty())
                    folded.push_back({Role::user, pending_system});
                msgs = std::move(folded);
            }
            const std::string rendered = render_messages(tmpl, msgs, true);
            reply = sim.simulate(rendered);
        }

        json out = {{"object", "chat.completion"},
                    {"model", body.value("model", "sim")},
                    {"choices",
                     json::array({{{"index", 0},
                                   {"message", {{"role", "assistant"}, {"content", reply}}},
                                   {"finish_reason", "stop"}}})}};
        res.set_content(out.dump(), "application/json");
    }

    void handle_raw(const httplib::Request& req, httplib::Response& res) {
        int planned;
        {
            std::lock_guard<std::mutex> lock(mu);
            note_request(req);
            planned = consume_plan_entry();
        }
        if (planned > 0) {
            reply_error(res, planned, "planned failure");
            return;
        }
        if (planned == kDelayThenOk)
            std::this_thread::sleep_for(std::chrono::milliseconds(300));

        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            reply_error(res, 400, std::string("bad JSON: ") + e.what());
            return;
        }
        if (!body.contains("prompt") || !body["prompt"].is_string()) {
            reply_error(res, 400, "prompt must be a string");
            return;
        }

        std::string reply;
        {
            std::lock_guard<std::mutex> lock(mu);
            reply = sim.simulate(body["prompt"].get<std::string>());
        }
        json out = {{"object", "text_completion"},
                    {"model", body.value("model", "sim")},
                    {"choices", json::array({{{"index", 0}, {"text", reply}}})}};
        res.set_content(out.dump(), "application/json");
    }
};

SimServer::SimServer(SimulatedLLMConfig sim, int port) : impl_(std::make_unique<Impl>(std::move(sim))) {
    Impl* impl = impl_.get();
    impl->srv.set_tcp_nodelay(true); // avoid Nagle/delayed-ACK stalls on loopback
    impl->srv.Post("/v1/chat/completions",
                   [impl](const httplib::Request& req, httplib::Response& res) {
                       impl->handle_chat(req, res);
                   });
    impl->srv.Post("/v1/completions",
                   [impl](const httplib::Request& req, httplib::Response& res) {
                       impl->handle_raw(req, res);
                   });

    if (port == 0) {
        impl->port = impl->srv.bind_to_any_port("127.0.0.1");
        if (impl->port <= 0) throw EndpointError("sim server: failed to bind a loopback port");
    } else {
        if (!impl->srv.bind_to_port("127.0.0.1", port))
            throw EndpointError("sim server: failed to bind 127.0.0.1:" + std::to_string(port));
        impl->port = port;
    }
    impl->worker = std::thread([impl] { impl->srv.listen_after_bind(); });
    impl->srv.wait_until_ready();
}

SimServer::~SimServer() { stop(); }

int SimServer::port() const { return impl_->port; }

std::string SimServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

void SimServer::stop() {
    if (impl_->srv.is_running() || impl_->worker.joinable()) {
        impl_->srv.stop();
        if (impl_->worker.joinable()) impl_->worker.join();
    }
}

void SimServer::set_failure_plan(std::vector<int> statuses) {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->failure_plan = std::move(statuses);
    impl_->plan_next = 0;
}

int SimServer::requests_handled() const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->handled;
}

std::string SimServer::last_authorization() const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->last_auth;
}

} // namespace dia
