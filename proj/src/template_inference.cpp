#include "dia/template_inference.hpp"
#include "dia/util.hpp"

#include <thread>

namespace dia {

bool degenerate_pairing(const ChatTemplate& t_i, const ChatTemplate& t_j) {
    return t_i.suffix_user == t_j.suffix_user && t_i.prefix_assistant == t_j.prefix_assistant &&
           t_i.suffix_assistant == t_j.suffix_assistant && t_i.prefix_user == t_j.prefix_user;
}

std::string build_probe(const ChatTemplate& t_i, const ChatTemplate& t_j,
                        const ProbeSpec& spec) {
    auto check = [&](const std::string& text, const char* field) {
        for (const ChatTemplate* t : {&t_i, &t_j}) {
            for (const std::string& m :
                 {t->prefix_system, t->suffix_system, t->prefix_user, t->suffix_user,
                  t->prefix_assistant, t->suffix_assistant}) {
                if (!m.empty() && contains(text, m))
                    throw FormatError(std::string("probe ") + field +
                                      " contains a marker of template '" + t->name + "'");
            }
        }
    };
    check(spec.user_placeholder, "user placeholder");
    check(spec.assistant_placeholder, "assistant placeholder");
    check(spec.repeat_cmd, "repeat command");

    std::string out = spec.user_placeholder;
    out += t_i.suffix_user;
    out += t_i.prefix_assistant;
    out += t_j.suffix_user;
    out += t_j.prefix_assistant;
    out += spec.assistant_placeholder;
    out += t_i.suffix_assistant;
    out += t_i.prefix_user;
    out += t_j.suffix_assistant;
    out += t_j.prefix_user;
    out += spec.repeat_cmd;
    return out;
}

const char* decision_name(TemplateDecision d) {
    switch (d) {
        case TemplateDecision::template_i: return "template_i";
        case TemplateDecision::template_j: return "template_j";
        case TemplateDecision::unknown: return "unknown";
    }
    return "?";
}

TemplateDecision infer_decision(const ChatTemplate& t_i, const ChatTemplate& t_j,
                                const std::string& response) {
    bool leak_i = contains(response, t_j.suffix_user + t_j.prefix_assistant);
    bool leak_j = contains(response, t_i.suffix_assistant + t_i.prefix_user);
    if (leak_i && !leak_j) return TemplateDecision::template_i;
    if (leak_j && !leak_i) return TemplateDecision::template_j;
    return TemplateDecision::unknown;
}

InferenceOutcome run_tia(ChatEndpoint& endpoint, const ChatTemplate& t_i,
                         const ChatTemplate& t_j, int n_tmax, const ProbeSpec& spec) {
    InferenceOutcome out;
    auto query = [&](const std::string& probe) -> std::string {
        std::string resp;
        try {
            resp = endpoint.send_user(probe);
        } catch (const EndpointError& e) {
            throw TiaEndpointError(e.what(), std::move(out));
        }
        ++out.tries_used;
        out.transcripts.push_back({probe, resp});
        return resp;
    };

    std::string probe = build_probe(t_i, t_j, spec);
    for (int k = 0; k < n_tmax; ++k) {
        TemplateDecision d = infer_decision(t_i, t_j, query(probe));
        if (d != TemplateDecision::unknown) {
            out.decision = d;
            return out;
        }
    }
    // Swapped orientation; decisions map back: the swapped run's
    // "template_i" is our t_j and vice versa.
    std::string swapped = build_probe(t_j, t_i, spec);
    for (int k = 0; k < n_tmax; ++k) {
        TemplateDecision d = infer_decision(t_j, t_i, query(swapped));
        if (d == TemplateDecision::template_i) {
            out.decision = TemplateDecision::template_j;
            return out;
        }
        if (d == TemplateDecision::template_j) {
            out.decision = TemplateDecision::template_i;
            return out;
        }
    }
    out.decision = TemplateDecision::unknown;
    return out;
}

IdentifyResult identify_template(ChatEndpoint& endpoint,
                                 const std::vector<ChatTemplate>& registry, int n_tmax,
                                 const ProbeSpec& spec, int concurrency) {
    if (registry.empty()) throw FormatError("template registry is empty");
    IdentifyResult result;
    if (registry.size() == 1) {
        result.winner = registry[0];
        return result;
    }
    if (concurrency < 1) concurrency = 1;

    std::vector<ChatTemplate> survivors = registry;
    TemplateDecision last_decision = TemplateDecision::unknown;
    while (survivors.size() > 1) {
        size_t n_pairs = survivors.size() / 2;
        std::vector<InferenceOutcome> outcomes(n_pairs);
        std::vector<std::exception_ptr> errors(n_pairs);

        // Pairings in one round are independent; run them in slices of
        // `concurrency` worker threads.
        for (size_t base = 0; base < n_pairs; base += static_cast<size_t>(concurrency)) {
            size_t slice = std::min(n_pairs - base, static_cast<size_t>(concurrency));
            std::vector<std::thread> pool;
            for (size_t w = 0; w < slice; ++w) {
                size_t p = base + w;
                auto work = [&, p] {
                    try {
                        outcomes[p] = run_tia(endpoint, survivors[2 * p], survivors[2 * p + 1],
                                              n_tmax, spec);
                    } catch (...) {
                        errors[p] = std::current_exception();
                    }
                };
                if (slice == 1)
                    work(); // keep single-threaded runs free of thread overhead
                else
                    pool.emplace_back(work);
            }
            for (auto& th : pool) th.join();
        }
        for (size_t p = 0; p < n_pairs; ++p)
            if (errors[p]) std::rethrow_exception(errors[p]);

        std::vector<ChatTemplate> next;
        for (size_t p = 0; p < n_pairs; ++p) {
            const ChatTemplate& left = survivors[2 * p];
            const ChatTemplate& right = survivors[2 * p + 1];
            result.pairings.push_back(
                {left.name, right.name, outcomes[p].decision, outcomes[p].tries_used});
            result.total_queries += outcomes[p].tries_used;
            // unknown keeps the earlier-listed candidate in the running.
            next.push_back(outcomes[p].decision == TemplateDecision::template_j ? right : left);
            last_decision = outcomes[p].decision;
        }
        if (survivors.size() % 2 == 1) {
            next.push_back(survivors.back()); // bye
        }
        survivors = std::move(next);
    }
    if (last_decision == TemplateDecision::unknown)
        result.winner = std::nullopt;
    else
        result.winner = survivors[0];
    return result;
}

} // namespace dia
