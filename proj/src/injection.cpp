#include "dia/injection.hpp"
#include "dia/util.hpp"

namespace dia {

std::vector<Message> expand(const InjectedDialogue& d) {
    std::vector<Message> out;
    for (size_t i = 0; i < d.forged_turns.size(); ++i) {
        out.push_back({Role::user, d.forged_turns[i].user});
        out.push_back({Role::assistant, d.forged_turns[i].assistant});
        if (i == 0 && d.replacement_system)
            out.push_back({Role::system, *d.replacement_system});
    }
    out.push_back({Role::user, d.final_user_text});
    return out;
}

std::string build_injection_payload(const ChatTemplate& t, const InjectedDialogue& d) {
    if (d.final_user_text.empty())
        throw EmptyFinalUser("injected dialogue needs a final user message");
    if (d.replacement_system) {
        if (!t.supports_system_role)
            throw SystemUnsupported("template '" + t.name +
                                    "' has no system role to replace; fold the text into a "
                                    "user turn instead");
        if (d.forged_turns.empty())
            throw MalformedConversation(
                "a replacement system needs at least one forged turn before it");
    }
    // The payload occupies a user slot, so it starts mid-text: the target's
    // own prefix_user precedes it and its suffix_user (+ generation prefix)
    // follows it. Each forged exchange closes the current user turn, fakes
    // an assistant turn, and reopens a user turn.
    std::string out;
    for (size_t i = 0; i < d.forged_turns.size(); ++i) {
        out += d.forged_turns[i].user;
        out += t.suffix_user;
        out += t.prefix_assistant;
        out += d.forged_turns[i].assistant;
        out += t.suffix_assistant;
        if (i == 0 && d.replacement_system) {
            out += t.prefix_system;
            out += *d.replacement_system;
            out += t.suffix_system;
        }
        out += t.prefix_user;
    }
    out += d.final_user_text;
    return out;
}

std::string build_prefill_payload(const ChatTemplate& t, const std::string& user_text,
                                  const std::string& prefill, const std::string& continue_cmd,
                                  bool require_continue) {
    if (prefill.empty()) throw EmptyPrefill("prefill text must be non-empty");
    if (continue_cmd.empty() && require_continue)
        throw EmptyFinalUser("continue command required but empty");
    std::string out = user_text;
    out += t.suffix_user;
    out += t.prefix_assistant;
    out += prefill;
    out += t.suffix_assistant;
    out += t.prefix_user;
    out += continue_cmd;
    return out;
}

std::string build_incontext_payload(const ChatTemplate& t, std::span<const ForgedTurn> demos,
                                    const std::string& final_user_text) {
    InjectedDialogue d;
    d.forged_turns.assign(demos.begin(), demos.end());
    d.final_user_text = final_user_text;
    return build_injection_payload(t, d);
}

std::string build_system_replacement_payload(const ChatTemplate& t, const ForgedTurn& first,
                                             const std::string& new_system,
                                             const std::string& final_user_text) {
    InjectedDialogue d;
    d.replacement_system = new_system;
    d.forged_turns = {first};
    d.final_user_text = final_user_text;
    return build_injection_payload(t, d);
}

size_t marker_overhead(const ChatTemplate& t, size_t n_forged, bool has_system) {
    size_t per_turn =
        t.suffix_user.size() + t.prefix_assistant.size() + t.suffix_assistant.size() +
        t.prefix_user.size();
    size_t total = n_forged * per_turn;
    if (has_system) total += t.prefix_system.size() + t.suffix_system.size();
    return total;
}

std::vector<std::string> lint_dialogue(const ChatTemplate& target, const InjectedDialogue& d,
                                       const std::vector<ChatTemplate>& registry) {
    std::vector<std::string> warnings;
    auto scan = [&](const std::string& text, const std::string& slot) {
        for (const ChatTemplate& other : registry) {
            if (other.name == target.name) continue;
            const std::string markers[] = {other.prefix_system,    other.suffix_system,
                                           other.prefix_user,      other.suffix_user,
                                           other.prefix_assistant, other.suffix_assistant};
            for (const std::string& m : markers) {
                // Ignore markers the target shares (e.g. a common
                // end-of-turn token) and trivially short ones that would
                // fire on ordinary prose.
                if (m.size() < 3) continue;
                bool shared = false;
                for (const std::string& own : {target.prefix_system, target.suffix_system,
                                               target.prefix_user, target.suffix_user,
                                               target.prefix_assistant, target.suffix_assistant})
                    if (own == m) { shared = true; break; }
                if (shared) continue;
                if (contains(text, m)) {
                    warnings.push_back(slot + " contains marker '" + m + "' of template '" +
                                       other.name + "'");
                    break;
                }
            }
        }
    };
    if (d.replacement_system) scan(*d.replacement_system, "replacement system");
    for (size_t i = 0; i < d.forged_turns.size(); ++i) {
        scan(d.forged_turns[i].user, "forged turn " + std::to_string(i) + " user");
        scan(d.forged_turns[i].assistant, "forged turn " + std::to_string(i) + " assistant");
    }
    scan(d.final_user_text, "final user message");
    return warnings;
}

} // namespace dia
