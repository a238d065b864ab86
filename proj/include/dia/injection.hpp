#pragma once

#include "dia/chat_template.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dia {

// One fabricated exchange the target is meant to accept as history.
struct ForgedTurn {
    std::string user;
    std::string assistant;
};

// A fake multi-turn history to be smuggled through a single user slot:
// forged exchanges, an optional replacement system prompt (spliced in
// after the first forged exchange, the earliest point at which a user
// slot can be escaped into a system slot), and the closing user message
// that carries the actual request.
struct InjectedDialogue {
    std::optional<std::string> replacement_system;
    std::vector<ForgedTurn> forged_turns;
    std::string final_user_text;
};

// The conversation the target model effectively sees once the payload is
// embedded in a user slot: forged turns, the spliced system message (if
// any), then the final user message.
std::vector<Message> expand(const InjectedDialogue& d);

// Builds the single-user-slot payload string such that
//   render(t, [user: payload], g) == render_messages(t, expand(d), g)
// byte for byte, for either value of the generation-prefix flag g.
// Throws EmptyFinalUser if final_user_text is empty, SystemUnsupported if
// a replacement system is requested on a template without a system role,
// and MalformedConversation if a replacement system is requested with no
// forged turn to splice it after.
std::string build_injection_payload(const ChatTemplate& t, const InjectedDialogue& d);

// Prefill attack: pins the opening of the assistant's answer and asks it
// to continue. Equivalent to one forged turn (user_text, prefill) with
// continue_cmd as the final user message. Throws EmptyPrefill if prefill
// is empty; an empty continue_cmd is allowed by default (the payload then
// ends at a marker boundary) but rejected when require_continue is set.
std::string build_prefill_payload(const ChatTemplate& t, const std::string& user_text,
                                  const std::string& prefill, const std::string& continue_cmd,
                                  bool require_continue = false);

// In-context attack: fabricated demonstration exchanges followed by the
// real request; the general injection with no system replacement.
std::string build_incontext_payload(const ChatTemplate& t, std::span<const ForgedTurn> demos,
                                    const std::string& final_user_text);

// System replacement attack: one forged exchange, then a system message
// that overrides the deployed instructions, then the real request.
std::string build_system_replacement_payload(const ChatTemplate& t, const ForgedTurn& first,
                                             const std::string& new_system,
                                             const std::string& final_user_text);

// Closed form for the payload bytes added by markers alone:
//   n_forged * (|S_u| + |P_a| + |S_a| + |P_u|)  [+ |P_s| + |S_s| if system]
// so len(payload) == sum of text lengths + marker_overhead.
size_t marker_overhead(const ChatTemplate& t, size_t n_forged, bool has_system);

// Flags dialogue texts that contain marker substrings of some *other*
// registry template (usually an operator pasting pre-rendered content for
// the wrong target). Returns human-readable warnings; empty means clean.
std::vector<std::string> lint_dialogue(const ChatTemplate& target, const InjectedDialogue& d,
                                       const std::vector<ChatTemplate>& registry);

} // namespace dia
