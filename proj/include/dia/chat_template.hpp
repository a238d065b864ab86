#pragma once

#include "dia/errors.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dia {

enum class Role { system, user, assistant };

const char* role_name(Role r);
Role role_from_name(const std::string& name); // throws FormatError on unknown

struct Message {
    Role role;
    std::string text;
};

// A well-formed chat history: at most one system message, and only at
// position 0; the remaining turns strictly alternate user / assistant,
// starting with user. A conversation may end on either role.
struct Conversation {
    std::vector<Message> messages;

    void validate() const; // throws MalformedConversation
    bool has_system() const {
        return !messages.empty() && messages.front().role == Role::system;
    }
};

// Marker-based chat template: each role is wrapped by a fixed prefix and
// suffix string, e.g. user text u renders as prefix_user + u + suffix_user.
// This models the turn structure of common open-weight model templates
// (header-token styles, <start_of_turn> styles, ChatML, [INST] styles);
// conditional or programmable template languages are out of scope.
struct ChatTemplate {
    std::string name;
    std::string prefix_system;
    std::string suffix_system;
    std::string prefix_user;
    std::string suffix_user;
    std::string prefix_assistant;
    std::string suffix_assistant;
    bool supports_system_role = false;
    std::string bos_text; // emitted once at the very front, often empty

    // Checks structural invariants:
    //  - prefix_user and prefix_assistant are non-empty;
    //  - the role prefixes are pairwise distinct where non-empty (suffixes
    //    may legitimately coincide, e.g. a shared end-of-turn token);
    //  - supports_system_role == false implies empty system markers, and
    //    true implies both system markers are non-empty.
    void validate() const; // throws FormatError
};

// Renders a message sequence by plain concatenation:
//   bos_text + sum(prefix_role + text + suffix_role) [+ prefix_assistant]
// No shape validation is performed, so forged or mid-stream-system
// sequences render exactly as their markers dictate. Throws
// SystemUnsupported if a system message meets a template without a
// system role.
std::string render_messages(const ChatTemplate& t, std::span<const Message> messages,
                            bool add_generation_prefix);

// Renders a validated Conversation. When add_generation_prefix is true a
// trailing prefix_assistant is appended so the model continues in the
// assistant slot.
std::string render(const ChatTemplate& t, const Conversation& conversation,
                   bool add_generation_prefix);

// Inverts render() on flat transcripts whose message texts contain no
// marker substrings. A trailing generation prefix, if present, is consumed
// and discarded. Throws MalformedTranscript when the input does not match
// the template grammar.
Conversation parse(const ChatTemplate& t, const std::string& flat);

// Best-effort segmentation used by simulated endpoints: scans for marker
// occurrences (leftmost, longest match first) and folds the bytes into
// role-tagged turns. Never throws on strange input; bytes that arrive
// before any role prefix are attached to a synthetic user turn, and other
// templates' markers are treated as plain text.
std::vector<Message> parse_lenient(const ChatTemplate& t, const std::string& flat);

// --- registry ---

// Loads a template registry: a JSON array of objects with fields
//   name, prefix_system, suffix_system, prefix_user, suffix_user,
//   prefix_assistant, suffix_assistant, supports_system_role, bos_text.
// Marker fields may use standard JSON escapes for newlines and tabs.
// Omitted system fields imply supports_system_role = false; bos_text
// defaults to "". Throws FormatError (naming the offending entry/field)
// on parse failure, invalid markers, or duplicate names.
std::vector<ChatTemplate> load_templates(const std::string& path);

// Finds a template by name; returns nullopt if absent.
std::optional<ChatTemplate> find_template(const std::vector<ChatTemplate>& registry,
                                          const std::string& name);

} // namespace dia
