#include "dia/chat_template.hpp"
#include "dia/util.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>

namespace dia {

const char* role_name(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "?";
}

Role role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw FormatError("unknown role name: " + name);
}

void Conversation::validate() const {
    size_t i = 0;
    if (i < messages.size() && messages[i].role == Role::system) ++i;
    Role expected = Role::user;
    for (; i < messages.size(); ++i) {
        if (messages[i].role == Role::system)
            throw MalformedConversation("system message only allowed at position 0");
        if (messages[i].role != expected)
            throw MalformedConversation(
                std::string("expected ") + role_name(expected) + " at position " +
                std::to_string(i) + ", got " + role_name(messages[i].role));
        expected = expected == Role::user ? Role::assistant : Role::user;
    }
}

void ChatTemplate::validate() const {
    auto fail = [&](const std::string& why) {
        throw FormatError("template '" + name + "': " + why);
    };
    if (prefix_user.empty()) fail("prefix_user must be non-empty");
    if (prefix_assistant.empty()) fail("prefix_assistant must be non-empty");
    if (prefix_user == prefix_assistant) fail("prefix_user and prefix_assistant must differ");
    if (!prefix_system.empty() &&
        (prefix_system == prefix_user || prefix_system == prefix_assistant))
        fail("prefix_system must differ from the other role prefixes");
    if (supports_system_role) {
        if (prefix_system.empty() || suffix_system.empty())
            fail("system role declared but system markers are empty");
    } else {
        if (!prefix_system.empty() || !suffix_system.empty())
            fail("system markers set but supports_system_role is false");
    }
}

std::string render_messages(const ChatTemplate& t, std::span<const Message> messages,
                            bool add_generation_prefix) {
    std::string out = t.bos_text;
    for (const Message& m : messages) {
        switch (m.role) {
            case Role::system:
                if (!t.supports_system_role)
                    throw SystemUnsupported("template '" + t.name + "' has no system role");
                out += t.prefix_system;
                out += m.text;
                out += t.suffix_system;
                break;
            case Role::user:
                out += t.prefix_user;
                out += m.text;
                out += t.suffix_user;
                break;
            case Role::assistant:
                out += t.prefix_assistant;
                out += m.text;
                out += t.suffix_assistant;
                break;
        }
    }
    if (add_generation_prefix) out += t.prefix_assistant;
    return out;
}

std::string render(const ChatTemplate& t, const Conversation& conversation,
                   bool add_generation_prefix) {
    conversation.validate();
    return render_messages(t, conversation.messages, add_generation_prefix);
}

namespace {

// Scans for `suffix` starting at `pos`; returns the text before it and
// advances pos past the suffix.
std::string take_until(const std::string& flat, size_t& pos, const std::string& suffix,
                       const char* what) {
    size_t idx = flat.find(suffix, pos);
    if (idx == std::string::npos)
        throw MalformedTranscript(std::string("unterminated ") + what + " turn at byte " +
                                  std::to_string(pos));
    std::string text = flat.substr(pos, idx - pos);
    pos = idx + suffix.size();
    return text;
}

} // namespace

Conversation parse(const ChatTemplate& t, const std::string& flat) {
    Conversation conv;
    size_t pos = 0;
    if (!t.bos_text.empty()) {
        if (!starts_with(flat, t.bos_text))
            throw MalformedTranscript("missing bos text");
        pos = t.bos_text.size();
    }

    // Optional leading system segment. Longest match wins when one role
    // prefix is a prefix of another.
    if (t.supports_system_role && starts_with(flat, t.prefix_system, pos) &&
        !(starts_with(flat, t.prefix_user, pos) &&
          t.prefix_user.size() > t.prefix_system.size())) {
        pos += t.prefix_system.size();
        conv.messages.push_back({Role::system, take_until(flat, pos, t.suffix_system, "system")});
    }

    bool expect_user = true;
    while (pos < flat.size()) {
        if (expect_user) {
            // A trailing generation prefix may follow the last assistant turn.
            if (flat.compare(pos, std::string::npos, t.prefix_assistant) == 0) break;
            if (!starts_with(flat, t.prefix_user, pos))
                throw MalformedTranscript("expected user prefix at byte " + std::to_string(pos));
            pos += t.prefix_user.size();
            conv.messages.push_back({Role::user, take_until(flat, pos, t.suffix_user, "user")});
            expect_user = false;
        } else {
            if (!starts_with(flat, t.prefix_assistant, pos))
                throw MalformedTranscript("expected assistant prefix at byte " +
                                          std::to_string(pos));
            pos += t.prefix_assistant.size();
            if (pos == flat.size()) break; // trailing generation prefix
            conv.messages.push_back(
                {Role::assistant, take_until(flat, pos, t.suffix_assistant, "assistant")});
            expect_user = true;
        }
    }
    conv.validate();
    return conv;
}

std::vector<Message> parse_lenient(const ChatTemplate& t, const std::string& flat) {
    struct Marker {
        std::string text;
        bool opens;  // true: role prefix, false: role suffix
        Role role;   // meaningful when opens
    };
    std::vector<Marker> markers;
    auto add = [&](const std::string& s, bool opens, Role role) {
        if (s.empty()) return;
        for (const Marker& m : markers)
            if (m.text == s) return; // identical marker strings share semantics
        markers.push_back({s, opens, role});
    };
    // Prefixes are registered before suffixes so that when a prefix and a
    // suffix collide as strings, the earlier (opening) reading is kept;
    // fixtures never hit this.
    add(t.prefix_system, true, Role::system);
    add(t.prefix_user, true, Role::user);
    add(t.prefix_assistant, true, Role::assistant);
    add(t.suffix_system, false, Role::system);
    add(t.suffix_user, false, Role::user);
    add(t.suffix_assistant, false, Role::assistant);

    std::vector<Message> turns;
    bool open = false;
    Role role = Role::user;
    std::string text;
    auto flush = [&](bool keep_empty_open) {
        // Bytes outside any role segment count as user input; a dangling
        // opened turn with no text (a generation prefix) is dropped unless
        // explicitly kept.
        if (!text.empty() || (open && keep_empty_open))
            turns.push_back({open ? role : Role::user, text});
        text.clear();
        open = false;
    };

    size_t pos = 0;
    if (!t.bos_text.empty() && starts_with(flat, t.bos_text)) pos = t.bos_text.size();
    while (pos < flat.size()) {
        size_t best_idx = std::string::npos;
        const Marker* best = nullptr;
        for (const Marker& m : markers) {
            size_t idx = flat.find(m.text, pos);
            if (idx == std::string::npos) continue;
            if (idx < best_idx || (idx == best_idx && m.text.size() > best->text.size())) {
                best_idx = idx;
                best = &m;
            }
        }
        if (!best) {
            text += flat.substr(pos);
            break;
        }
        text += flat.substr(pos, best_idx - pos);
        if (best->opens) {
            if (open || !text.empty()) flush(true);
            open = true;
            role = best->role;
        } else {
            flush(true); // suffix closes the current segment even if empty
        }
        pos = best_idx + best->text.size();
    }
    flush(false);
    return turns;
}

std::vector<ChatTemplate> load_templates(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("template registry " + path + ": " + e.what());
    }
    if (!doc.is_array())
        throw FormatError("template registry " + path + ": expected a top-level array");

    std::vector<ChatTemplate> out;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        auto where = [&](const char* field) {
            return "templates[" + std::to_string(i) + "]." + field;
        };
        if (!entry.is_object())
            throw FormatError(where("") + ": expected an object");
        auto str = [&](const char* field, const std::string& fallback) -> std::string {
            if (!entry.contains(field)) return fallback;
            if (!entry[field].is_string())
                throw FormatError(where(field) + ": expected string");
            return entry[field].get<std::string>();
        };
        ChatTemplate t;
        t.name = str("name", "");
        if (t.name.empty()) throw FormatError(where("name") + ": required, non-empty");
        t.prefix_system = str("prefix_system", "");
        t.suffix_system = str("suffix_system", "");
        t.prefix_user = str("prefix_user", "");
        t.suffix_user = str("suffix_user", "");
        t.prefix_assistant = str("prefix_assistant", "");
        t.suffix_assistant = str("suffix_assistant", "");
        t.bos_text = str("bos_text", "");
        if (entry.contains("supports_system_role")) {
            if (!entry["supports_system_role"].is_boolean())
                throw FormatError(where("supports_system_role") + ": expected boolean");
            t.supports_system_role = entry["supports_system_role"].get<bool>();
        } else {
            t.supports_system_role = !t.prefix_system.empty() && !t.suffix_system.empty();
        }
        try {
            t.validate();
        } catch (const FormatError& e) {
            throw FormatError("templates[" + std::to_string(i) + "]: " + e.what());
        }
        for (const ChatTemplate& prev : out)
            if (prev.name == t.name)
                throw FormatError("duplicate template name '" + t.name + "'");
        out.push_back(std::move(t));
    }
    return out;
}

std::optional<ChatTemplate> find_template(const std::vector<ChatTemplate>& registry,
                                          const std::string& name) {
    for (const ChatTemplate& t : registry)
        if (t.name == name) return t;
    return std::nullopt;
}

} // namespace dia
