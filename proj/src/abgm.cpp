#include "dia/abgm.hpp"

#include "dia/util.hpp"

#include "json.hpp"

#include <array>
#include <cctype>

namespace dia {
namespace {

constexpr std::array<const char*, 10> kRefusalMarkers = {
    "i'm sorry",     "i am sorry",    "i apologize",    "i apologise", "i cannot",
    "i can't",       "i won't",       "i will not",     "as an ai",    "unable to help",
};

// Trailing word of `text` ending at position `end` (exclusive), letters only.
std::string word_before(const std::string& text, size_t end) {
    size_t begin = end;
    while (begin > 0 && std::isalpha(static_cast<unsigned char>(text[begin - 1]))) --begin;
    return lower_ascii(text.substr(begin, end - begin));
}

bool is_abbreviation(const std::string& word) {
    static const std::array<const char*, 14> kAbbrev = {
        "mr", "mrs", "ms", "dr", "prof", "st", "no", "etc", "vs", "approx", "dept", "fig", "eg", "ie",
    };
    if (word.size() == 1) return true; // initials such as "J."
    for (const char* a : kAbbrev)
        if (word == a) return true;
    return false;
}

// Strips list decorations ("- ", "* ", "3. ", "(2) ") from a line.
std::string strip_bullet(std::string line) {
    line = trim(line);
    size_t i = 0;
    while (i < line.size() &&
           (std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '(' ||
            line[i] == ')' || line[i] == '.' || line[i] == '-' || line[i] == '*'))
        ++i;
    // Only treat the prefix as decoration when it is followed by a space,
    // so "-> x" or a line starting with a hyphenated word survives.
    if (i > 0 && i < line.size() && line[i] == ' ') return trim(line.substr(i));
    return line;
}

std::string strip_quotes(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        s = s.substr(1, s.size() - 2);
    return trim(s);
}

// Parses one "word -> replacement" line; false when the line has no arrow.
bool parse_pair_line(const std::string& raw, KeywordPair& out) {
    const std::string line = strip_bullet(raw);
    size_t arrow = line.find("->");
    size_t arrow_len = 2;
    if (arrow == std::string::npos) {
        arrow = line.find("=>");
        if (arrow == std::string::npos) return false;
    }
    out.keyword = strip_quotes(line.substr(0, arrow));
    out.alternative = strip_quotes(line.substr(arrow + arrow_len));
    return !out.keyword.empty() && !out.alternative.empty();
}

} // namespace

bool contains_refusal_marker(const std::string& text) {
    for (const char* marker : kRefusalMarkers)
        if (icontains(text, marker)) return true;
    return false;
}

std::string first_sentence(const std::string& text) {
    const size_t n = text.size();
    for (size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (c != '.' && c != '?' && c != '!') continue;
        size_t end = i;
        while (end + 1 < n && (text[end + 1] == '.' || text[end + 1] == '?' || text[end + 1] == '!'))
            ++end;
        const bool at_break = end + 1 >= n || text[end + 1] == ' ' || text[end + 1] == '\n' ||
                              text[end + 1] == '\t' || text[end + 1] == '\r';
        if (!at_break) {
            i = end;
            continue;
        }
        if (c == '.' && end == i && is_abbreviation(word_before(text, i))) {
            i = end;
            continue;
        }
        return text.substr(0, end + 1);
    }
    return {};
}

KeywordMapping extract_keywords(AuxiliaryClient& aux, const std::string& prompt,
                                const PromptAssets& assets, int max_attempts) {
    if (trim(prompt).empty()) throw FormatError("extract_keywords: empty prompt");
    if (max_attempts < 1) max_attempts = 1;
    const std::string instruction =
        expand_placeholders(assets.extract_instruction, {{"prompt", prompt}});

    std::string last_problem = "no response";
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const std::string response = aux.query(instruction);
        if (contains_refusal_marker(response))
            throw AuxRefusal("auxiliary declined the keyword-extraction task");

        std::vector<KeywordPair> pairs;
        bool any_content = false;
        for (const std::string& raw : split_lines(response)) {
            const std::string line = trim(raw);
            if (line.empty()) continue;
            any_content = true;
            KeywordPair p;
            if (parse_pair_line(line, p)) pairs.push_back(std::move(p));
        }
        if (pairs.empty()) {
            const std::string flat = lower_ascii(trim(response));
            if (!any_content || flat == "none" || flat == "none." || flat == "no keywords")
                return KeywordMapping(); // genuinely nothing to replace
            last_problem = "no parsable pairs in: " + flat.substr(0, 120);
            continue;
        }
        try {
            return KeywordMapping::build(std::move(pairs));
        } catch (const FormatError& e) {
            last_problem = e.what();
        }
    }
    throw AuxParseFailure("extract_keywords: gave up after " + std::to_string(max_attempts) +
                          " attempts (" + last_problem + ")");
}

AffirmativeBeginning generate_beginning(AuxiliaryClient& aux, const KeywordMapping& mapping,
                                        const std::string& benign_prompt) {
    const std::string response = aux.query(benign_prompt);
    if (contains_refusal_marker(response))
        throw AuxRefusal("auxiliary declined the benign completion");
    if (trim(response).empty())
        throw AuxParseFailure("generate_beginning: auxiliary returned an empty completion");

    AffirmativeBeginning out;
    std::string sentence = first_sentence(response);
    if (sentence.empty()) {
        sentence = trim(response);
        out.whole_response = true;
    }
    out.text = restore_text(sentence, mapping);
    return out;
}

BeginningResult run_abgm(AuxiliaryClient& aux, const std::string& malicious_prompt,
                         const PromptAssets& assets) {
    BeginningResult r;
    r.mapping = extract_keywords(aux, malicious_prompt, assets);
    r.sanitized_prompt = sanitize_text(malicious_prompt, r.mapping);
    r.beginning = generate_beginning(aux, r.mapping, r.sanitized_prompt);
    return r;
}

std::string beginning_record_line(const std::string& prompt, const KeywordMapping& mapping,
                                  const AffirmativeBeginning& beginning) {
    nlohmann::ordered_json j;
    j["prompt"] = prompt;
    j["keywords"] = nlohmann::json::array();
    j["alternatives"] = nlohmann::json::array();
    for (const auto& p : mapping.pairs()) {
        j["keywords"].push_back(p.keyword);
        j["alternatives"].push_back(p.alternative);
    }
    j["beginning"] = beginning.text;
    return j.dump();
}

} // namespace dia
