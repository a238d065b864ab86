#include "dia/keyword_mapping.hpp"

#include "dia/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dia {
namespace {

bool is_word_char(unsigned char c) { return std::isalpha(c) != 0; }

// Words are ASCII letter runs; apostrophes and hyphens join runs so
// "don't" and "self-made" stay single tokens. Everything else is kept
// verbatim as separator text.
struct Token {
    bool is_word;
    std::string text;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (is_word_char(text[i])) {
            size_t j = i;
            while (j < n) {
                if (is_word_char(text[j])) {
                    ++j;
                } else if ((text[j] == '\'' || text[j] == '-') && j + 1 < n &&
                           is_word_char(text[j + 1]) && is_word_char(text[j - 1])) {
                    ++j;
                } else {
                    break;
                }
            }
            out.push_back({true, text.substr(i, j - i)});
            i = j;
        } else {
            size_t j = i;
            while (j < n && !is_word_char(text[j])) ++j;
            out.push_back({false, text.substr(i, j - i)});
            i = j;
        }
    }
    return out;
}

enum class CasePattern { lower, title, upper };

CasePattern detect_case(const std::string& word) {
    bool any_lower = false, any_upper = false;
    for (unsigned char c : word) {
        if (std::islower(c)) any_lower = true;
        if (std::isupper(c)) any_upper = true;
    }
    if (any_upper && !any_lower && word.size() >= 2) return CasePattern::upper;
    if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0]))) return CasePattern::title;
    return CasePattern::lower;
}

std::string apply_case(const std::string& lower_form, CasePattern pattern) {
    switch (pattern) {
    case CasePattern::upper:
        return upper_ascii(lower_form);
    case CasePattern::title: {
        std::string out = lower_form;
        for (char& c : out) {
            if (is_word_char(static_cast<unsigned char>(c))) {
                c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                break;
            }
        }
        return out;
    }
    case CasePattern::lower:
        return lower_form;
    }
    return lower_form;
}

size_t word_count(const std::string& phrase) {
    size_t words = 1;
    for (char c : phrase)
        if (c == ' ') ++words;
    return words;
}

constexpr std::array<FormCategory, 6> kCategories = {
    FormCategory::base,     FormCategory::third_person, FormCategory::plural,
    FormCategory::gerund,   FormCategory::past,         FormCategory::past_participle,
};

// Substitution engine shared by both directions. Walks word tokens,
// trying the longest phrase first (joined with single spaces), and falls
// back to single-word lookup.
std::string substitute(const std::string& text,
                       const std::unordered_map<std::string, std::string>& table,
                       size_t max_phrase_words) {
    const std::vector<Token> tokens = tokenize(text);
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < tokens.size()) {
        if (!tokens[i].is_word) {
            out += tokens[i].text;
            ++i;
            continue;
        }
        bool replaced = false;
        for (size_t len = max_phrase_words; len >= 1 && !replaced; --len) {
            // Candidate spans words i, i+1, ..., using len words with the
            // separators between them required to be exactly " ".
            std::string joined = lower_ascii(tokens[i].text);
            size_t end = i; // token index of the last word in the span
            bool viable = true;
            for (size_t w = 1; w < len; ++w) {
                size_t sep = end + 1, next = end + 2;
                if (next >= tokens.size() || !tokens[next].is_word ||
                    tokens[sep].is_word || tokens[sep].text != " ") {
                    viable = false;
                    break;
                }
                joined += ' ';
                joined += lower_ascii(tokens[next].text);
                end = next;
            }
            if (!viable) continue;
            auto it = table.find(joined);
            if (it == table.end()) continue;
            out += apply_case(it->second, detect_case(tokens[i].text));
            i = end + 1;
            replaced = true;
        }
        if (!replaced) {
            out += tokens[i].text;
            ++i;
        }
    }
    return out;
}

} // namespace

KeywordMapping KeywordMapping::build(std::vector<KeywordPair> pairs) {
    KeywordMapping m;
    for (auto& p : pairs) {
        p.keyword = lower_ascii(trim(p.keyword));
        p.alternative = lower_ascii(trim(p.alternative));
        if (p.keyword.empty() || p.alternative.empty())
            throw FormatError("keyword mapping: empty keyword or alternative");
    }
    for (size_t a = 0; a < pairs.size(); ++a) {
        for (size_t b = a + 1; b < pairs.size(); ++b) {
            if (pairs[a].keyword == pairs[b].keyword)
                throw FormatError("keyword mapping: duplicate keyword '" + pairs[a].keyword + "'");
            if (pairs[a].alternative == pairs[b].alternative)
                throw FormatError("keyword mapping: duplicate alternative '" + pairs[a].alternative + "'");
        }
        for (const auto& other : pairs) {
            if (pairs[a].alternative == other.keyword)
                throw FormatError("keyword mapping: alternative '" + pairs[a].alternative +
                                  "' collides with a keyword");
        }
    }

    m.pairs_ = std::move(pairs);
    for (const auto& p : m.pairs_) {
        m.max_keyword_words_ = std::max(m.max_keyword_words_, word_count(p.keyword));
        m.max_alternative_words_ = std::max(m.max_alternative_words_, word_count(p.alternative));
    }

    auto insert = [&m](std::unordered_map<std::string, std::string>& table,
                       const std::string& from, const std::string& to) {
        auto [it, inserted] = table.emplace(from, to);
        if (!inserted && it->second != to)
            m.ambiguity_log_.push_back("form '" + from + "' maps to both '" + it->second +
                                       "' and '" + to + "'; keeping '" + it->second + "'");
    };
    for (const auto& p : m.pairs_) {
        for (FormCategory c : kCategories) {
            insert(m.forward_, inflect(p.keyword, c), inflect(p.alternative, c));
            insert(m.inverse_, inflect(p.alternative, c), inflect(p.keyword, c));
        }
    }
    return m;
}

std::optional<std::string> KeywordMapping::forward_lookup(const std::string& word_lower) const {
    auto it = forward_.find(word_lower);
    if (it == forward_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> KeywordMapping::inverse_lookup(const std::string& word_lower) const {
    auto it = inverse_.find(word_lower);
    if (it == inverse_.end()) return std::nullopt;
    return it->second;
}

static std::vector<std::string> form_strings(const std::string& word) {
    std::vector<std::string> out;
    for (const auto& [category, form] : all_forms(word)) out.push_back(form);
    return out;
}

std::vector<std::string> KeywordMapping::keyword_forms(size_t i) const {
    return form_strings(pairs_.at(i).keyword);
}

std::vector<std::string> KeywordMapping::alternative_forms(size_t i) const {
    return form_strings(pairs_.at(i).alternative);
}

std::string sanitize_text(const std::string& text, const KeywordMapping& mapping) {
    return substitute(text, mapping.forward_, mapping.max_keyword_words());
}

std::string restore_text(const std::string& text, const KeywordMapping& mapping) {
    return substitute(text, mapping.inverse_, mapping.max_alternative_words());
}

bool text_has_word_form(const std::string& text, const std::string& form) {
    const std::vector<Token> tokens = tokenize(text);
    const size_t words = word_count(form);
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_word) continue;
        std::string joined = lower_ascii(tokens[i].text);
        size_t end = i;
        bool viable = true;
        for (size_t w = 1; w < words; ++w) {
            size_t sep = end + 1, next = end + 2;
            if (next >= tokens.size() || !tokens[next].is_word ||
                tokens[sep].is_word || tokens[sep].text != " ") {
                viable = false;
                break;
            }
            joined += ' ';
            joined += lower_ascii(tokens[next].text);
            end = next;
        }
        if (viable && joined == form) return true;
    }
    return false;
}

} // namespace dia
