#include "dia/morphology.hpp"
#include "dia/util.hpp"

namespace dia {

const char* category_name(FormCategory c) {
    switch (c) {
        case FormCategory::base: return "base";
        case FormCategory::third_person: return "third_person";
        case FormCategory::plural: return "plural";
        case FormCategory::gerund: return "gerund";
        case FormCategory::past: return "past";
        case FormCategory::past_participle: return "past_participle";
    }
    return "?";
}

std::optional<FormCategory> category_from_name(const std::string& name) {
    for (FormCategory c : kAllCategories)
        if (name == category_name(c)) return c;
    // short aliases used by the reference lexicon
    if (name == "s") return FormCategory::third_person;
    if (name == "ing") return FormCategory::gerund;
    if (name == "ed") return FormCategory::past;
    return std::nullopt;
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(const std::string& w, const char* suffix) {
    std::string s(suffix);
    return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
}

size_t vowel_groups(const std::string& w) {
    size_t n = 0;
    bool in_group = false;
    for (char c : w) {
        bool v = is_vowel(c) || c == 'y';
        if (v && !in_group) ++n;
        in_group = v;
    }
    return n;
}

// Single-syllable consonant-vowel-consonant shape (stop -> stopp-), the
// only doubling the rules attempt; stress-doubled polysyllables (refer,
// admit, ...) live in the irregular table.
bool doubles_final(const std::string& w) {
    if (w.size() < 3) return false;
    char last = w[w.size() - 1];
    char mid = w[w.size() - 2];
    char before = w[w.size() - 3];
    if (is_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
    if (!is_vowel(mid)) return false;
    if (is_vowel(before)) return false;
    return vowel_groups(w) == 1;
}

std::string s_form(const std::string& w) {
    if (w.empty()) return w;
    if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
        ends_with(w, "sh"))
        return w + "es";
    if (w.size() >= 2 && w.back() == 'y' && !is_vowel(w[w.size() - 2]))
        return w.substr(0, w.size() - 1) + "ies";
    if (w.size() >= 2 && w.back() == 'o' && !is_vowel(w[w.size() - 2])) return w + "es";
    return w + "s";
}

std::string ing_form(const std::string& w) {
    if (w.empty()) return w;
    if (ends_with(w, "ie")) return w.substr(0, w.size() - 2) + "ying";
    if (w.back() == 'e' && !ends_with(w, "ee") && !ends_with(w, "oe") && !ends_with(w, "ye"))
        return w.substr(0, w.size() - 1) + "ing";
    if (doubles_final(w)) return w + w.back() + "ing";
    return w + "ing";
}

std::string ed_form(const std::string& w) {
    if (w.empty()) return w;
    if (w.back() == 'e') return w + "d";
    if (w.size() >= 2 && w.back() == 'y' && !is_vowel(w[w.size() - 2]))
        return w.substr(0, w.size() - 1) + "ied";
    if (doubles_final(w)) return w + w.back() + "ed";
    return w + "ed";
}

std::string regular(const std::string& w, FormCategory c) {
    switch (c) {
        case FormCategory::base: return w;
        case FormCategory::third_person:
        case FormCategory::plural: return s_form(w);
        case FormCategory::gerund: return ing_form(w);
        case FormCategory::past:
        case FormCategory::past_participle: return ed_form(w);
    }
    return w;
}

} // namespace

std::string inflect(const std::string& base_lower, FormCategory category) {
    // Phrases inflect their head (final) word and keep the rest intact.
    size_t space = base_lower.rfind(' ');
    if (space != std::string::npos)
        return base_lower.substr(0, space + 1) +
               inflect(base_lower.substr(space + 1), category);

    if (const IrregularEntry* e = find_irregular(base_lower)) {
        const char* over = nullptr;
        switch (category) {
            case FormCategory::base: return base_lower;
            case FormCategory::third_person: over = e->third; break;
            case FormCategory::plural: over = e->plural ? e->plural : e->third; break;
            case FormCategory::gerund: over = e->gerund; break;
            case FormCategory::past: over = e->past; break;
            case FormCategory::past_participle:
                over = e->participle ? e->participle : e->past;
                break;
        }
        if (over) return over;
    }
    return regular(base_lower, category);
}

std::vector<std::pair<FormCategory, std::string>> all_forms(const std::string& base_lower) {
    std::vector<std::pair<FormCategory, std::string>> out;
    for (FormCategory c : kAllCategories) {
        std::string f = inflect(base_lower, c);
        bool seen = false;
        for (const auto& [_, existing] : out)
            if (existing == f) { seen = true; break; }
        if (!seen) out.emplace_back(c, f);
    }
    return out;
}

} // namespace dia
