#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dia {

// Inflection categories produced for every tracked word. Verb-ish and
// noun-ish categories are both generated because bases arrive untagged;
// duplicates collapse in all_forms().
enum class FormCategory {
    base,
    third_person, // -s form of a verb
    plural,       // -s form of a noun
    gerund,       // -ing
    past,         // -ed
    past_participle,
};

inline constexpr std::array<FormCategory, 6> kAllCategories = {
    FormCategory::base,   FormCategory::third_person, FormCategory::plural,
    FormCategory::gerund, FormCategory::past,         FormCategory::past_participle,
};

const char* category_name(FormCategory c);
std::optional<FormCategory> category_from_name(const std::string& name);

// Override row for words that escape the regular rules. Null fields fall
// back to the rules; `third` doubles as the noun plural unless `plural`
// is also set.
struct IrregularEntry {
    const char* base;
    const char* third;
    const char* plural;
    const char* gerund;
    const char* past;
    const char* participle;
};

// Bundled table (common irregular verbs, stress-doubling verbs, irregular
// noun plurals). Lookup by lowercase base; nullptr when the word is
// regular.
const IrregularEntry* find_irregular(const std::string& base_lower);
size_t irregular_table_size();

// Inflects a lowercase base word. Regular machinery:
//   -s:    +es after sibilants and after consonant+o, consonant+y -> -ies,
//          otherwise +s
//   -ing:  -ie -> -ying, silent-e drop (keeping -ee/-oe/-ye),
//          single-syllable consonant doubling
//   -ed:   +d after -e, consonant+y -> -ied, same doubling, else +ed
// with irregular-table overrides applied first. Unknown words simply take
// the regular rules; multi-word phrases inflect their final word.
std::string inflect(const std::string& base_lower, FormCategory category);

// All distinct forms of a base word in category order; the first category
// that produces a given string wins (so "borrows" reports as third_person
// even though the plural rule produces it too).
std::vector<std::pair<FormCategory, std::string>> all_forms(const std::string& base_lower);

} // namespace dia
