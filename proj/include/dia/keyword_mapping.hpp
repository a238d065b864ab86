#pragma once

#include "dia/errors.hpp"
#include "dia/morphology.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dia {

// One sensitive word (or phrase) and the harmless stand-in that replaces
// it. Pairs are stored lowercase; surface casing is reproduced at
// substitution time.
struct KeywordPair {
    std::string keyword;
    std::string alternative;
};

// A bijective keyword/alternative table augmented with the inflected forms
// of both sides, paired category by category (stole <-> borrowed, bombs <->
// toys, ...). Substitution in either direction is word-by-word, so texts
// that only ever mention inflections still round-trip.
class KeywordMapping {
  public:
    KeywordMapping() = default;

    // Validates and augments. Requirements: non-empty words, keywords
    // pairwise distinct, alternatives pairwise distinct, and no alternative
    // equal to any keyword (all case-insensitive). Throws FormatError.
    static KeywordMapping build(std::vector<KeywordPair> pairs);

    const std::vector<KeywordPair>& pairs() const { return pairs_; }
    size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    // Lowercase form lookups. forward: keyword form -> alternative form;
    // inverse: alternative form -> keyword form. When two entries generate
    // the same surface form the earliest declared pair (and earliest
    // category) wins; genuine conflicts are recorded in ambiguity_log.
    std::optional<std::string> forward_lookup(const std::string& word_lower) const;
    std::optional<std::string> inverse_lookup(const std::string& word_lower) const;

    // Every augmented form of pair `i`'s keyword (resp. alternative),
    // lowercase, deduped; used for retention scans.
    std::vector<std::string> keyword_forms(size_t i) const;
    std::vector<std::string> alternative_forms(size_t i) const;

    const std::vector<std::string>& ambiguity_log() const { return ambiguity_log_; }

    // Longest phrase length (in words) among keywords / alternatives.
    size_t max_keyword_words() const { return max_keyword_words_; }
    size_t max_alternative_words() const { return max_alternative_words_; }

  private:
    friend std::string sanitize_text(const std::string&, const KeywordMapping&);
    friend std::string restore_text(const std::string&, const KeywordMapping&);

    std::vector<KeywordPair> pairs_;
    std::unordered_map<std::string, std::string> forward_;
    std::unordered_map<std::string, std::string> inverse_;
    std::vector<std::string> ambiguity_log_;
    size_t max_keyword_words_ = 1;
    size_t max_alternative_words_ = 1;
};

// Replaces every keyword form in `text` with its paired alternative form
// (keeping Title/UPPER/lower casing of the original word), leaving all
// punctuation and spacing untouched. Multi-word phrases match when their
// words are separated by single spaces.
std::string sanitize_text(const std::string& text, const KeywordMapping& mapping);

// The inverse substitution: alternative forms back to keyword forms.
std::string restore_text(const std::string& text, const KeywordMapping& mapping);

// True when `form` (a lowercase word or single-space phrase) occurs in
// `text` on word boundaries, case-insensitively.
bool text_has_word_form(const std::string& text, const std::string& form);

} // namespace dia
