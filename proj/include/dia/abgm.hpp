#pragma once

#include "dia/errors.hpp"
#include "dia/keyword_mapping.hpp"
#include "dia/prompt_assets.hpp"

#include <string>

namespace dia {

// One-shot text-in/text-out access to the auxiliary model that performs
// keyword extraction, benign completions, and prompt rewriting. Implemented
// by HTTP endpoints in production and by scripted mocks in tests.
class AuxiliaryClient {
  public:
    virtual ~AuxiliaryClient() = default;
    virtual std::string query(const std::string& instruction) = 0;
};

// The first sentence of a would-be compliant answer, with the sensitive
// keywords substituted back in. Forged into the assistant slot so the target
// believes it already started answering.
struct AffirmativeBeginning {
    std::string text;
    // True when the auxiliary response had no sentence boundary and the whole
    // response was used instead.
    bool whole_response = false;
};

// Asks the auxiliary to propose harmless stand-ins for the sensitive words
// of `prompt`, parsing "word -> replacement" lines (also accepts "=>",
// list bullets, and numbering). Malformed responses are retried up to
// `max_attempts` total queries. A response of "none" (or an empty line set
// that says so) yields an empty mapping.
KeywordMapping extract_keywords(AuxiliaryClient& aux, const std::string& prompt,
                                const PromptAssets& assets, int max_attempts = 3);

// Sends the sanitized prompt to the auxiliary verbatim, captures the first
// sentence of the completion (abbreviation-aware ./?/! boundary; whole
// response when none), and maps alternative forms back to keyword forms.
AffirmativeBeginning generate_beginning(AuxiliaryClient& aux, const KeywordMapping& mapping,
                                        const std::string& benign_prompt);

// Full pipeline for one prompt: extract -> sanitize -> complete -> restore.
struct BeginningResult {
    KeywordMapping mapping;
    std::string sanitized_prompt;
    AffirmativeBeginning beginning;
};
BeginningResult run_abgm(AuxiliaryClient& aux, const std::string& malicious_prompt,
                         const PromptAssets& assets);

// Serializes one generated beginning as a single JSON line
// {"prompt","keywords","alternatives","beginning"} for export.
std::string beginning_record_line(const std::string& prompt, const KeywordMapping& mapping,
                                  const AffirmativeBeginning& beginning);

// Case-insensitive scan for stock refusal phrasing ("I'm sorry", "I can't
// assist", ...). Used both to detect an uncooperative auxiliary and as the
// campaign's refusal heuristic.
bool contains_refusal_marker(const std::string& text);

// First-sentence splitter used by generate_beginning, exposed for tests.
// Returns the prefix of `text` through its first sentence-ending punctuation
// run, skipping known abbreviations and single-letter initials; empty when
// no boundary exists.
std::string first_sentence(const std::string& text);

} // namespace dia
