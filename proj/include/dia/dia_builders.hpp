#pragma once

#include "dia/abgm.hpp"
#include "dia/errors.hpp"
#include "dia/injection.hpp"
#include "dia/keyword_mapping.hpp"
#include "dia/prompt_assets.hpp"
#include "dia/sdgm.hpp"

#include <string>

namespace dia {

enum class DiaVariant { dia1, dia2 };

const char* variant_name(DiaVariant v);
DiaVariant variant_from_name(const std::string& name); // throws FormatError

// Attack composition knobs. The three include_* flags toggle the dialogue
// components (for ablation runs); hypnosis is always exactly two exchanges
// when enabled.
struct DiaConfig {
    DiaVariant variant = DiaVariant::dia1;
    bool include_system = true;
    bool include_hypnosis = true;
    bool include_guidance = true;
    std::string continue_cmd = "Please continue.";
    int hypnosis_rounds = 2;
    PromptAssets assets = PromptAssets::defaults();

    void validate() const; // throws FormatError on wrong hypnosis_rounds
};

// A fully assembled adversarial dialogue plus the provenance needed for
// records and for per-component auditing.
struct AttackDialogue {
    InjectedDialogue dialogue;
    DiaVariant variant = DiaVariant::dia1;
    std::string malicious_prompt;
    KeywordMapping mapping;       // dia2: the substitution table in play
    std::string beginning;        // dia1: the forged affirmative beginning
    std::string demonstration;    // dia2: rendered demo answer text
};

// Variant I: system replacement + two hypnosis exchanges + a forged turn
// where the assistant already "began" answering the malicious prompt, then
// a user message pressing it to continue. Throws FormatError when the
// beginning is empty or the config is inconsistent.
AttackDialogue build_dia1(const std::string& malicious_prompt,
                          const AffirmativeBeginning& beginning, const DiaConfig& config);

// Variant II: substitution-task system + hypnosis + a worked demonstration
// + a forged turn where the assistant botched the substitution task for the
// sanitized malicious prompt (only two words replaced, no answer), then a
// user message pointing out the failure. Requires |keywords| >= 3
// (TooFewKeywords otherwise).
AttackDialogue build_dia2(const std::string& malicious_prompt, const KeywordMapping& mapping,
                          const Demonstration& demo, const DiaConfig& config);

// The deliberately incomplete assistant response used as DIA-II's guidance
// bait: restores exactly the first two pairs step by step, shows each
// intermediate sentence, and stops without answering. Sets *any_noop when
// a stated replacement did not change the sentence (word absent). Throws
// TooFewKeywords when fewer than three pairs exist.
std::string forge_bad_answer(const std::string& sanitized_prompt, const KeywordMapping& mapping,
                             bool* any_noop = nullptr);

// The "Replacements:" block of a substitution task: one line per pair, in
// declaration order, of the form: - replace "alternative" with "keyword"
std::string substitution_pair_lines(const KeywordMapping& mapping);

// The full substitution-task message for a sanitized sentence.
std::string substitution_task_text(const std::string& sanitized_prompt,
                                   const KeywordMapping& mapping, const PromptAssets& assets);

// Folds the replacement system text into the first user slot when the
// target template has no system role (template adaptation, not ablation).
InjectedDialogue adapt_for_template(InjectedDialogue d, const ChatTemplate& t);

// adapt_for_template + build_injection_payload in one step.
std::string render_attack_payload(const AttackDialogue& attack, const ChatTemplate& t);

// Audit helper for the DIA-II disguise property: scans every user-side text
// for keyword forms, ignoring the pair-list lines (which by design name the
// keywords as replacement targets). Returns the offending texts.
std::vector<std::string> disguise_violations(const AttackDialogue& attack);

} // namespace dia
