#pragma once

#include "dia/abgm.hpp"
#include "dia/errors.hpp"
#include "dia/keyword_mapping.hpp"
#include "dia/prompt_assets.hpp"
#include "dia/util.hpp"

#include <string>
#include <vector>

namespace dia {

enum class RewriteOp { add_reason, reorder, simplify };

const char* rewrite_op_name(RewriteOp op);

// An ordered batch of 1-3 distinct operations applied in one attempt.
struct RewriteStrategy {
    std::vector<RewriteOp> ops;
};

std::string strategy_to_string(const RewriteStrategy& s);

// Draws the batch size with probabilities 0.3 / 0.5 / 0.2 for sizes 1 / 2 / 3,
// then picks that many distinct operations in random order.
RewriteStrategy sample_strategy(Rng& rng);

// Fraction of mapping keywords that occur in `text` in any inflected form
// (word-boundary, case-insensitive). An empty mapping counts as fully
// retained (1.0).
double keyword_retention(const std::string& text, const KeywordMapping& mapping);

struct RewriteOutcome {
    std::string rewritten; // keywords restored
    double retention = 0.0;
    int attempts = 0;
    std::vector<RewriteStrategy> strategy_log;
    bool capped = false; // attempt cap hit; `rewritten` is the best candidate seen
};

// Rewrites a malicious prompt while keeping it answerable: each attempt
// starts over from the sanitized original, applies a freshly sampled
// strategy via the auxiliary model (which only ever sees the sanitized
// text and the alternative words), restores the keywords, and accepts the
// candidate once at least half the keywords survive. After `attempt_cap`
// failed attempts the best-retention candidate is returned with
// capped=true. Throws AuxRefusal on refusal and AuxParseFailure when no
// attempt yields any usable text.
RewriteOutcome rewrite_prompt(AuxiliaryClient& aux, const std::string& malicious_prompt,
                              const KeywordMapping& mapping, Rng& rng,
                              const PromptAssets& assets, int attempt_cap = 8);

} // namespace dia
