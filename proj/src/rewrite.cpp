#include "dia/rewrite.hpp"

namespace dia {

const char* rewrite_op_name(RewriteOp op) {
    switch (op) {
    case RewriteOp::add_reason: return "addReason";
    case RewriteOp::reorder: return "reorder";
    case RewriteOp::simplify: return "simplify";
    }
    return "?";
}

std::string strategy_to_string(const RewriteStrategy& s) {
    std::string out;
    for (size_t i = 0; i < s.ops.size(); ++i) {
        if (i) out += '+';
        out += rewrite_op_name(s.ops[i]);
    }
    return out;
}

RewriteStrategy sample_strategy(Rng& rng) {
    const double u = rng.next_double();
    const size_t size = u < 0.3 ? 1 : (u < 0.8 ? 2 : 3);
    std::vector<RewriteOp> ops = {RewriteOp::add_reason, RewriteOp::reorder, RewriteOp::simplify};
    rng.shuffle(ops); // shuffle-then-truncate = draw without replacement, in order
    ops.resize(size);
    return {std::move(ops)};
}

double keyword_retention(const std::string& text, const KeywordMapping& mapping) {
    if (mapping.empty()) return 1.0;
    size_t kept = 0;
    for (size_t i = 0; i < mapping.size(); ++i) {
        for (const std::string& form : mapping.keyword_forms(i)) {
            if (text_has_word_form(text, form)) {
                ++kept;
                break;
            }
        }
    }
    return static_cast<double>(kept) / static_cast<double>(mapping.size());
}

namespace {

const std::string& op_asset(RewriteOp op, const PromptAssets& assets) {
    switch (op) {
    case RewriteOp::add_reason: return assets.rewrite_add_reason;
    case RewriteOp::reorder: return assets.rewrite_reorder;
    case RewriteOp::simplify: return assets.rewrite_simplify;
    }
    return assets.rewrite_add_reason;
}

std::string alternatives_list(const KeywordMapping& mapping) {
    std::string out;
    for (size_t i = 0; i < mapping.size(); ++i) {
        if (i) out += ", ";
        out += mapping.pairs()[i].alternative;
    }
    return out;
}

} // namespace

RewriteOutcome rewrite_prompt(AuxiliaryClient& aux, const std::string& malicious_prompt,
                              const KeywordMapping& mapping, Rng& rng,
                              const PromptAssets& assets, int attempt_cap) {
    if (attempt_cap < 1) attempt_cap = 1;
    const std::string sanitized_original = sanitize_text(malicious_prompt, mapping);
    const std::string words = alternatives_list(mapping);

    RewriteOutcome best;
    best.retention = -1.0;
    bool any_candidate = false;
    std::string last_problem = "auxiliary produced no usable rewrite";

    RewriteOutcome out;
    for (int attempt = 1; attempt <= attempt_cap; ++attempt) {
        out.attempts = attempt;
        const RewriteStrategy strategy = sample_strategy(rng);
        out.strategy_log.push_back(strategy);

        // Every attempt restarts from the sanitized original so one bad
        // rewrite cannot poison all later attempts.
        std::string text = sanitized_original;
        bool aborted = false;
        for (RewriteOp op : strategy.ops) {
            const std::string instruction = expand_placeholders(
                op_asset(op, assets), {{"prompt", text}, {"words", words}});
            const std::string response = trim(aux.query(instruction));
            if (contains_refusal_marker(response))
                throw AuxRefusal("auxiliary declined rewrite op " +
                                 std::string(rewrite_op_name(op)));
            if (response.empty()) {
                last_problem = std::string("empty response to op ") + rewrite_op_name(op);
                aborted = true;
                break;
            }
            text = response;
        }
        if (aborted) continue;

        any_candidate = true;
        const std::string candidate = restore_text(text, mapping);
        const double retention = keyword_retention(candidate, mapping);
        if (retention > best.retention) {
            best.rewritten = candidate;
            best.retention = retention;
        }
        if (retention >= 0.5) {
            out.rewritten = candidate;
            out.retention = retention;
            out.capped = false;
            return out;
        }
    }

    if (!any_candidate)
        throw AuxParseFailure("rewrite_prompt: no attempt produced text (" + last_problem + ")");
    out.rewritten = best.rewritten;
    out.retention = best.retention;
    out.capped = true;
    return out;
}

} // namespace dia
