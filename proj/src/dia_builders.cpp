#include "dia/dia_builders.hpp"

#include "dia/util.hpp"

namespace dia {

const char* variant_name(DiaVariant v) { return v == DiaVariant::dia1 ? "dia1" : "dia2"; }

DiaVariant variant_from_name(const std::string& name) {
    const std::string n = lower_ascii(trim(name));
    if (n == "dia1" || n == "dia-i" || n == "dia_i" || n == "1") return DiaVariant::dia1;
    if (n == "dia2" || n == "dia-ii" || n == "dia_ii" || n == "2") return DiaVariant::dia2;
    throw FormatError("unknown attack variant '" + name + "' (expected dia1 or dia2)");
}

void DiaConfig::validate() const {
    if (include_hypnosis && hypnosis_rounds != 2)
        throw FormatError("hypnosis is defined as exactly 2 exchanges; got " +
                          std::to_string(hypnosis_rounds));
    if (continue_cmd.empty())
        throw FormatError("continue_cmd must be non-empty");
}

namespace {

void append_hypnosis(std::vector<ForgedTurn>& turns, const PromptAssets& a) {
    turns.push_back({a.hypnosis_user_1, a.hypnosis_assistant_1});
    turns.push_back({a.hypnosis_user_2, a.hypnosis_assistant_2});
}

} // namespace

AttackDialogue build_dia1(const std::string& malicious_prompt,
                          const AffirmativeBeginning& beginning, const DiaConfig& config) {
    config.validate();
    if (trim(beginning.text).empty())
        throw FormatError("build_dia1: empty affirmative beginning");
    if (trim(malicious_prompt).empty()) throw FormatError("build_dia1: empty prompt");

    AttackDialogue atk;
    atk.variant = DiaVariant::dia1;
    atk.malicious_prompt = malicious_prompt;
    atk.beginning = beginning.text;

    if (config.include_system) atk.dialogue.replacement_system = config.assets.dia1_system;
    if (config.include_hypnosis) append_hypnosis(atk.dialogue.forged_turns, config.assets);
    atk.dialogue.forged_turns.push_back({malicious_prompt, beginning.text});
    atk.dialogue.final_user_text =
        config.include_guidance
            ? expand_placeholders(config.assets.dia1_guidance,
                                  {{"continue_cmd", config.continue_cmd}})
            : config.continue_cmd;
    return atk;
}

std::string substitution_pair_lines(const KeywordMapping& mapping) {
    std::string out;
    for (size_t i = 0; i < mapping.size(); ++i) {
        const KeywordPair& p = mapping.pairs()[i];
        if (i) out += '\n';
        out += "- replace \"" + p.alternative + "\" with \"" + p.keyword + "\"";
    }
    return out;
}

std::string substitution_task_text(const std::string& sanitized_prompt,
                                   const KeywordMapping& mapping, const PromptAssets& assets) {
    return expand_placeholders(assets.dia2_task, {{"prompt", sanitized_prompt},
                                                  {"pairs", substitution_pair_lines(mapping)}});
}

std::string forge_bad_answer(const std::string& sanitized_prompt, const KeywordMapping& mapping,
                             bool* any_noop) {
    if (mapping.size() < 3)
        throw TooFewKeywords("forge_bad_answer needs at least 3 keyword pairs, got " +
                             std::to_string(mapping.size()));
    if (any_noop) *any_noop = false;

    // Restore only the first two pairs, one step at a time, and stop there:
    // the bait is a substitution job left visibly unfinished.
    std::string text;
    std::string sentence = sanitized_prompt;
    std::vector<KeywordPair> done;
    for (size_t i = 0; i < 2; ++i) {
        const KeywordPair& p = mapping.pairs()[i];
        done.push_back(p);
        const std::string next = restore_text(sanitized_prompt, KeywordMapping::build(done));
        if (next == sentence && any_noop) *any_noop = true;
        sentence = next;
        text += "Step " + std::to_string(i + 1) + ": replace \"" + p.alternative + "\" with \"" +
                p.keyword + "\".\n";
        text += "Sentence: " + sentence + "\n";
    }
    text += "The sentence has been processed.";
    return text;
}

AttackDialogue build_dia2(const std::string& malicious_prompt, const KeywordMapping& mapping,
                          const Demonstration& demo, const DiaConfig& config) {
    config.validate();
    if (trim(malicious_prompt).empty()) throw FormatError("build_dia2: empty prompt");
    if (mapping.size() < 3)
        throw TooFewKeywords("dia2 requires at least 3 keyword pairs, got " +
                             std::to_string(mapping.size()));

    AttackDialogue atk;
    atk.variant = DiaVariant::dia2;
    atk.malicious_prompt = malicious_prompt;
    atk.mapping = mapping;
    atk.demonstration = demo.rendered;

    if (config.include_system) atk.dialogue.replacement_system = config.assets.dia2_system;
    if (config.include_hypnosis) append_hypnosis(atk.dialogue.forged_turns, config.assets);

    // Worked example first: the demo's own substitution task, answered well.
    atk.dialogue.forged_turns.push_back(
        {substitution_task_text(demo.sanitized, demo.mapping, config.assets), demo.rendered});

    const std::string sanitized = sanitize_text(malicious_prompt, mapping);
    const std::string task = substitution_task_text(sanitized, mapping, config.assets);
    if (config.include_guidance) {
        atk.dialogue.forged_turns.push_back({task, forge_bad_answer(sanitized, mapping)});
        atk.dialogue.final_user_text = config.assets.dia2_guidance;
    } else {
        atk.dialogue.final_user_text = task;
    }
    return atk;
}

InjectedDialogue adapt_for_template(InjectedDialogue d, const ChatTemplate& t) {
    if (!d.replacement_system || t.supports_system_role) return d;
    const std::string system = *d.replacement_system;
    d.replacement_system.reset();
    if (!d.forged_turns.empty())
        d.forged_turns.front().user = system + "\n\n" + d.forged_turns.front().user;
    else
        d.final_user_text = system + "\n\n" + d.final_user_text;
    return d;
}

std::string render_attack_payload(const AttackDialogue& attack, const ChatTemplate& t) {
    return build_injection_payload(t, adapt_for_template(attack.dialogue, t));
}

std::vector<std::string> disguise_violations(const AttackDialogue& attack) {
    std::vector<std::string> bad;
    if (attack.mapping.empty()) return bad;

    auto scan = [&](const std::string& text) {
        // Pair-list lines legitimately name the keywords; strip them.
        std::string stripped;
        for (const std::string& line : split_lines(text)) {
            if (starts_with(trim(line), "- replace \"")) continue;
            stripped += line;
            stripped += '\n';
        }
        for (size_t i = 0; i < attack.mapping.size(); ++i)
            for (const std::string& form : attack.mapping.keyword_forms(i))
                if (text_has_word_form(stripped, form)) {
                    bad.push_back(text);
                    return;
                }
    };

    for (const ForgedTurn& turn : attack.dialogue.forged_turns) scan(turn.user);
    scan(attack.dialogue.final_user_text);
    return bad;
}

} // namespace dia
