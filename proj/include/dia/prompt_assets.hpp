#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace dia {

// Instruction wording used by the auxiliary-model calls and the forged
// dialogues. Every text ships with a built-in default and can be overridden
// by a same-named .txt file in an asset directory, so operators can tune
// wording without rebuilding. Placeholders use {name} syntax.
struct PromptAssets {
    std::string extract_instruction; // {prompt}
    std::string dia1_system;
    std::string hypnosis_user_1;
    std::string hypnosis_assistant_1;
    std::string hypnosis_user_2;
    std::string hypnosis_assistant_2;
    std::string dia1_guidance; // {continue_cmd}
    std::string dia2_system;
    std::string dia2_task; // {prompt}, {pairs}
    std::string dia2_guidance;
    std::string rewrite_add_reason; // {prompt}, {words}
    std::string rewrite_reorder;    // {prompt}, {words}
    std::string rewrite_simplify;   // {prompt}, {words}

    bool operator==(const PromptAssets&) const = default;

    static PromptAssets defaults();

    // Starts from defaults and overrides each field whose file
    // <dir>/prompts/<name>.txt exists. One trailing newline is stripped on
    // read (save() adds it back), so files stay editor-friendly while
    // round-tripping byte-exactly.
    static PromptAssets load(const std::string& asset_dir);

    // Writes every field to <dir>/prompts/<name>.txt.
    void save(const std::string& asset_dir) const;
};

// Replaces each "{key}" occurrence; unknown braces are left untouched.
std::string expand_placeholders(
    std::string text,
    std::initializer_list<std::pair<std::string_view, std::string_view>> values);

} // namespace dia
