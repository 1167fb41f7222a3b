// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "watc/context.hpp"
#include "watc/errors.hpp"
#include "watc/slicer.hpp"
#include "watc/text.hpp"

namespace watc::pipeline {

enum class PromptMode { Inference, Finetune };

/// One assembled prompt: the fixed instruction, the per-snippet input
/// sections, and (for training records) the gold response.
struct PromptRecord {
    std::string instruction;
    std::vector<std::string> defined_vars;   // rendered declarations, Vb_n
    std::vector<std::string> callee_decls;   // d_n
    std::string wat_snippet;                 // w_n
    std::optional<std::string> response;     // c_n, finetune only
    PromptMode mode = PromptMode::Inference;
    std::string function;
    int block_id = 0;
};

/// The instruction is canonical for this toolkit and versioned through
/// config; changing it invalidates cached completions.
inline const std::string& instruction_text() {
    static const std::string text =
        "You are a wat2c model, translating WebAssembly text format snippets into C code.\n"
        "1. Translate the given wat snippet into the C code it was compiled from.\n"
        "2. The C code must be functionally equivalent to the wat snippet and easy to read.\n"
        "3. Lines of the form <<name_N>> mark nested blocks that are translated separately;"
        " copy each marker line into your output unchanged, in the place where the nested"
        " block's code belongs.\n"
        "4. Name each stack variable local_{offset}, where {offset} is its offset in the"
        " function's stack frame.\n";
    return text;
}

/// Crude but stable token count: maximal runs of identifier characters count
/// as one token each, every other non-space character is its own token.
inline std::size_t approx_token_count(const std::string& text_in) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text_in.size()) {
        char ch = text_in[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
            continue;
        }
        if (text::is_ident_char(ch)) {
            while (i < text_in.size() && text::is_ident_char(text_in[i])) ++i;
        } else {
            ++i;
        }
        ++count;
    }
    return count;
}

inline constexpr std::size_t kDefaultMaxSequenceTokens = 2048;

/// Renders the record in the fixed section order. The response label is
/// always present; the response body only in finetune mode.
inline std::string render_prompt(const PromptRecord& rec) {
    std::string out;
    out += "[Instruction]\n";
    out += rec.instruction;
    if (!rec.instruction.empty() && rec.instruction.back() != '\n') out += '\n';
    out += "[Input]\n";
    for (const auto& decl : rec.defined_vars) out += decl + "\n";
    for (const auto& decl : rec.callee_decls) out += decl + "\n";
    out += rec.wat_snippet;
    if (!rec.wat_snippet.empty() && rec.wat_snippet.back() != '\n') out += '\n';
    out += "[Response]\n";
    if (rec.mode == PromptMode::Finetune && rec.response) {
        out += *rec.response;
        if (!rec.response->empty() && rec.response->back() != '\n') out += '\n';
    }
    return out;
}

/// Builds the prompt for one snippet. The budget bounds the rendered text in
/// tokens; a too-long prompt is an error, not a truncation.
inline PromptRecord synthesize_prompt(const Snippet& snippet, const ContextBundle& ctx,
                                      PromptMode mode,
                                      std::optional<std::string> gold_response = std::nullopt,
                                      std::size_t max_tokens = kDefaultMaxSequenceTokens) {
    PromptRecord rec;
    rec.instruction = instruction_text();
    for (const auto& v : ctx.defined_before)
        rec.defined_vars.push_back(render_declaration(v));
    rec.callee_decls = ctx.callee_decls;
    rec.wat_snippet = snippet.text;
    rec.mode = mode;
    rec.function = snippet.function;
    rec.block_id = snippet.block_id;
    if (mode == PromptMode::Finetune) rec.response = std::move(gold_response);

    std::size_t measured = approx_token_count(render_prompt(rec));
    if (measured > max_tokens)
        throw PromptTooLong(measured, max_tokens);
    return rec;
}

}  // namespace watc::pipeline
