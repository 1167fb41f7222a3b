// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "watc/context.hpp"
#include "watc/errors.hpp"
#include "watc/pipeline/backend.hpp"
#include "watc/pipeline/prompt.hpp"
#include "watc/rename.hpp"
#include "watc/slicer.hpp"
#include "watc/text.hpp"
#include "watc/wat/parser.hpp"

namespace watc::pipeline {

inline constexpr const char* kStringPlaceholderPrefix = "STR_";

struct SnippetTranscript {
    std::string function;
    int block_id = 0;
    std::string prompt;
    std::string completion;  // raw backend text, empty on failure
    std::string filtered;    // after echo stripping and truncation
    std::size_t prompt_tokens = 0;
    bool ok = false;
    std::string error;
    double seconds = 0.0;    // stays 0 unless timing capture is enabled
};

struct DecompiledFunction {
    std::string name;
    int index = -1;
    std::string c_text;
    bool complete = true;
    std::vector<std::string> unresolved_blocks;
    std::vector<std::string> declaration_conflicts;
};

struct DecompiledUnit {
    std::vector<DecompiledFunction> functions;  // dependency order
    std::string c_text;                         // assembled translation unit
    std::size_t recovered_strings = 0;
    std::vector<long> unresolved_placeholders;
    std::vector<SnippetTranscript> transcripts;
    std::set<std::string> incomplete_functions;
};

struct DecompileOptions {
    std::size_t max_prompt_tokens = kDefaultMaxSequenceTokens;
    bool record_timings = false;  // off by default so reruns are byte-identical
    int parallel_functions = 1;
};

namespace detail {

/// Drops a leading echo of the prompt, then anything up to the last response
/// label line; models that echo their input produce both.
inline std::string strip_prompt_echo(const std::string& completion, const std::string& prompt) {
    std::string out = completion;
    if (!prompt.empty() && text::starts_with(out, prompt)) out = out.substr(prompt.size());
    auto lines = text::split_lines(out);
    std::size_t begin = 0;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (text::trim(lines[i]) == "[Response]") begin = i + 1;
    if (begin == 0) return out;
    std::vector<std::string> kept(lines.begin() + static_cast<long>(begin), lines.end());
    std::string joined = text::join_lines(kept);
    if (!joined.empty() && !out.empty() && out.back() == '\n') joined += '\n';
    return joined;
}

/// Keeps the completion up to the point where its brace depth first returns
/// to zero; anything after a completed top-level fragment is chatter. Label
/// lines like "[Instruction]" end the completion outright.
inline std::string truncate_after_snippet(const std::string& completion) {
    std::string out;
    int depth = 0;
    bool was_positive = false;
    bool in_str = false, in_chr = false, in_line = false, in_block = false;
    std::size_t i = 0;
    std::size_t line_start = 0;
    while (i < completion.size()) {
        char ch = completion[i];
        if (in_line) {
            if (ch == '\n') in_line = false;
        } else if (in_block) {
            if (ch == '*' && i + 1 < completion.size() && completion[i + 1] == '/') {
                in_block = false;
                ++i;
            }
        } else if (in_str) {
            if (ch == '\\') ++i;
            else if (ch == '"') in_str = false;
        } else if (in_chr) {
            if (ch == '\\') ++i;
            else if (ch == '\'') in_chr = false;
        } else if (ch == '/' && i + 1 < completion.size() && completion[i + 1] == '/') {
            in_line = true;
            ++i;
        } else if (ch == '/' && i + 1 < completion.size() && completion[i + 1] == '*') {
            in_block = true;
            ++i;
        } else if (ch == '"') {
            in_str = true;
        } else if (ch == '\'') {
            in_chr = true;
        } else if (ch == '{') {
            ++depth;
            was_positive = true;
        } else if (ch == '}') {
            --depth;
            if (was_positive && depth == 0) {
                std::size_t end = completion.find('\n', i);
                out = completion.substr(0, end == std::string::npos ? completion.size() : end);
                return text::rtrim(out) + "\n";
            }
        }
        if (ch == '\n') {
            std::string line = completion.substr(line_start, i - line_start);
            std::string trimmed = text::trim(line);
            if (!in_str && !in_chr && !in_block && trimmed.size() >= 2 && trimmed.front() == '[' &&
                trimmed.back() == ']' && !was_positive) {
                out = completion.substr(0, line_start);
                return text::rtrim(out) + "\n";
            }
            line_start = i + 1;
        }
        ++i;
    }
    return text::rtrim(completion) + "\n";
}

/// Removes later copies of byte-identical declaration lines at body depth
/// one; a name redeclared with different text is kept and reported.
inline std::string dedupe_declarations(const std::string& c_text,
                                       std::vector<std::string>* conflicts) {
    std::vector<std::string> kept;
    std::map<std::string, std::string> seen;  // variable name -> declaring line
    int depth = 0;
    for (const auto& line : text::split_lines(c_text)) {
        int depth_at_start = depth;
        for (char ch : line) {
            if (ch == '{') ++depth;
            else if (ch == '}') --depth;
        }
        std::string trimmed = text::trim(line);
        if (depth_at_start == 1 && !trimmed.empty() && trimmed.back() == ';' &&
            trimmed.find('(') == std::string::npos) {
            auto vars = extract_declared_vars(trimmed);
            if (!vars.empty()) {
                bool all_dup = true;
                for (const auto& v : vars) {
                    auto it = seen.find(v.name);
                    if (it == seen.end()) {
                        seen[v.name] = trimmed;
                        all_dup = false;
                    } else if (it->second != trimmed) {
                        if (conflicts) conflicts->push_back(v.name);
                        all_dup = false;
                    }
                }
                if (all_dup) continue;
            }
        }
        kept.push_back(line);
    }
    return text::join_lines(kept) + (c_text.empty() ? "" : "\n");
}

}  // namespace detail

/// Sends one prompt and normalizes the completion: echo stripped, trailing
/// chatter cut after the first balanced fragment.
inline std::string decompile_snippet(const PromptRecord& rec, Backend& backend) {
    CompletionRequest req;
    req.prompt = render_prompt(rec);
    req.snippet_text = rec.wat_snippet;
    req.function = rec.function;
    req.block_id = rec.block_id;
    std::string raw = backend.complete(req);
    std::string filtered = detail::truncate_after_snippet(detail::strip_prompt_echo(raw, req.prompt));
    if (text::trim(filtered).empty())
        throw EmptyCompletion(rec.function + "_" + std::to_string(rec.block_id));
    return filtered;
}

struct RecoveredText {
    std::string text;
    std::size_t replaced = 0;
    std::vector<long> unresolved;  // offsets with no known string
};

/// Substitutes `STR_{offset}` tokens with quoted literals from the data
/// segment map. Unknown offsets stay in place and are reported.
inline RecoveredText recover_strings(const std::string& c_text, const OffsetStringMap& strings) {
    RecoveredText result;
    std::map<std::string, std::string> cache;
    const std::string prefix = kStringPlaceholderPrefix;
    result.text = ::watc::detail::rewrite_identifiers(
        c_text, [&](const std::string& word) -> const std::string* {
            if (!text::starts_with(word, prefix) || word.size() == prefix.size()) return nullptr;
            std::string digits = word.substr(prefix.size());
            for (char ch : digits)
                if (!std::isdigit(static_cast<unsigned char>(ch))) return nullptr;
            long offset = std::stol(digits);
            auto it = strings.entries.find(offset);
            if (it == strings.entries.end()) {
                result.unresolved.push_back(offset);
                return nullptr;
            }
            auto [slot, inserted] = cache.emplace(word, text::c_string_literal(it->second));
            ++result.replaced;
            return &slot->second;
        });
    // A placeholder used twice reports its offset once.
    std::vector<long> unique;
    for (long off : result.unresolved)
        if (std::find(unique.begin(), unique.end(), off) == unique.end()) unique.push_back(off);
    result.unresolved = std::move(unique);
    return result;
}

namespace detail {

struct FunctionResult {
    DecompiledFunction fn;
    std::vector<SnippetTranscript> transcripts;
};

inline FunctionResult decompile_one_function(const SlicedFunction& sliced,
                                             const wat::WatModule& mod, Backend& backend,
                                             const DecompileOptions& opts) {
    FunctionResult result;
    result.fn.name = sliced.function;
    result.fn.index = sliced.index;

    const wat::WatFunction& wf = *mod.function_at(sliced.index);
    std::vector<VariableDef> params;
    for (std::size_t i = 0; i < wf.signature.params.size(); ++i)
        params.push_back({wf.param_names[i], wat::to_c_type(wf.signature.params[i]), ""});

    std::map<int, std::string> completions;
    std::vector<std::string> prior;  // completions in block-index order
    for (const Snippet& snippet : sliced.snippets) {
        SnippetTranscript t;
        t.function = snippet.function;
        t.block_id = snippet.block_id;
        auto started = std::chrono::steady_clock::now();
        try {
            ContextBundle ctx;
            ctx.defined_before = temporal_info(prior, params);
            ctx.callee_decls = spatial_info(snippet.text, mod);
            PromptRecord rec = synthesize_prompt(snippet, ctx, PromptMode::Inference,
                                                 std::nullopt, opts.max_prompt_tokens);
            t.prompt = render_prompt(rec);
            t.prompt_tokens = approx_token_count(t.prompt);
            std::string filtered = decompile_snippet(rec, backend);
            t.completion = filtered;
            t.filtered = filtered;
            t.ok = true;
            completions[snippet.block_id] = filtered;
            prior.push_back(filtered);
        } catch (const Error& e) {
            t.ok = false;
            t.error = e.what();
            result.fn.complete = false;
        }
        if (opts.record_timings) {
            auto ended = std::chrono::steady_clock::now();
            t.seconds = std::chrono::duration<double>(ended - started).count();
        }
        result.transcripts.push_back(std::move(t));
    }

    auto root = completions.find(0);
    if (root == completions.end()) {
        result.fn.c_text = "/* function " + result.fn.name + " could not be decompiled */\n";
        result.fn.complete = false;
        return result;
    }
    auto lookup = [&](const MarkerRef& ref) -> const std::string* {
        if (ref.function != sliced.function) return nullptr;
        auto it = completions.find(ref.block_id);
        return it == completions.end() ? nullptr : &it->second;
    };
    auto placeholder = [](const MarkerRef& ref) {
        return "/* unresolved block " + ref.key() + " */";
    };
    try {
        ExpandResult expanded = expand_markers(root->second, lookup, placeholder,
                                               MarkerRef{sliced.function, 0});
        for (const auto& ref : expanded.unresolved) {
            result.fn.unresolved_blocks.push_back(ref.key());
            result.fn.complete = false;
        }
        result.fn.c_text =
            dedupe_declarations(expanded.text, &result.fn.declaration_conflicts);
    } catch (const CyclicMarker& e) {
        result.fn.c_text = "/* function " + result.fn.name + " could not be decompiled */\n";
        result.fn.complete = false;
        result.fn.unresolved_blocks.push_back(e.block_id);
    }
    return result;
}

}  // namespace detail

/// Decompiles every defined function in dependency order and assembles one
/// translation unit. Snippet failures surface as placeholder comments and an
/// incomplete mark, never as silent gaps.
inline DecompiledUnit decompile_module(const wat::WatModule& mod, Backend& backend,
                                       const DecompileOptions& opts = {}) {
    DecompiledUnit unit;
    SlicedProgram program = slice_program(mod);
    OffsetStringMap strings = wat::extract_data_strings(mod);

    std::vector<detail::FunctionResult> results(program.functions.size());
    if (opts.parallel_functions > 1 && program.functions.size() > 1) {
        std::mutex queue_mutex;
        std::size_t next = 0;
        auto worker = [&]() {
            for (;;) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> hold(queue_mutex);
                    if (next >= program.functions.size()) return;
                    mine = next++;
                }
                results[mine] =
                    detail::decompile_one_function(program.functions[mine], mod, backend, opts);
            }
        };
        std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(opts.parallel_functions),
                                              program.functions.size());
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < program.functions.size(); ++i)
            results[i] = detail::decompile_one_function(program.functions[i], mod, backend, opts);
    }

    std::set<int> called_imports;
    for (const auto& fn : mod.functions)
        for (int callee : fn.callees)
            if (mod.is_import(callee)) called_imports.insert(callee);

    std::vector<std::string> pieces;
    for (int idx : called_imports)
        pieces.push_back(wat::signature_to_declaration(*mod.signature_of(idx)));
    if (!pieces.empty()) pieces.push_back("");

    for (auto& r : results) {
        RecoveredText recovered = recover_strings(r.fn.c_text, strings);
        r.fn.c_text = recovered.text;
        unit.recovered_strings += recovered.replaced;
        for (long off : recovered.unresolved)
            if (std::find(unit.unresolved_placeholders.begin(), unit.unresolved_placeholders.end(),
                          off) == unit.unresolved_placeholders.end())
                unit.unresolved_placeholders.push_back(off);
        if (!r.fn.complete) unit.incomplete_functions.insert(r.fn.name);
        pieces.push_back(text::rtrim(r.fn.c_text));
        pieces.push_back("");
        for (auto& t : r.transcripts) unit.transcripts.push_back(std::move(t));
        unit.functions.push_back(std::move(r.fn));
    }
    while (!pieces.empty() && pieces.back().empty()) pieces.pop_back();
    unit.c_text = pieces.empty() ? "" : text::join_lines(pieces) + "\n";
    return unit;
}

}  // namespace watc::pipeline
