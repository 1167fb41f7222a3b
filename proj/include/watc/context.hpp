// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <vector>

#include "watc/c/lexer.hpp"
#include "watc/errors.hpp"
#include "watc/text.hpp"
#include "watc/wat/lexer.hpp"
#include "watc/wat/module.hpp"

namespace watc {

/// One variable visible to later snippets of the same function.
struct VariableDef {
    std::string name;
    std::string type;      // "int", "char*", ...
    std::string suffix;    // array dimensions, e.g. "[16]"

    friend bool operator==(const VariableDef&, const VariableDef&) = default;
};

inline std::string render_declaration(const VariableDef& v) {
    return v.type + " " + v.name + v.suffix + ";";
}

/// Variables declared at statement level in a C fragment or full function:
/// parameters first (when a function header is present), then locals in
/// order of declaration, first occurrence of each name only. Works on bare
/// block fragments, so decompiled snippet bodies can be scanned directly.
inline std::vector<VariableDef> extract_declared_vars(const std::string& c_text) {
    std::vector<c::CTok> toks;
    try {
        toks = c::tokenize_c(c_text);
    } catch (const ParseError&) {
        return {};
    }
    std::vector<VariableDef> vars;
    std::set<std::string> seen;
    auto add = [&](const std::string& name, const std::string& type,
                   const std::string& suffix) {
        if (name.empty() || seen.count(name)) return;
        seen.insert(name);
        vars.push_back({name, type, suffix});
    };

    std::size_t i = 0;
    auto at = [&](std::size_t k) -> const c::CTok& {
        return toks[std::min(k, toks.size() - 1)];
    };
    bool stmt_start = true;
    while (at(i).kind != c::TokKind::Eof) {
        const c::CTok& t = at(i);
        if (t.kind == c::TokKind::Punct &&
            (t.text == ";" || t.text == "{" || t.text == "}" || t.text == "(" ||
             t.text == ",")) {
            stmt_start = true;
            ++i;
            continue;
        }
        bool type_head = t.kind == c::TokKind::Keyword && c::is_type_keyword(t.text) &&
                         t.text != "inline";
        if (!stmt_start || !type_head) {
            stmt_start = false;
            ++i;
            continue;
        }
        // Type specifier run.
        std::string type;
        while (at(i).kind == c::TokKind::Keyword && c::is_type_keyword(at(i).text)) {
            bool tagged =
                at(i).text == "struct" || at(i).text == "union" || at(i).text == "enum";
            if (!type.empty()) type += ' ';
            type += at(i).text;
            ++i;
            if (tagged && at(i).kind == c::TokKind::Ident) {
                type += ' ' + at(i).text;
                ++i;
            }
        }
        // Declarator list (or a function header, whose params are recorded).
        while (true) {
            std::string stars;
            while (at(i).kind == c::TokKind::Punct && at(i).text == "*") {
                stars += '*';
                ++i;
            }
            if (at(i).kind != c::TokKind::Ident) break;
            std::string name = at(i).text;
            ++i;
            if (at(i).kind == c::TokKind::Punct && at(i).text == "(") {
                // Function header: skip the parens; parameter declarations are
                // picked up by the main scan via the '(' statement boundary.
                break;
            }
            std::string suffix;
            while (at(i).kind == c::TokKind::Punct && at(i).text == "[") {
                suffix += '[';
                ++i;
                while (at(i).kind != c::TokKind::Eof &&
                       !(at(i).kind == c::TokKind::Punct && at(i).text == "]")) {
                    suffix += at(i).text;
                    ++i;
                }
                suffix += ']';
                ++i;
            }
            add(name, type + stars, suffix);
            // Skip initializer up to ',' or ';' at depth 0.
            int depth = 0;
            while (at(i).kind != c::TokKind::Eof) {
                const std::string& x = at(i).text;
                if (at(i).kind == c::TokKind::Punct) {
                    if (x == "(" || x == "[" || x == "{") ++depth;
                    if (x == ")" || x == "]" || x == "}") {
                        if (depth == 0) break;
                        --depth;
                    }
                    if (depth == 0 && (x == "," || x == ";")) break;
                }
                ++i;
            }
            if (at(i).kind == c::TokKind::Punct && at(i).text == ",") {
                const c::CTok& nx = at(i + 1);
                bool more_declarators =
                    nx.kind == c::TokKind::Ident ||
                    (nx.kind == c::TokKind::Punct && nx.text == "*");
                if (more_declarators) {
                    ++i;
                    continue;
                }
            }
            break;
        }
        stmt_start = false;
    }
    return vars;
}

/// C declarations of every function a wat snippet calls, in first-call order,
/// deduplicated. An indirect call through type t yields a synthetic
/// declaration named indirect_{t}. Unknown direct targets are an error.
inline std::vector<std::string> callee_declarations(const std::string& snippet_text,
                                                    const wat::WatModule& mod) {
    std::vector<wat::Token> toks;
    try {
        toks = wat::tokenize(snippet_text);
    } catch (const ParseError&) {
        return {};
    }
    std::vector<std::string> decls;
    std::set<std::string> seen;
    auto push = [&](const std::string& decl) {
        if (seen.insert(decl).second) decls.push_back(decl);
    };
    auto at = [&](std::size_t k) -> const wat::Token& {
        static wat::Token eof{wat::TokenKind::RParen, "", 0, 0};
        return k < toks.size() ? toks[k] : eof;
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != wat::TokenKind::Atom) continue;
        if (toks[i].text == "call") {
            if (at(i + 1).kind != wat::TokenKind::Atom) continue;
            const std::string& target = at(i + 1).text;
            const FunctionSignature* sig = nullptr;
            if (!target.empty() && target[0] == '$') {
                int index = mod.index_of(target.substr(1));
                if (index < 0) throw UnknownCallee(target);
                sig = mod.signature_of(index);
            } else {
                long v = 0;
                bool numeric = !target.empty();
                for (char ch : target)
                    if (ch < '0' || ch > '9') numeric = false;
                if (numeric) v = std::stol(target);
                sig = numeric ? mod.signature_of(static_cast<int>(v)) : nullptr;
                if (!sig) throw UnknownCallee(target);
            }
            push(wat::signature_to_declaration(*sig));
        } else if (toks[i].text == "call_indirect") {
            // Shape: call_indirect (type T) ...
            int type_index = -1;
            if (at(i + 1).kind == wat::TokenKind::LParen && at(i + 2).text == "type" &&
                at(i + 3).kind == wat::TokenKind::Atom) {
                const std::string& ref = at(i + 3).text;
                if (!ref.empty() && ref[0] == '$') {
                    auto it = mod.type_names.find(ref.substr(1));
                    if (it != mod.type_names.end()) type_index = it->second;
                } else {
                    bool numeric = !ref.empty();
                    for (char ch : ref)
                        if (ch < '0' || ch > '9') numeric = false;
                    if (numeric) type_index = static_cast<int>(std::stol(ref));
                }
            }
            if (type_index < 0 ||
                static_cast<std::size_t>(type_index) >= mod.types.size())
                throw UnknownCallee("call_indirect type");
            FunctionSignature sig = mod.types[static_cast<std::size_t>(type_index)];
            sig.name = "indirect_" + std::to_string(type_index);
            push(wat::signature_to_declaration(sig));
        }
    }
    return decls;
}

/// Everything a snippet prompt needs to know about its surroundings: which
/// variables earlier snippets of the function already declared, and the C
/// declarations of the functions it calls.
struct ContextBundle {
    std::vector<VariableDef> defined_before;
    std::vector<std::string> callee_decls;
};

/// Declarations of the snippet's call targets, one per distinct callee in
/// first-call order.
inline std::vector<std::string> spatial_info(const std::string& snippet_text,
                                             const wat::WatModule& mod) {
    return callee_declarations(snippet_text, mod);
}

/// Union of the function's parameters and every variable declared in the
/// prior snippets, in encounter order. Prior text that fails to scan simply
/// contributes nothing.
inline std::vector<VariableDef> temporal_info(const std::vector<std::string>& prior_c_snippets,
                                              const std::vector<VariableDef>& params) {
    std::vector<VariableDef> out;
    auto add = [&](const VariableDef& v) {
        for (const auto& have : out)
            if (have.name == v.name) return;
        out.push_back(v);
    };
    for (const auto& p : params) add(p);
    for (const auto& text_block : prior_c_snippets)
        for (const auto& v : extract_declared_vars(text_block)) add(v);
    return out;
}

}  // namespace watc
