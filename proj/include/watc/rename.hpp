// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "watc/errors.hpp"
#include "watc/text.hpp"
#include "watc/wat/lexer.hpp"
#include "watc/wat/module.hpp"

namespace watc {

/// One source variable pinned to its stack-frame byte offset.
struct VarOffset {
    std::string name;
    long offset = 0;
    std::string type = "int";

    std::string canonical_name() const { return "local_" + std::to_string(offset); }
    friend bool operator==(const VarOffset&, const VarOffset&) = default;
};

struct FunctionOffsets {
    std::vector<VarOffset> vars;  // insertion order

    const VarOffset* find(const std::string& name) const {
        for (const auto& v : vars)
            if (v.name == name) return &v;
        return nullptr;
    }
};

struct VarOffsetMap {
    std::map<std::string, FunctionOffsets> functions;

    const FunctionOffsets* find(const std::string& function) const {
        auto it = functions.find(function);
        return it == functions.end() ? nullptr : &it->second;
    }
};

/// Parses the offset-map exchange format: one JSON object per line with
/// "function", "name", "offset" and optional "type". Within a function both
/// names and offsets must be unique.
inline VarOffsetMap parse_offset_map(const std::string& jsonl) {
    VarOffsetMap map;
    int line_no = 0;
    for (const auto& line : text::split_lines(jsonl)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object())
            throw FormatError("offset map line " + std::to_string(line_no) +
                              " is not a JSON object");
        if (!row.contains("function") || !row["function"].is_string() ||
            !row.contains("name") || !row["name"].is_string() || !row.contains("offset") ||
            !row["offset"].is_number_integer())
            throw FormatError("offset map line " + std::to_string(line_no) +
                              " needs string 'function', string 'name', integer 'offset'");
        VarOffset v;
        v.name = row["name"].get<std::string>();
        v.offset = row["offset"].get<long>();
        if (row.contains("type")) {
            if (!row["type"].is_string())
                throw FormatError("offset map line " + std::to_string(line_no) +
                                  ": 'type' must be a string");
            v.type = row["type"].get<std::string>();
        }
        std::string function = row["function"].get<std::string>();
        FunctionOffsets& fo = map.functions[function];
        for (const auto& existing : fo.vars) {
            if (existing.name == v.name)
                throw FormatError("offset map repeats variable '" + v.name +
                                  "' in function '" + function + "'");
            if (existing.offset == v.offset) throw DuplicateOffset(function, v.offset);
        }
        fo.vars.push_back(std::move(v));
    }
    return map;
}

namespace detail {

enum class AbsKind { Unknown, StackRaw, Frame, Const };

struct AbsVal {
    AbsKind kind = AbsKind::Unknown;
    long v = 0;
};

inline std::string mem_op_type(const std::string& op) {
    bool narrow8 = op.find("8") != std::string::npos;
    bool narrow16 = op.find("16") != std::string::npos;
    if (text::starts_with(op, "f32.")) return "float";
    if (text::starts_with(op, "f64.")) return "double";
    if (narrow8) return "char";
    if (narrow16) return "short";
    if (text::starts_with(op, "i64.")) return "long long";
    return "int";
}

inline bool is_control_op(const std::string& op) {
    static const std::set<std::string> ops = {
        "block", "loop",  "end",    "if",            "else",       "br",  "br_if",
        "br_table", "return", "call", "call_indirect", "unreachable", "select"};
    return ops.count(op) > 0;
}

}  // namespace detail

/// Recovers candidate stack-frame offsets by abstract interpretation of the
/// flat instruction stream: the value chain rooted at the stack pointer is
/// tracked through const/add/sub/local traffic, and every load or store whose
/// address is frame-relative records that slot. Each distinct offset becomes
/// one variable named local_{offset}, typed by the access width.
inline std::vector<VarOffset> infer_offsets_from_wat(const WatFunction& fn) {
    using detail::AbsKind;
    using detail::AbsVal;

    std::vector<wat::Token> toks;
    try {
        toks = wat::tokenize(text::join_lines(fn.body_lines));
    } catch (const ParseError&) {
        return {};
    }

    std::map<long, std::string> found;  // offset -> type, first access wins
    std::vector<AbsVal> stack;
    std::map<std::string, AbsVal> locals;

    auto atom = [&](std::size_t k) -> std::string {
        return k < toks.size() && toks[k].kind == wat::TokenKind::Atom ? toks[k].text
                                                                       : std::string();
    };
    auto pop = [&]() {
        AbsVal v = stack.empty() ? AbsVal{} : stack.back();
        if (!stack.empty()) stack.pop_back();
        return v;
    };
    auto attr_offset = [&](std::size_t k) {
        long off = 0;
        for (std::size_t j = k; j < std::min(k + 2, toks.size()); ++j) {
            const std::string& t = atom(j);
            if (text::starts_with(t, "offset=")) off = std::stol(t.substr(7));
        }
        return off;
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != wat::TokenKind::Atom) continue;
        const std::string& op = toks[i].text;
        if (op == "global.get") {
            const std::string g = atom(i + 1);
            bool sp = g.find("stack_pointer") != std::string::npos || g == "$sp" || g == "0";
            stack.push_back({sp ? AbsKind::StackRaw : AbsKind::Unknown, 0});
            ++i;
        } else if (op == "global.set") {
            pop();
            ++i;
        } else if (op == "i32.const") {
            const std::string n = atom(i + 1);
            long v = 0;
            bool ok = !n.empty();
            for (char ch : n) {
                if (ch == '-' || (ch >= '0' && ch <= '9')) continue;
                ok = false;
            }
            if (ok) v = std::stol(n);
            stack.push_back({ok ? AbsKind::Const : AbsKind::Unknown, v});
            ++i;
        } else if (op == "i32.sub") {
            AbsVal b = pop(), a = pop();
            if (a.kind == AbsKind::StackRaw && b.kind == AbsKind::Const)
                stack.push_back({AbsKind::StackRaw, 0});
            else if (a.kind == AbsKind::Const && b.kind == AbsKind::Const)
                stack.push_back({AbsKind::Const, a.v - b.v});
            else
                stack.push_back({AbsKind::Unknown, 0});
        } else if (op == "i32.add") {
            AbsVal b = pop(), a = pop();
            if (a.kind == AbsKind::Frame && b.kind == AbsKind::Const)
                stack.push_back({AbsKind::Frame, a.v + b.v});
            else if (a.kind == AbsKind::Const && b.kind == AbsKind::Frame)
                stack.push_back({AbsKind::Frame, a.v + b.v});
            else if (a.kind == AbsKind::Const && b.kind == AbsKind::Const)
                stack.push_back({AbsKind::Const, a.v + b.v});
            else
                stack.push_back({AbsKind::Unknown, 0});
        } else if (op == "local.set" || op == "local.tee") {
            AbsVal v = pop();
            if (v.kind == AbsKind::StackRaw) v = {AbsKind::Frame, 0};
            locals[atom(i + 1)] = v;
            if (op == "local.tee") stack.push_back(v);
            ++i;
        } else if (op == "local.get") {
            auto it = locals.find(atom(i + 1));
            stack.push_back(it == locals.end() ? AbsVal{} : it->second);
            ++i;
        } else if (op.find(".load") != std::string::npos) {
            AbsVal addr = pop();
            long off = attr_offset(i + 1);
            if (addr.kind == AbsKind::Frame) {
                long slot = addr.v + off;
                if (slot >= 0 && slot < 65536 && !found.count(slot))
                    found[slot] = detail::mem_op_type(op);
            }
            stack.push_back({AbsKind::Unknown, 0});
        } else if (op.find(".store") != std::string::npos) {
            pop();  // value
            AbsVal addr = pop();
            long off = attr_offset(i + 1);
            if (addr.kind == AbsKind::Frame) {
                long slot = addr.v + off;
                if (slot >= 0 && slot < 65536 && !found.count(slot))
                    found[slot] = detail::mem_op_type(op);
            }
        } else if (op == "drop") {
            pop();
        } else if (detail::is_control_op(op) || op.find('.') != std::string::npos) {
            stack.clear();
        }
    }

    std::vector<VarOffset> out;
    for (const auto& [offset, type] : found)
        out.push_back({"local_" + std::to_string(offset), offset, type});
    return out;
}

namespace detail {

/// Applies identifier renames outside comments, strings and char literals.
template <typename Fn>
inline std::string rewrite_identifiers(const std::string& src, Fn&& rename_of) {
    std::string out;
    out.reserve(src.size());
    std::size_t i = 0;
    while (i < src.size()) {
        char ch = src[i];
        if (ch == '/' && i + 1 < src.size() && (src[i + 1] == '/' || src[i + 1] == '*')) {
            bool block = src[i + 1] == '*';
            std::size_t end = i + 2;
            if (block) {
                while (end + 1 < src.size() && !(src[end] == '*' && src[end + 1] == '/')) ++end;
                end = std::min(end + 2, src.size());
            } else {
                while (end < src.size() && src[end] != '\n') ++end;
            }
            out.append(src, i, end - i);
            i = end;
            continue;
        }
        if (ch == '"' || ch == '\'') {
            char quote = ch;
            std::size_t end = i + 1;
            while (end < src.size()) {
                if (src[end] == '\\') {
                    end += 2;
                    continue;
                }
                if (src[end] == quote || src[end] == '\n') {
                    ++end;
                    break;
                }
                ++end;
            }
            end = std::min(end, src.size());
            out.append(src, i, end - i);
            i = end;
            continue;
        }
        if (text::is_ident_start(ch)) {
            std::size_t end = i + 1;
            while (end < src.size() && text::is_ident_char(src[end])) ++end;
            std::string word = src.substr(i, end - i);
            if (const std::string* repl = rename_of(word))
                out += *repl;
            else
                out += word;
            i = end;
            continue;
        }
        out += ch;
        ++i;
    }
    return out;
}

inline bool has_identifier(const std::string& src, const std::string& name) {
    bool found = false;
    rewrite_identifiers(src, [&](const std::string& word) -> const std::string* {
        if (word == name) found = true;
        return nullptr;
    });
    return found;
}

}  // namespace detail

/// Renames every mapped variable of one function's C text to its canonical
/// local_{offset} form. Raises UnmappedCollision if a target name is already
/// taken by a different identifier that is still present; applying the same
/// rename twice is a no-op.
inline std::string rename_c_source(const std::string& c_text, const FunctionOffsets& offsets) {
    std::map<std::string, std::string> renames;
    for (const auto& v : offsets.vars) {
        std::string target = v.canonical_name();
        if (v.name == target) continue;
        if (detail::has_identifier(c_text, v.name) && detail::has_identifier(c_text, target))
            throw UnmappedCollision(target);
        renames[v.name] = target;
    }
    return detail::rewrite_identifiers(c_text, [&](const std::string& word) {
        auto it = renames.find(word);
        return it == renames.end() ? nullptr : &it->second;
    });
}

}  // namespace watc
