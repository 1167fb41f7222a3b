// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "watc/errors.hpp"
#include "watc/text.hpp"
#include "watc/wat/lexer.hpp"
#include "watc/wat/module.hpp"

namespace watc::wat {

struct SExpr {
    bool is_list = false;
    Token token;                       // when atom or string
    std::vector<SExpr> items;          // when list
    int start_line = 0;
    int end_line = 0;

    bool is_atom() const { return !is_list && token.kind == TokenKind::Atom; }
    bool is_string() const { return !is_list && token.kind == TokenKind::String; }

    const std::string* head() const {
        if (!is_list || items.empty() || !items.front().is_atom()) return nullptr;
        return &items.front().token.text;
    }
};

namespace detail {

inline SExpr parse_sexpr(const std::vector<Token>& tokens, std::size_t& pos) {
    const Token& t = tokens[pos];
    if (t.kind == TokenKind::RParen) throw ParseError("unexpected ')'", t.line, t.col);
    if (t.kind != TokenKind::LParen) {
        SExpr atom;
        atom.token = t;
        atom.start_line = atom.end_line = t.line;
        ++pos;
        return atom;
    }
    SExpr list;
    list.is_list = true;
    list.start_line = t.line;
    ++pos;
    while (true) {
        if (pos >= tokens.size())
            throw ParseError("unterminated list opened", t.line, t.col);
        if (tokens[pos].kind == TokenKind::RParen) {
            list.end_line = tokens[pos].line;
            ++pos;
            return list;
        }
        list.items.push_back(parse_sexpr(tokens, pos));
    }
}

inline bool parse_int(std::string_view s, long& out) {
    if (s.empty()) return false;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i >= s.size()) return false;
    long v = 0;
    if (i + 1 < s.size() && s[i] == '0' && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
        for (i += 2; i < s.size(); ++i) {
            char c = s[i];
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else if (c == '_') continue;
            else return false;
            v = v * 16 + d;
        }
    } else {
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (c == '_') continue;
            if (c < '0' || c > '9') return false;
            v = v * 10 + (c - '0');
        }
    }
    out = neg ? -v : v;
    return true;
}

inline std::optional<ValueType> value_type_of(std::string_view s) {
    if (s == "i32") return ValueType::I32;
    if (s == "i64") return ValueType::I64;
    if (s == "f32") return ValueType::F32;
    if (s == "f64") return ValueType::F64;
    return std::nullopt;
}

// Instructions outside the supported grammar subset (MVP + what Emscripten
// emits at -O0). Matching is on atom spelling, so string contents never trip it.
inline void check_supported(const Token& t) {
    const std::string& a = t.text;
    static const char* prefixes[] = {"v128", "i8x16", "i16x8", "i32x4", "i64x2", "f32x4",
                                     "f64x2", "return_call", "memory.atomic", "try_table"};
    for (const char* p : prefixes) {
        if (text::starts_with(a, p)) throw UnsupportedConstruct(a, t.line);
    }
    if (a.find(".atomic") != std::string::npos) throw UnsupportedConstruct(a, t.line);
    static const char* exact[] = {"shared", "try", "catch", "catch_all", "throw", "rethrow",
                                  "delegate", "memory.init", "data.drop"};
    for (const char* e : exact) {
        if (a == e) throw UnsupportedConstruct(a, t.line);
    }
}

inline void check_supported_deep(const SExpr& e) {
    if (e.is_atom()) {
        check_supported(e.token);
        return;
    }
    if (e.is_list) {
        for (const auto& item : e.items) check_supported_deep(item);
    }
}

struct NameTable {
    std::map<std::string, int> func_index;   // "$name" minus '$' -> function-space index
    std::map<std::string, int> type_index;   // type names -> type table index
};

inline int resolve_func_ref(const SExpr& ref, const NameTable& names, std::size_t space_size) {
    if (!ref.is_atom())
        throw ParseError("expected function reference", ref.start_line, 0);
    const std::string& s = ref.token.text;
    if (!s.empty() && s[0] == '$') {
        auto it = names.func_index.find(s.substr(1));
        if (it == names.func_index.end())
            throw ParseError("unknown function '" + s + "'", ref.token.line, ref.token.col);
        return it->second;
    }
    long idx;
    if (!parse_int(s, idx) || idx < 0 || static_cast<std::size_t>(idx) >= space_size)
        throw ParseError("call target '" + s + "' does not resolve", ref.token.line,
                         ref.token.col);
    return static_cast<int>(idx);
}

inline int resolve_type_ref(const SExpr& ref, const NameTable& names, std::size_t type_count) {
    if (!ref.is_atom()) throw ParseError("expected type index", ref.start_line, 0);
    const std::string& s = ref.token.text;
    if (!s.empty() && s[0] == '$') {
        auto it = names.type_index.find(s.substr(1));
        if (it == names.type_index.end())
            throw ParseError("unknown type '" + s + "'", ref.token.line, ref.token.col);
        return it->second;
    }
    long idx;
    if (!parse_int(s, idx) || idx < 0 || static_cast<std::size_t>(idx) >= type_count)
        throw ParseError("type index '" + s + "' does not resolve", ref.token.line, ref.token.col);
    return static_cast<int>(idx);
}

// Reads (type t)? (param ...)* (result ...)* starting at items[i]. Inline
// params/results win over the referenced type when both are present.
inline FunctionSignature parse_typeuse(const std::vector<SExpr>& items, std::size_t& i,
                                       const NameTable& names,
                                       const std::vector<FunctionSignature>& types,
                                       std::vector<std::string>* param_names) {
    FunctionSignature sig;
    bool saw_inline = false;
    std::optional<int> type_ref;
    for (; i < items.size(); ++i) {
        const SExpr& e = items[i];
        const std::string* h = e.head();
        if (!h) break;
        if (*h == "type" && e.items.size() >= 2) {
            type_ref = resolve_type_ref(e.items[1], names, types.size());
        } else if (*h == "param") {
            saw_inline = true;
            if (e.items.size() >= 3 && e.items[1].is_atom() && e.items[1].token.text[0] == '$') {
                auto vt = value_type_of(e.items[2].token.text);
                if (!vt)
                    throw ParseError("bad value type", e.items[2].token.line,
                                     e.items[2].token.col);
                sig.params.push_back(*vt);
                if (param_names) param_names->push_back(e.items[1].token.text.substr(1));
            } else {
                for (std::size_t k = 1; k < e.items.size(); ++k) {
                    auto vt = value_type_of(e.items[k].token.text);
                    if (!vt)
                        throw ParseError("bad value type", e.items[k].token.line,
                                         e.items[k].token.col);
                    sig.params.push_back(*vt);
                    if (param_names)
                        param_names->push_back("p" + std::to_string(param_names->size()));
                }
            }
        } else if (*h == "result") {
            saw_inline = true;
            for (std::size_t k = 1; k < e.items.size(); ++k) {
                auto vt = value_type_of(e.items[k].token.text);
                if (!vt)
                    throw ParseError("bad value type", e.items[k].token.line,
                                     e.items[k].token.col);
                sig.results.push_back(*vt);
            }
        } else {
            break;
        }
    }
    if (!saw_inline && type_ref) {
        sig.params = types[static_cast<std::size_t>(*type_ref)].params;
        sig.results = types[static_cast<std::size_t>(*type_ref)].results;
        if (param_names)
            for (std::size_t k = 0; k < sig.params.size(); ++k)
                param_names->push_back("p" + std::to_string(k));
    }
    return sig;
}

// Collects loop line extents from a function form, handling both the flat
// (loop ... end) and the folded ((loop ...)) spellings, which may be mixed.
inline void collect_loops(const SExpr& list, std::vector<LoopExtent>& out, int body_first_line) {
    struct Open {
        bool is_loop;
        int line;
        Token tok;
    };
    std::vector<Open> stack;
    // items[0] of a folded form is the form's own name, not a flat opcode.
    std::size_t first = !list.items.empty() && list.items[0].is_atom() ? 1 : 0;
    for (std::size_t item_index = first; item_index < list.items.size(); ++item_index) {
        const SExpr& item = list.items[item_index];
        if (item.is_atom()) {
            const std::string& a = item.token.text;
            if (a == "block" || a == "if") {
                stack.push_back({false, item.token.line, item.token});
            } else if (a == "loop") {
                stack.push_back({true, item.token.line, item.token});
            } else if (a == "end") {
                if (stack.empty())
                    throw ParseError("unmatched 'end'", item.token.line, item.token.col);
                Open open = stack.back();
                stack.pop_back();
                if (open.is_loop)
                    out.push_back({open.line - body_first_line, item.token.line - body_first_line});
            }
        } else if (item.is_list) {
            const std::string* h = item.head();
            if (h && *h == "loop")
                out.push_back(
                    {item.start_line - body_first_line, item.end_line - body_first_line});
            collect_loops(item, out, body_first_line);
        }
    }
    if (!stack.empty())
        throw ParseError("unterminated '" + std::string(stack.back().is_loop ? "loop" : "block") +
                             "'",
                         stack.back().tok.line, stack.back().tok.col);
}

inline void collect_callees(const SExpr& list, const NameTable& names, std::size_t space_size,
                            std::set<int>& out) {
    const std::string* h = list.head();
    if (h && *h == "call" && list.items.size() >= 2)
        out.insert(resolve_func_ref(list.items[1], names, space_size));
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        const SExpr& item = list.items[i];
        if (item.is_atom() && item.token.text == "call" && i + 1 < list.items.size() &&
            list.items[i + 1].is_atom()) {
            out.insert(resolve_func_ref(list.items[i + 1], names, space_size));
        } else if (item.is_list) {
            collect_callees(item, names, space_size, out);
        }
    }
}

inline bool is_func_import(const SExpr& func_form) {
    for (const auto& item : func_form.items) {
        const std::string* h = item.head();
        if (h && *h == "import") return true;
    }
    return false;
}

}  // namespace detail

/// Parses wat text into the structural module model. Accepts the flat and
/// folded dialects as emitted by the standard converters, normalizing both
/// into the same WatModule.
inline WatModule parse_module(const std::string& wat_text) {
    using namespace detail;

    std::vector<Token> tokens = tokenize(wat_text);
    if (tokens.empty()) throw ParseError("empty input", 0, 0);
    std::size_t pos = 0;
    SExpr top = parse_sexpr(tokens, pos);
    if (pos < tokens.size())
        throw ParseError("trailing content after module", tokens[pos].line, tokens[pos].col);
    const std::string* top_head = top.head();
    if (!top_head || *top_head != "module")
        throw ParseError("expected (module ...)", top.start_line, 0);

    std::vector<std::string> source_lines = text::split_lines(wat_text);
    WatModule mod;
    NameTable names;

    // Pass 0: the type table.
    for (const auto& form : top.items) {
        const std::string* h = form.head();
        if (!h || *h != "type") continue;
        std::size_t i = 1;
        std::string type_name;
        if (i < form.items.size() && form.items[i].is_atom() &&
            form.items[i].token.text[0] == '$') {
            type_name = form.items[i].token.text.substr(1);
            ++i;
        }
        FunctionSignature sig;
        if (i < form.items.size() && form.items[i].head() &&
            *form.items[i].head() == "func") {
            std::size_t j = 1;
            sig = parse_typeuse(form.items[i].items, j, names, mod.types, nullptr);
        }
        if (!type_name.empty()) {
            names.type_index[type_name] = static_cast<int>(mod.types.size());
            mod.type_names[type_name] = static_cast<int>(mod.types.size());
        }
        mod.types.push_back(std::move(sig));
    }

    // Pass 1: lay out the function index space (imports first).
    struct PendingFunc {
        const SExpr* form;
        std::string name;
        int index;
    };
    std::vector<PendingFunc> pending;
    for (const auto& form : top.items) {
        const std::string* h = form.head();
        if (!h) continue;
        if (*h == "import" && form.items.size() >= 4) {
            const SExpr& desc = form.items[3];
            const std::string* dh = desc.head();
            if (!dh || *dh != "func") continue;
            std::size_t i = 1;
            std::string name;
            if (i < desc.items.size() && desc.items[i].is_atom() &&
                desc.items[i].token.text[0] == '$') {
                name = desc.items[i].token.text.substr(1);
                ++i;
            }
            FunctionSignature sig = parse_typeuse(desc.items, i, names, mod.types, nullptr);
            sig.name = !name.empty()
                           ? name
                           : (form.items[2].is_string() ? decode_wat_string(form.items[2].token.text)
                                                        : "import" + std::to_string(mod.imports.size()));
            if (!name.empty()) names.func_index[name] = static_cast<int>(mod.imports.size());
            mod.imports.push_back(std::move(sig));
        } else if (*h == "func" && is_func_import(form)) {
            std::size_t i = 1;
            std::string name;
            if (i < form.items.size() && form.items[i].is_atom() &&
                form.items[i].token.text[0] == '$') {
                name = form.items[i].token.text.substr(1);
                ++i;
            }
            while (i < form.items.size() && form.items[i].head() &&
                   (*form.items[i].head() == "import" || *form.items[i].head() == "export"))
                ++i;
            FunctionSignature sig = parse_typeuse(form.items, i, names, mod.types, nullptr);
            sig.name = name.empty() ? "import" + std::to_string(mod.imports.size()) : name;
            if (!name.empty()) names.func_index[name] = static_cast<int>(mod.imports.size());
            mod.imports.push_back(std::move(sig));
        }
    }
    for (const auto& form : top.items) {
        const std::string* h = form.head();
        if (!h || *h != "func" || is_func_import(form)) continue;
        int index = static_cast<int>(mod.imports.size() + pending.size());
        std::string name;
        if (form.items.size() >= 2 && form.items[1].is_atom() &&
            form.items[1].token.text[0] == '$')
            name = form.items[1].token.text.substr(1);
        if (name.empty()) name = "f" + std::to_string(index);
        names.func_index[name] = index;
        pending.push_back({&form, name, index});
    }
    std::size_t space_size = mod.imports.size() + pending.size();

    // Pass 2: function bodies, data segments, construct checks.
    for (const auto& p : pending) {
        const SExpr& form = *p.form;
        check_supported_deep(form);

        WatFunction fn;
        fn.index = p.index;
        fn.name = p.name;
        fn.first_source_line = form.start_line;

        std::size_t i = 1;
        if (i < form.items.size() && form.items[i].is_atom() &&
            form.items[i].token.text[0] == '$')
            ++i;
        while (i < form.items.size() && form.items[i].head() &&
               *form.items[i].head() == "export")
            ++i;
        fn.signature = parse_typeuse(form.items, i, names, mod.types, &fn.param_names);
        fn.signature.name = fn.name;

        for (int line = form.start_line; line <= form.end_line; ++line)
            fn.body_lines.push_back(line < static_cast<int>(source_lines.size())
                                        ? source_lines[static_cast<std::size_t>(line)]
                                        : std::string());

        collect_loops(form, fn.loop_extents, form.start_line);
        std::sort(fn.loop_extents.begin(), fn.loop_extents.end(),
                  [](const LoopExtent& a, const LoopExtent& b) {
                      return a.start_line != b.start_line ? a.start_line < b.start_line
                                                          : a.end_line > b.end_line;
                  });
        collect_callees(form, names, space_size, fn.callees);
        mod.functions.push_back(std::move(fn));
    }

    for (const auto& form : top.items) {
        const std::string* h = form.head();
        if (!h) continue;
        if (*h == "data") {
            check_supported_deep(form);
            DataSegment seg;
            bool have_offset = false;
            for (const auto& item : form.items) {
                const std::string* ih = item.head();
                if (ih && *ih == "i32.const" && item.items.size() >= 2) {
                    long v;
                    if (!parse_int(item.items[1].token.text, v))
                        throw ParseError("bad data offset", item.items[1].token.line,
                                         item.items[1].token.col);
                    seg.base_offset = v;
                    have_offset = true;
                } else if (ih && *ih == "offset") {
                    for (const auto& sub : item.items) {
                        const std::string* sh = sub.head();
                        if (sh && *sh == "i32.const" && sub.items.size() >= 2) {
                            long v;
                            if (!parse_int(sub.items[1].token.text, v))
                                throw ParseError("bad data offset", sub.items[1].token.line,
                                                 sub.items[1].token.col);
                            seg.base_offset = v;
                            have_offset = true;
                        }
                    }
                } else if (item.is_string()) {
                    seg.raw_bytes += decode_wat_string(item.token.text);
                }
            }
            if (!have_offset)
                throw UnsupportedConstruct("passive data segment", form.start_line);
            mod.data_segments.push_back(std::move(seg));
        } else if (*h == "memory" || *h == "table" || *h == "global" || *h == "elem" ||
                   *h == "export" || *h == "start") {
            check_supported_deep(form);
        }
    }

    return mod;
}

/// Decodes every data segment into NUL-separated strings keyed by their
/// linear-memory byte offset.
inline OffsetStringMap extract_data_strings(const WatModule& module) {
    OffsetStringMap map;
    for (const auto& seg : module.data_segments) {
        std::size_t piece_start = 0;
        const std::string& bytes = seg.raw_bytes;
        for (std::size_t i = 0; i <= bytes.size(); ++i) {
            if (i == bytes.size() || bytes[i] == '\0') {
                if (i > piece_start) {
                    long offset = seg.base_offset + static_cast<long>(piece_start);
                    map.entries.emplace(offset, bytes.substr(piece_start, i - piece_start));
                }
                piece_start = i + 1;
            }
        }
    }
    return map;
}

}  // namespace watc::wat
