// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "watc/errors.hpp"

namespace watc::c {

enum class TokKind { Ident, Keyword, Number, String, Char, Punct, Eof };

struct CTok {
    TokKind kind = TokKind::Eof;
    std::string text;
    int line = 0;
    int col = 0;
};

inline const std::set<std::string>& c_keywords() {
    static const std::set<std::string> kw = {
        "auto",     "break",    "case",     "char",   "const",    "continue", "default",
        "do",       "double",   "else",     "enum",   "extern",   "float",    "for",
        "goto",     "if",       "inline",   "int",    "long",     "register", "restrict",
        "return",   "short",    "signed",   "sizeof", "static",   "struct",   "switch",
        "typedef",  "union",    "unsigned", "void",   "volatile", "while",    "_Bool"};
    return kw;
}

inline bool is_type_keyword(std::string_view s) {
    static const std::set<std::string, std::less<>> types = {
        "char",   "const",  "double",   "enum",   "extern", "float",    "inline",
        "int",    "long",   "register", "short",  "signed", "static",   "struct",
        "union",  "unsigned", "void",   "volatile", "_Bool", "auto",    "restrict"};
    return types.count(s) > 0;
}

/// Tokenizes C source. Comments vanish; preprocessor lines (with backslash
/// continuations) vanish as well, so the parser sees plain C only.
inline std::vector<CTok> tokenize_c(std::string_view src) {
    static const std::array<const char*, 19> puncts3_2 = {
        "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=",
        "==",  "!=",  "&&",  "||", "+=", "-=", "*=", "/=", "%="};
    static const std::array<const char*, 3> puncts2b = {"&=", "|=", "^="};

    std::vector<CTok> tokens;
    int line = 0, col = 0;
    std::size_t i = 0;
    bool at_line_start = true;
    auto advance = [&](char ch) {
        if (ch == '\n') {
            ++line;
            col = 0;
            at_line_start = true;
        } else {
            ++col;
        }
    };
    auto skip_one = [&]() { advance(src[i]); ++i; };

    while (i < src.size()) {
        char ch = src[i];
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            skip_one();
            continue;
        }
        if (ch == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') skip_one();
            continue;
        }
        if (ch == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            skip_one();
            skip_one();
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) skip_one();
            if (i + 1 >= src.size()) break;
            skip_one();
            skip_one();
            continue;
        }
        if (ch == '#' && at_line_start) {
            while (i < src.size()) {
                if (src[i] == '\\' && i + 1 < src.size() && src[i + 1] == '\n') {
                    skip_one();
                    skip_one();
                    continue;
                }
                if (src[i] == '\n') break;
                skip_one();
            }
            continue;
        }
        at_line_start = false;
        int tl = line, tc = col;
        if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_') {
            std::string word;
            while (i < src.size()) {
                char d = src[i];
                bool ident = (d >= 'a' && d <= 'z') || (d >= 'A' && d <= 'Z') ||
                             (d >= '0' && d <= '9') || d == '_';
                if (!ident) break;
                word += d;
                skip_one();
            }
            TokKind kind = c_keywords().count(word) ? TokKind::Keyword : TokKind::Ident;
            tokens.push_back({kind, word, tl, tc});
            continue;
        }
        if ((ch >= '0' && ch <= '9') ||
            (ch == '.' && i + 1 < src.size() && src[i + 1] >= '0' && src[i + 1] <= '9')) {
            std::string num;
            while (i < src.size()) {
                char d = src[i];
                bool numchar = (d >= '0' && d <= '9') || (d >= 'a' && d <= 'z') ||
                               (d >= 'A' && d <= 'Z') || d == '.' || d == '_';
                bool expo_sign = (d == '+' || d == '-') && !num.empty() &&
                                 (num.back() == 'e' || num.back() == 'E' ||
                                  num.back() == 'p' || num.back() == 'P');
                if (!numchar && !expo_sign) break;
                num += d;
                skip_one();
            }
            tokens.push_back({TokKind::Number, num, tl, tc});
            continue;
        }
        if (ch == '"' || ch == '\'') {
            char quote = ch;
            std::string lit(1, quote);
            skip_one();
            bool closed = false;
            while (i < src.size()) {
                char d = src[i];
                lit += d;
                skip_one();
                if (d == '\\') {
                    if (i < src.size()) {
                        lit += src[i];
                        skip_one();
                    }
                } else if (d == quote) {
                    closed = true;
                    break;
                } else if (d == '\n') {
                    break;
                }
            }
            if (!closed) throw ParseError("unterminated literal", tl, tc);
            tokens.push_back({quote == '"' ? TokKind::String : TokKind::Char, lit, tl, tc});
            continue;
        }
        bool matched = false;
        for (const char* p : puncts3_2) {
            std::string_view pv(p);
            if (src.substr(i, pv.size()) == pv) {
                tokens.push_back({TokKind::Punct, std::string(pv), tl, tc});
                for (std::size_t k = 0; k < pv.size(); ++k) skip_one();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        for (const char* p : puncts2b) {
            std::string_view pv(p);
            if (src.substr(i, pv.size()) == pv) {
                tokens.push_back({TokKind::Punct, std::string(pv), tl, tc});
                for (std::size_t k = 0; k < pv.size(); ++k) skip_one();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        tokens.push_back({TokKind::Punct, std::string(1, ch), tl, tc});
        skip_one();
    }
    tokens.push_back({TokKind::Eof, "", line, col});
    return tokens;
}

/// Decodes a C string literal token (quotes included) to its byte content.
inline std::string decode_c_string(std::string_view raw) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"')
        throw BadEscape("not a string literal: " + std::string(raw));
    std::string_view body = raw.substr(1, raw.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char ch = body[i];
        if (ch != '\\') {
            out += ch;
            continue;
        }
        if (i + 1 >= body.size()) throw BadEscape("dangling backslash");
        char e = body[++i];
        switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '\\': out += '\\'; break;
            case '"': out += '"'; break;
            case '\'': out += '\''; break;
            default:
                if (e >= '0' && e <= '7') {
                    int v = e - '0';
                    int digits = 1;
                    while (i + 1 < body.size() && digits < 3 && body[i + 1] >= '0' &&
                           body[i + 1] <= '7') {
                        v = v * 8 + (body[++i] - '0');
                        ++digits;
                    }
                    out += static_cast<char>(v);
                } else if (e == 'x') {
                    int v = 0, digits = 0;
                    while (i + 1 < body.size() && digits < 2) {
                        char h = body[i + 1];
                        int d;
                        if (h >= '0' && h <= '9') d = h - '0';
                        else if (h >= 'a' && h <= 'f') d = h - 'a' + 10;
                        else if (h >= 'A' && h <= 'F') d = h - 'A' + 10;
                        else break;
                        v = v * 16 + d;
                        ++i;
                        ++digits;
                    }
                    if (digits == 0) throw BadEscape("\\x without digits");
                    out += static_cast<char>(v);
                } else {
                    throw BadEscape(std::string("unknown escape \\") + e);
                }
        }
    }
    return out;
}

}  // namespace watc::c
