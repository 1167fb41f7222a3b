// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "watc/errors.hpp"

namespace watc::wat {

enum class TokenKind {
    LParen,
    RParen,
    Atom,    // keywords, mnemonics, numbers, $identifiers, offset=.. immediates
    String,  // quoted, text kept verbatim including the quotes
};

struct Token {
    TokenKind kind;
    std::string text;
    int line = 0;  // 0-based
    int col = 0;   // 0-based
};

/// Tokenizes wat text. Comments (both ";;" and "(; ;)") are skipped; strings
/// keep their raw spelling so escape decoding can be done (and diagnosed)
/// later, where the segment context is known.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> tokens;
    int line = 0;
    int col = 0;
    std::size_t i = 0;
    auto advance = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 0;
        } else {
            ++col;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(c);
            ++i;
            continue;
        }
        if (c == ';' && i + 1 < src.size() && src[i + 1] == ';') {
            while (i < src.size() && src[i] != '\n') {
                advance(src[i]);
                ++i;
            }
            continue;
        }
        if (c == '(' && i + 1 < src.size() && src[i + 1] == ';') {
            int start_line = line;
            int start_col = col;
            int depth = 0;
            while (i < src.size()) {
                if (src[i] == '(' && i + 1 < src.size() && src[i + 1] == ';') {
                    ++depth;
                    advance(src[i]);
                    advance(src[i + 1]);
                    i += 2;
                } else if (src[i] == ';' && i + 1 < src.size() && src[i + 1] == ')') {
                    --depth;
                    advance(src[i]);
                    advance(src[i + 1]);
                    i += 2;
                    if (depth == 0) break;
                } else {
                    advance(src[i]);
                    ++i;
                }
            }
            if (depth != 0) throw ParseError("unterminated block comment", start_line, start_col);
            continue;
        }
        if (c == '(') {
            tokens.push_back({TokenKind::LParen, "(", line, col});
            advance(c);
            ++i;
            continue;
        }
        if (c == ')') {
            tokens.push_back({TokenKind::RParen, ")", line, col});
            advance(c);
            ++i;
            continue;
        }
        if (c == '"') {
            int start_line = line;
            int start_col = col;
            std::string raw = "\"";
            advance(c);
            ++i;
            bool closed = false;
            while (i < src.size()) {
                char d = src[i];
                raw += d;
                advance(d);
                ++i;
                if (d == '\\') {
                    if (i >= src.size()) break;
                    raw += src[i];
                    advance(src[i]);
                    ++i;
                } else if (d == '"') {
                    closed = true;
                    break;
                }
            }
            if (!closed) throw ParseError("unterminated string", start_line, start_col);
            tokens.push_back({TokenKind::String, raw, start_line, start_col});
            continue;
        }
        if (c == ';') throw ParseError("unexpected ';'", line, col);
        // Atom: everything up to a delimiter.
        int start_line = line;
        int start_col = col;
        std::string atom;
        while (i < src.size()) {
            char d = src[i];
            if (d == '(' || d == ')' || d == '"' || d == ';' || d == ' ' || d == '\t' ||
                d == '\r' || d == '\n')
                break;
            atom += d;
            advance(d);
            ++i;
        }
        if (atom.empty()) throw ParseError("stray character", start_line, start_col);
        tokens.push_back({TokenKind::Atom, atom, start_line, start_col});
    }
    return tokens;
}

/// Decodes the escape sequences of a raw wat string token (quotes included)
/// into bytes. Supports \n \t \r \\ \" \' and two-digit hex pairs.
inline std::string decode_wat_string(std::string_view raw) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"')
        throw BadEscape("not a quoted string: " + std::string(raw));
    std::string_view body = raw.substr(1, raw.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\') {
            out += c;
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
        default: {
            auto hex = [](char h) -> int {
                if (h >= '0' && h <= '9') return h - '0';
                if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                return -1;
            };
            int hi = hex(e);
            if (hi < 0 || i + 1 >= body.size())
                throw BadEscape("invalid escape '\\" + std::string(1, e) + "'");
            int lo = hex(body[++i]);
            if (lo < 0) throw BadEscape("invalid hex escape in string");
            out += static_cast<char>(hi * 16 + lo);
        }
        }
    }
    return out;
}

}  // namespace watc::wat
