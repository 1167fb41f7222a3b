// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "watc/c/lexer.hpp"
#include "watc/text.hpp"

namespace watc::c {

/// One node of the reduced C syntax tree. Statement and expression kinds are
/// encoded in `label`; `text` carries the payload (name, operator, literal).
struct CNode {
    std::string label;
    std::string text;
    std::vector<CNode> children;
    int start_line = 0;
    int end_line = 0;
    bool has_error = false;
};

struct CFunction {
    std::string name;
    std::string return_type;
    std::vector<std::string> param_names;
    std::vector<std::string> param_types;
    CNode node;                         // label "function"
    int start_line = 0;
    int end_line = 0;                   // inclusive, unit line numbers
    bool has_error = false;
};

struct CUnit {
    CNode root;                         // label "unit"
    std::vector<CFunction> functions;
    std::vector<std::string> errors;
    bool parse_ok = true;
};

namespace detail {

struct SyntaxError {
    std::string msg;
    int line;
};

class CParser {
public:
    explicit CParser(std::vector<CTok> toks) : toks_(std::move(toks)) {}

    CUnit run() {
        CUnit unit;
        unit.root.label = "unit";
        while (!is_eof()) {
            if (is_punct(";")) {
                ++p_;
                continue;
            }
            std::size_t before = p_;
            try {
                parse_top_level(unit);
            } catch (const SyntaxError& e) {
                record_error(unit, e);
                recover_top_level();
            }
            if (p_ == before) ++p_;
        }
        unit.errors = errors_;
        unit.parse_ok = errors_.empty();
        for (const auto& fn : unit.functions)
            if (fn.has_error) unit.parse_ok = false;
        if (!unit.root.children.empty()) {
            unit.root.start_line = unit.root.children.front().start_line;
            unit.root.end_line = unit.root.children.back().end_line;
        }
        return unit;
    }

private:
    std::vector<CTok> toks_;
    std::size_t p_ = 0;
    std::vector<std::string> errors_;

    const CTok& cur() const { return toks_[std::min(p_, toks_.size() - 1)]; }
    const CTok& peek(std::size_t n = 1) const {
        return toks_[std::min(p_ + n, toks_.size() - 1)];
    }
    bool is_eof() const { return cur().kind == TokKind::Eof; }
    bool is_punct(std::string_view t) const {
        return cur().kind == TokKind::Punct && cur().text == t;
    }
    bool is_kw(std::string_view t) const {
        return cur().kind == TokKind::Keyword && cur().text == t;
    }
    bool accept_punct(std::string_view t) {
        if (!is_punct(t)) return false;
        ++p_;
        return true;
    }
    void expect_punct(std::string_view t) {
        if (!accept_punct(t))
            throw SyntaxError{"expected '" + std::string(t) + "' before '" + cur().text + "'",
                              cur().line};
    }

    void record_error(CUnit& unit, const SyntaxError& e) {
        errors_.push_back(e.msg + " at line " + std::to_string(e.line + 1));
        CNode err;
        err.label = "error";
        err.has_error = true;
        err.start_line = err.end_line = e.line;
        unit.root.children.push_back(err);
        unit.parse_ok = false;
    }

    void skip_balanced_braces() {
        int depth = 0;
        while (!is_eof()) {
            if (is_punct("{")) ++depth;
            if (is_punct("}")) {
                --depth;
                ++p_;
                if (depth <= 0) return;
                continue;
            }
            ++p_;
        }
    }

    void recover_top_level() {
        while (!is_eof()) {
            if (is_punct(";")) {
                ++p_;
                return;
            }
            if (is_punct("{")) {
                skip_balanced_braces();
                accept_punct(";");
                return;
            }
            ++p_;
        }
    }

    void recover_statement() {
        while (!is_eof()) {
            if (is_punct(";")) {
                ++p_;
                return;
            }
            if (is_punct("}")) return;
            if (is_punct("{")) {
                skip_balanced_braces();
                return;
            }
            ++p_;
        }
    }

    bool at_type_start() const {
        if (cur().kind == TokKind::Keyword && is_type_keyword(cur().text)) return true;
        if (is_kw("typedef")) return true;
        return false;
    }

    // --- top level ---------------------------------------------------------

    void parse_top_level(CUnit& unit) {
        std::size_t mark = p_;
        if (looks_like_function()) {
            parse_function(unit);
            return;
        }
        p_ = mark;
        CNode decl;
        decl.label = "topdecl";
        decl.start_line = cur().line;
        // Anything that is not a function definition (prototype, global,
        // struct/typedef body) is swallowed as one opaque declaration.
        while (!is_eof()) {
            if (is_punct("{")) {
                skip_balanced_braces();
                continue;
            }
            if (is_punct(";")) {
                decl.end_line = cur().line;
                ++p_;
                break;
            }
            decl.end_line = cur().line;
            ++p_;
        }
        unit.root.children.push_back(std::move(decl));
    }

    // Function definition shape: specifiers declarator '(' ... ')' '{'.
    bool looks_like_function() {
        std::size_t q = p_;
        auto tok = [&](std::size_t k) -> const CTok& {
            return toks_[std::min(k, toks_.size() - 1)];
        };
        bool saw_specifier = false;
        while (tok(q).kind == TokKind::Keyword && is_type_keyword(tok(q).text)) {
            saw_specifier = true;
            ++q;
            if (tok(q - 1).text == "struct" || tok(q - 1).text == "union" ||
                tok(q - 1).text == "enum") {
                if (tok(q).kind == TokKind::Ident) ++q;
                if (tok(q).kind == TokKind::Punct && tok(q).text == "{") return false;
            }
        }
        if (!saw_specifier) return false;
        while (tok(q).kind == TokKind::Punct && tok(q).text == "*") ++q;
        if (tok(q).kind != TokKind::Ident) return false;
        ++q;
        if (!(tok(q).kind == TokKind::Punct && tok(q).text == "(")) return false;
        int depth = 0;
        while (tok(q).kind != TokKind::Eof) {
            if (tok(q).kind == TokKind::Punct && tok(q).text == "(") ++depth;
            if (tok(q).kind == TokKind::Punct && tok(q).text == ")") {
                --depth;
                if (depth == 0) {
                    ++q;
                    break;
                }
            }
            ++q;
        }
        return tok(q).kind == TokKind::Punct && tok(q).text == "{";
    }

    void parse_function(CUnit& unit) {
        CFunction fn;
        fn.start_line = cur().line;
        std::string specifiers;
        while (cur().kind == TokKind::Keyword && is_type_keyword(cur().text)) {
            if (!specifiers.empty()) specifiers += ' ';
            specifiers += cur().text;
            bool tagged = cur().text == "struct" || cur().text == "union" || cur().text == "enum";
            ++p_;
            if (tagged && cur().kind == TokKind::Ident) {
                specifiers += ' ' + cur().text;
                ++p_;
            }
        }
        while (is_punct("*")) {
            specifiers += '*';
            ++p_;
        }
        fn.return_type = specifiers;
        fn.name = cur().text;
        ++p_;

        CNode node;
        node.label = "function";
        node.text = fn.name;
        node.start_line = fn.start_line;

        CNode params;
        params.label = "params";
        params.start_line = cur().line;
        expect_punct("(");
        parse_params(fn, params);
        node.children.push_back(std::move(params));

        node.children.push_back(parse_compound());
        node.end_line = node.children.back().end_line;
        fn.end_line = node.end_line;
        fn.has_error = subtree_has_error(node);
        fn.node = node;
        unit.functions.push_back(fn);
        unit.root.children.push_back(std::move(node));
    }

    void parse_params(CFunction& fn, CNode& params) {
        if (accept_punct(")")) {
            params.end_line = toks_[p_ - 1].line;
            return;
        }
        while (!is_eof()) {
            std::vector<CTok> piece;
            int depth = 0;
            while (!is_eof()) {
                if (is_punct("(")) ++depth;
                if (is_punct(")")) {
                    if (depth == 0) break;
                    --depth;
                }
                if (is_punct(",") && depth == 0) break;
                piece.push_back(cur());
                ++p_;
            }
            if (!(piece.size() == 1 &&
                  (piece[0].text == "void" || piece[0].text == "..."))) {
                std::string name;
                std::string type;
                int name_at = -1;
                for (int k = static_cast<int>(piece.size()) - 1; k >= 0; --k) {
                    if (piece[static_cast<std::size_t>(k)].kind == TokKind::Ident) {
                        name = piece[static_cast<std::size_t>(k)].text;
                        name_at = k;
                        break;
                    }
                }
                for (std::size_t k = 0; k < piece.size(); ++k) {
                    if (static_cast<int>(k) == name_at) continue;
                    if (!type.empty()) type += ' ';
                    type += piece[k].text;
                }
                if (!piece.empty()) {
                    fn.param_names.push_back(name);
                    fn.param_types.push_back(type);
                    CNode param;
                    param.label = "param";
                    param.text = name;
                    param.start_line = piece.front().line;
                    param.end_line = piece.back().line;
                    params.children.push_back(std::move(param));
                }
            }
            if (accept_punct(")")) {
                params.end_line = toks_[p_ - 1].line;
                return;
            }
            expect_punct(",");
        }
        throw SyntaxError{"unterminated parameter list", cur().line};
    }

    // --- statements --------------------------------------------------------

    CNode parse_compound() {
        CNode block;
        block.label = "block";
        block.start_line = cur().line;
        expect_punct("{");
        while (!is_punct("}") && !is_eof()) {
            std::size_t before = p_;
            try {
                block.children.push_back(parse_statement());
            } catch (const SyntaxError& e) {
                errors_.push_back(e.msg + " at line " + std::to_string(e.line + 1));
                CNode err;
                err.label = "error";
                err.has_error = true;
                err.start_line = err.end_line = e.line;
                block.children.push_back(err);
                recover_statement();
            }
            if (p_ == before) ++p_;
        }
        block.end_line = cur().line;
        expect_punct("}");
        return block;
    }

    CNode parse_statement() {
        int line = cur().line;
        if (is_punct("{")) return parse_compound();
        if (is_punct(";")) {
            ++p_;
            return stmt_node("empty", line, line);
        }
        if (is_kw("if")) return parse_if();
        if (is_kw("while")) return parse_while();
        if (is_kw("do")) return parse_do();
        if (is_kw("for")) return parse_for();
        if (is_kw("switch")) return parse_switch();
        if (is_kw("case")) {
            ++p_;
            CNode n = stmt_node("case", line, line);
            n.children.push_back(parse_cond_expr());
            expect_punct(":");
            n.end_line = toks_[p_ - 1].line;
            return n;
        }
        if (is_kw("default")) {
            ++p_;
            expect_punct(":");
            return stmt_node("default", line, toks_[p_ - 1].line);
        }
        if (is_kw("return")) {
            ++p_;
            CNode n = stmt_node("return", line, line);
            if (!is_punct(";")) n.children.push_back(parse_expr());
            expect_punct(";");
            n.end_line = toks_[p_ - 1].line;
            return n;
        }
        if (is_kw("break")) {
            ++p_;
            expect_punct(";");
            return stmt_node("break", line, toks_[p_ - 1].line);
        }
        if (is_kw("continue")) {
            ++p_;
            expect_punct(";");
            return stmt_node("continue", line, toks_[p_ - 1].line);
        }
        if (is_kw("goto")) {
            ++p_;
            CNode n = stmt_node("goto", line, line);
            n.text = cur().text;
            ++p_;
            expect_punct(";");
            n.end_line = toks_[p_ - 1].line;
            return n;
        }
        if (cur().kind == TokKind::Ident && peek().kind == TokKind::Punct &&
            peek().text == ":") {
            CNode n = stmt_node("label", line, peek().line);
            n.text = cur().text;
            p_ += 2;
            return n;
        }
        if (at_type_start()) return parse_declaration();
        CNode n = stmt_node("exprstmt", line, line);
        n.children.push_back(parse_expr());
        expect_punct(";");
        n.end_line = toks_[p_ - 1].line;
        return n;
    }

    CNode stmt_node(const char* label, int start, int end) {
        CNode n;
        n.label = label;
        n.start_line = start;
        n.end_line = end;
        return n;
    }

    CNode parse_if() {
        CNode n = stmt_node("if", cur().line, cur().line);
        ++p_;
        expect_punct("(");
        n.children.push_back(parse_expr());
        expect_punct(")");
        n.children.push_back(parse_statement());
        if (is_kw("else")) {
            ++p_;
            n.children.push_back(parse_statement());
        }
        n.end_line = n.children.back().end_line;
        return n;
    }

    CNode parse_while() {
        CNode n = stmt_node("while", cur().line, cur().line);
        ++p_;
        expect_punct("(");
        n.children.push_back(parse_expr());
        expect_punct(")");
        n.children.push_back(parse_statement());
        n.end_line = n.children.back().end_line;
        return n;
    }

    CNode parse_do() {
        CNode n = stmt_node("do", cur().line, cur().line);
        ++p_;
        n.children.push_back(parse_statement());
        if (!is_kw("while")) throw SyntaxError{"expected 'while' after do body", cur().line};
        ++p_;
        expect_punct("(");
        n.children.push_back(parse_expr());
        expect_punct(")");
        expect_punct(";");
        n.end_line = toks_[p_ - 1].line;
        return n;
    }

    CNode parse_for() {
        CNode n = stmt_node("for", cur().line, cur().line);
        ++p_;
        expect_punct("(");
        if (is_punct(";")) {
            ++p_;
            n.children.push_back(stmt_node("empty", n.start_line, n.start_line));
        } else if (at_type_start()) {
            n.children.push_back(parse_declaration());
        } else {
            CNode init = stmt_node("exprstmt", cur().line, cur().line);
            init.children.push_back(parse_expr());
            init.end_line = cur().line;
            expect_punct(";");
            n.children.push_back(std::move(init));
        }
        if (is_punct(";")) {
            n.children.push_back(stmt_node("empty", cur().line, cur().line));
        } else {
            n.children.push_back(parse_expr());
        }
        expect_punct(";");
        if (is_punct(")")) {
            n.children.push_back(stmt_node("empty", cur().line, cur().line));
        } else {
            n.children.push_back(parse_expr());
        }
        expect_punct(")");
        n.children.push_back(parse_statement());
        n.end_line = n.children.back().end_line;
        return n;
    }

    CNode parse_switch() {
        CNode n = stmt_node("switch", cur().line, cur().line);
        ++p_;
        expect_punct("(");
        n.children.push_back(parse_expr());
        expect_punct(")");
        n.children.push_back(parse_statement());
        n.end_line = n.children.back().end_line;
        return n;
    }

    CNode parse_declaration() {
        CNode n = stmt_node("decl", cur().line, cur().line);
        std::string type;
        bool is_typedef = false;
        while (at_type_start()) {
            if (is_kw("typedef")) is_typedef = true;
            if (!type.empty()) type += ' ';
            type += cur().text;
            bool tagged = cur().text == "struct" || cur().text == "union" || cur().text == "enum";
            ++p_;
            if (tagged && cur().kind == TokKind::Ident) {
                type += ' ' + cur().text;
                ++p_;
            }
            if (tagged && is_punct("{")) skip_balanced_braces();
        }
        n.text = type;
        (void)is_typedef;
        while (!is_punct(";") && !is_eof()) {
            CNode d;
            d.label = "declarator";
            d.start_line = cur().line;
            std::string stars;
            while (is_punct("*")) {
                stars += '*';
                ++p_;
            }
            if (cur().kind != TokKind::Ident)
                throw SyntaxError{"expected declarator name, got '" + cur().text + "'",
                                  cur().line};
            d.text = cur().text;
            if (!stars.empty()) d.text = stars + d.text;
            ++p_;
            while (is_punct("[")) {
                ++p_;
                CNode arr;
                arr.label = "array";
                arr.start_line = cur().line;
                if (!is_punct("]")) arr.children.push_back(parse_cond_expr());
                expect_punct("]");
                arr.end_line = toks_[p_ - 1].line;
                d.children.push_back(std::move(arr));
            }
            if (accept_punct("=")) d.children.push_back(parse_assign_expr());
            d.end_line = toks_[p_ - 1].line;
            n.children.push_back(std::move(d));
            if (!accept_punct(",")) break;
        }
        expect_punct(";");
        n.end_line = toks_[p_ - 1].line;
        return n;
    }

    // --- expressions -------------------------------------------------------

    CNode expr_node(const char* label, int line) {
        CNode n;
        n.label = label;
        n.start_line = n.end_line = line;
        return n;
    }

    CNode parse_expr() {
        CNode first = parse_assign_expr();
        if (!is_punct(",")) return first;
        CNode n = expr_node("comma", first.start_line);
        n.children.push_back(std::move(first));
        while (accept_punct(",")) n.children.push_back(parse_assign_expr());
        n.end_line = n.children.back().end_line;
        return n;
    }

    bool at_assign_op() const {
        if (cur().kind != TokKind::Punct) return false;
        const std::string& t = cur().text;
        return t == "=" || t == "+=" || t == "-=" || t == "*=" || t == "/=" || t == "%=" ||
               t == "<<=" || t == ">>=" || t == "&=" || t == "|=" || t == "^=";
    }

    CNode parse_assign_expr() {
        CNode lhs = parse_cond_expr();
        if (!at_assign_op()) return lhs;
        CNode n = expr_node("assign", lhs.start_line);
        n.text = cur().text;
        ++p_;
        CNode rhs = parse_assign_expr();
        n.end_line = rhs.end_line;
        n.children.push_back(std::move(lhs));
        n.children.push_back(std::move(rhs));
        return n;
    }

    CNode parse_cond_expr() {
        CNode cond = parse_binary(1);
        if (!is_punct("?")) return cond;
        ++p_;
        CNode n = expr_node("cond", cond.start_line);
        n.children.push_back(std::move(cond));
        n.children.push_back(parse_expr());
        expect_punct(":");
        n.children.push_back(parse_cond_expr());
        n.end_line = n.children.back().end_line;
        return n;
    }

    int binary_prec(const std::string& op) const {
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "|") return 3;
        if (op == "^") return 4;
        if (op == "&") return 5;
        if (op == "==" || op == "!=") return 6;
        if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
        if (op == "<<" || op == ">>") return 8;
        if (op == "+" || op == "-") return 9;
        if (op == "*" || op == "/" || op == "%") return 10;
        return 0;
    }

    CNode parse_binary(int min_prec) {
        CNode lhs = parse_unary();
        while (cur().kind == TokKind::Punct) {
            int prec = binary_prec(cur().text);
            if (prec == 0 || prec < min_prec) break;
            std::string op = cur().text;
            ++p_;
            CNode rhs = parse_binary(prec + 1);
            CNode n = expr_node("binop", lhs.start_line);
            n.text = op;
            n.end_line = rhs.end_line;
            n.children.push_back(std::move(lhs));
            n.children.push_back(std::move(rhs));
            lhs = std::move(n);
        }
        return lhs;
    }

    bool at_cast() const {
        if (!is_punct("(")) return false;
        const CTok& t = peek();
        return t.kind == TokKind::Keyword && is_type_keyword(t.text) && t.text != "struct" &&
               t.text != "union" && t.text != "enum";
    }

    CNode parse_unary() {
        int line = cur().line;
        if (cur().kind == TokKind::Punct) {
            const std::string& t = cur().text;
            if (t == "!" || t == "~" || t == "+" || t == "-" || t == "*" || t == "&" ||
                t == "++" || t == "--") {
                CNode n = expr_node("unop", line);
                n.text = t;
                ++p_;
                n.children.push_back(parse_unary());
                n.end_line = n.children.back().end_line;
                return n;
            }
        }
        if (is_kw("sizeof")) {
            ++p_;
            CNode n = expr_node("sizeof", line);
            if (is_punct("(") && peek().kind == TokKind::Keyword &&
                is_type_keyword(peek().text)) {
                ++p_;
                std::string ty;
                while (!is_punct(")") && !is_eof()) {
                    if (!ty.empty()) ty += ' ';
                    ty += cur().text;
                    ++p_;
                }
                expect_punct(")");
                n.text = ty;
            } else {
                n.children.push_back(parse_unary());
            }
            n.end_line = toks_[p_ - 1].line;
            return n;
        }
        if (at_cast()) {
            ++p_;
            std::string ty;
            while (!is_punct(")") && !is_eof()) {
                if (!ty.empty()) ty += ' ';
                ty += cur().text;
                ++p_;
            }
            expect_punct(")");
            CNode n = expr_node("cast", line);
            n.text = ty;
            n.children.push_back(parse_unary());
            n.end_line = n.children.back().end_line;
            return n;
        }
        return parse_postfix();
    }

    CNode parse_postfix() {
        CNode node = parse_primary();
        while (true) {
            if (is_punct("(")) {
                ++p_;
                CNode call = expr_node("call", node.start_line);
                call.text = node.label == "ident" ? node.text : "";
                call.children.push_back(std::move(node));
                if (!is_punct(")")) {
                    call.children.push_back(parse_assign_expr());
                    while (accept_punct(",")) call.children.push_back(parse_assign_expr());
                }
                expect_punct(")");
                call.end_line = toks_[p_ - 1].line;
                node = std::move(call);
            } else if (is_punct("[")) {
                ++p_;
                CNode idx = expr_node("index", node.start_line);
                idx.children.push_back(std::move(node));
                idx.children.push_back(parse_expr());
                expect_punct("]");
                idx.end_line = toks_[p_ - 1].line;
                node = std::move(idx);
            } else if (is_punct(".") || is_punct("->")) {
                CNode mem = expr_node(is_punct(".") ? "member" : "arrow", node.start_line);
                ++p_;
                mem.text = cur().text;
                ++p_;
                mem.children.push_back(std::move(node));
                mem.end_line = toks_[p_ - 1].line;
                node = std::move(mem);
            } else if (is_punct("++") || is_punct("--")) {
                CNode post = expr_node("postop", node.start_line);
                post.text = cur().text;
                ++p_;
                post.children.push_back(std::move(node));
                post.end_line = toks_[p_ - 1].line;
                node = std::move(post);
            } else {
                return node;
            }
        }
    }

    CNode parse_primary() {
        int line = cur().line;
        if (cur().kind == TokKind::Ident) {
            CNode n = expr_node("ident", line);
            n.text = cur().text;
            ++p_;
            return n;
        }
        if (cur().kind == TokKind::Number) {
            CNode n = expr_node("num", line);
            n.text = cur().text;
            ++p_;
            return n;
        }
        if (cur().kind == TokKind::String) {
            CNode n = expr_node("str", line);
            n.text = cur().text;
            ++p_;
            while (cur().kind == TokKind::String) {
                n.text += cur().text;
                n.end_line = cur().line;
                ++p_;
            }
            return n;
        }
        if (cur().kind == TokKind::Char) {
            CNode n = expr_node("chr", line);
            n.text = cur().text;
            ++p_;
            return n;
        }
        if (accept_punct("(")) {
            CNode inner = parse_expr();
            expect_punct(")");
            return inner;
        }
        throw SyntaxError{"unexpected '" + cur().text + "'", line};
    }

    static bool subtree_has_error(const CNode& n) {
        if (n.has_error) return true;
        for (const auto& child : n.children)
            if (subtree_has_error(child)) return true;
        return false;
    }
};

}  // namespace detail

/// Parses C source into the reduced tree. Never throws on malformed code:
/// bad regions become "error" nodes, `parse_ok` turns false, and every
/// recoverable function is still extracted.
inline CUnit parse_c(const std::string& src) {
    std::vector<CTok> toks;
    try {
        toks = tokenize_c(src);
    } catch (const ParseError& e) {
        CUnit unit;
        unit.root.label = "unit";
        unit.parse_ok = false;
        unit.errors.push_back(e.what());
        return unit;
    }
    return detail::CParser(std::move(toks)).run();
}

inline void visit(const CNode& node, const std::function<void(const CNode&)>& fn) {
    fn(node);
    for (const auto& child : node.children) visit(child, fn);
}

/// Loop statement nodes (while/for/do) in preorder.
inline std::vector<const CNode*> collect_loop_nodes(const CNode& root) {
    std::vector<const CNode*> out;
    visit(root, [&](const CNode& n) {
        if (n.label == "while" || n.label == "for" || n.label == "do") out.push_back(&n);
    });
    return out;
}

inline std::size_t count_nodes(const CNode& root) {
    std::size_t n = 0;
    visit(root, [&](const CNode&) { ++n; });
    return n;
}

}  // namespace watc::c
