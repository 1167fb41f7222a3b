// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "watc/text.hpp"
#include "watc/wat/parser.hpp"

using namespace watc;
using namespace watc::wat;

TEST_CASE("tokenizer handles comments and strings") {
    auto toks = tokenize("(a ;; line\n (; outer (; inner ;) tail ;) \"s;;tr\" b)");
    REQUIRE(toks.size() == 5);
    CHECK(toks[0].kind == TokenKind::LParen);
    CHECK(toks[1].text == "a");
    CHECK(toks[2].kind == TokenKind::String);
    CHECK(toks[2].text == "\"s;;tr\"");
    CHECK(toks[3].text == "b");
}

TEST_CASE("tokenizer rejects unterminated input") {
    CHECK_THROWS_AS(tokenize("(a \"oops"), ParseError);
    CHECK_THROWS_AS(tokenize("(a (; never"), ParseError);
}

TEST_CASE("wat string decoding") {
    CHECK(decode_wat_string("\"Hi\"") == "Hi");
    CHECK(decode_wat_string("\"a\\nb\"") == "a\nb");
    CHECK(decode_wat_string("\"\\00\"") == std::string(1, '\0'));
    CHECK(decode_wat_string("\"\\6c\\6f\"") == "lo");
    CHECK(decode_wat_string("\"q\\\"q\"") == "q\"q");
    CHECK_THROWS_AS(decode_wat_string("\"\\zz\""), BadEscape);
}

TEST_CASE("empty module parses") {
    WatModule mod = parse_module("(module)");
    CHECK(mod.functions.empty());
    CHECK(mod.imports.empty());
    CHECK(mod.data_segments.empty());
}

TEST_CASE("flat module with import, loop and data") {
    WatModule mod = parse_module(testsupport::read_fixture("sum_calls.wat"));
    REQUIRE(mod.imports.size() == 1);
    CHECK(mod.imports[0].name == "putchar");
    REQUIRE(mod.functions.size() == 2);

    const WatFunction& sum = mod.functions[0];
    CHECK(sum.name == "sum_upto");
    CHECK(sum.index == 1);
    CHECK(sum.signature.params.size() == 1);
    CHECK(sum.signature.results.size() == 1);
    CHECK(signature_to_declaration(sum.signature) == "int sum_upto(int);");
    REQUIRE(sum.loop_extents.size() == 1);
    const auto& ext = sum.loop_extents[0];
    CHECK(text::trim(sum.body_lines[ext.start_line]).substr(0, 4) == "loop");
    CHECK(text::trim(sum.body_lines[ext.end_line]) == "end");

    const WatFunction& main_fn = mod.functions[1];
    CHECK(main_fn.name == "main");
    CHECK(main_fn.callees == std::set<int>{0, 1});

    auto strings = extract_data_strings(mod);
    REQUIRE(strings.size() == 2);
    CHECK(strings.entries.at(1024) == "Hi");
    CHECK(strings.entries.at(1027) == "world");
}

TEST_CASE("function body lines are verbatim source") {
    std::string src = testsupport::read_fixture("sum_calls.wat");
    auto lines = text::split_lines(src);
    WatModule mod = parse_module(src);
    const WatFunction& sum = mod.functions[0];
    for (std::size_t i = 0; i < sum.body_lines.size(); ++i)
        CHECK(sum.body_lines[i] ==
              lines[static_cast<std::size_t>(sum.first_source_line) + i]);
}

TEST_CASE("nested flat loops yield nested extents") {
    WatModule mod = parse_module(testsupport::read_fixture("nested_loops.wat"));
    REQUIRE(mod.functions.size() == 1);
    const auto& fn = mod.functions[0];
    REQUIRE(fn.loop_extents.size() == 2);
    const auto& outer = fn.loop_extents[0];
    const auto& inner = fn.loop_extents[1];
    CHECK(outer.start_line < inner.start_line);
    CHECK(inner.end_line < outer.end_line);
}

TEST_CASE("folded module parses with loop extent and calls") {
    WatModule mod = parse_module(testsupport::read_fixture("folded_spin.wat"));
    REQUIRE(mod.functions.size() == 2);
    const auto& dbl = mod.functions[0];
    CHECK(dbl.name == "double");
    CHECK(dbl.param_names == std::vector<std::string>{"x"});
    const auto& spin = mod.functions[1];
    REQUIRE(spin.loop_extents.size() == 1);
    CHECK(spin.callees == std::set<int>{0});
    auto strings = extract_data_strings(mod);
    CHECK(strings.entries.at(2048) == "A");
    CHECK(strings.entries.at(2050) == "B");
}

TEST_CASE("if else blocks are not loops") {
    WatModule mod = parse_module(testsupport::read_fixture("mutual_recursion.wat"));
    REQUIRE(mod.functions.size() == 3);
    for (const auto& fn : mod.functions) CHECK(fn.loop_extents.empty());
    CHECK(mod.functions[0].callees == std::set<int>{1});
    CHECK(mod.functions[1].callees == std::set<int>{0});
    CHECK(mod.functions[2].callees == std::set<int>{0});
}

TEST_CASE("unresolved call target is an error") {
    CHECK_THROWS_AS(parse_module("(module (func $a call $missing))"), ParseError);
    CHECK_THROWS_AS(parse_module("(module (func $a call 7))"), ParseError);
}

TEST_CASE("constructs outside the grammar subset are flagged") {
    CHECK_THROWS_AS(parse_module("(module (func $a i32.atomic.load drop))"),
                    UnsupportedConstruct);
    CHECK_THROWS_AS(parse_module("(module (func $a v128.const drop))"),
                    UnsupportedConstruct);
    try {
        parse_module("(module\n  (func $a\n    i32.atomic.load\n    drop))");
        FAIL("expected UnsupportedConstruct");
    } catch (const UnsupportedConstruct& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("malformed input reports position") {
    try {
        parse_module("(module\n  (func $a");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line >= 0);
    }
    CHECK_THROWS_AS(parse_module("(module) (module)"), ParseError);
    CHECK_THROWS_AS(parse_module("  "), ParseError);
}

TEST_CASE("value types map to c types") {
    CHECK(to_c_type(ValueType::I32) == "int");
    CHECK(to_c_type(ValueType::I64) == "long long");
    CHECK(to_c_type(ValueType::F32) == "float");
    CHECK(to_c_type(ValueType::F64) == "double");
    FunctionSignature sig;
    sig.name = "go";
    CHECK(signature_to_declaration(sig) == "void go(void);");
}
