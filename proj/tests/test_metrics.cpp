// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "support/ted_oracle.hpp"
#include "watc/c/parser.hpp"
#include "watc/metrics/metrics.hpp"
#include "watc/metrics/ted.hpp"

using namespace watc;
using metrics::SkelNode;

namespace {

SkelNode leaf(std::string label) { return SkelNode{std::move(label), {}}; }

SkelNode node(std::string label, std::vector<SkelNode> children) {
    return SkelNode{std::move(label), std::move(children)};
}

}  // namespace

TEST_CASE("tree edit distance spot values") {
    SkelNode a = node("f", {leaf("x"), leaf("y")});

    SECTION("identical trees cost nothing") {
        REQUIRE(metrics::tree_edit_distance(a, a) == 0);
    }
    SECTION("single relabel costs one") {
        SkelNode b = node("f", {leaf("x"), leaf("z")});
        REQUIRE(metrics::tree_edit_distance(a, b) == 1);
    }
    SECTION("single delete costs one") {
        SkelNode b = node("f", {leaf("x")});
        REQUIRE(metrics::tree_edit_distance(a, b) == 1);
    }
    SECTION("root relabel on single nodes") {
        REQUIRE(metrics::tree_edit_distance(leaf("a"), leaf("b")) == 1);
        REQUIRE(metrics::tree_edit_distance(leaf("a"), leaf("a")) == 0);
    }
    SECTION("chain versus star") {
        // chain a-b-c vs star a(b,c): the chain's c must move up, one edit.
        SkelNode chain = node("a", {node("b", {leaf("c")})});
        SkelNode star = node("a", {leaf("b"), leaf("c")});
        std::size_t d = metrics::tree_edit_distance(chain, star);
        REQUIRE(d == testsupport::ted_oracle(chain, star));
    }
}

TEST_CASE("tree edit distance agrees with the brute-force recurrence") {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (int trial = 0; trial < 60; ++trial) {
        SkelNode a = testsupport::random_tree(state, 8);
        SkelNode b = testsupport::random_tree(state, 8);
        std::size_t fast = metrics::tree_edit_distance(a, b);
        std::size_t slow = testsupport::ted_oracle(a, b);
        INFO("trial " << trial);
        REQUIRE(fast == slow);
    }
}

TEST_CASE("edit similarity endpoints") {
    SECTION("identical programs score one") {
        const std::string src = "int f(int a) { return a + 1; }\n";
        c::CUnit u1 = c::parse_c(src);
        c::CUnit u2 = c::parse_c(src);
        REQUIRE(metrics::aed_similarity(u1.root, u2.root) == 1.0);
    }
    SECTION("full relabel of same shape scores zero") {
        SkelNode a = node("p", {leaf("q"), leaf("r")});
        SkelNode b = node("x", {leaf("y"), leaf("z")});
        REQUIRE(metrics::aed_similarity(a, b) == 0.0);
    }
    SECTION("similarity never drops below zero") {
        SkelNode one = leaf("a");
        SkelNode big = node("x", {leaf("y"), leaf("z"), node("w", {leaf("v")})});
        double s = metrics::aed_similarity(one, big);
        REQUIRE(s >= 0.0);
        REQUIRE(s <= 1.0);
    }
    SECTION("renaming identifiers does not change the skeleton") {
        c::CUnit u1 = c::parse_c("int f(int a) { int x = a; return x * 2; }\n");
        c::CUnit u2 = c::parse_c("int f(int local_8) { int local_12 = local_8; return local_12 * 2; }\n");
        REQUIRE(metrics::aed_similarity(u1.root, u2.root) == 1.0);
    }
}

TEST_CASE("cyclomatic complexity counts decision points") {
    SECTION("straight-line function is one") {
        c::CUnit u = c::parse_c("int f(void) { int x = 1; x = x + 2; return x; }\n");
        REQUIRE(u.functions.size() == 1);
        REQUIRE(metrics::cyclomatic(u.functions[0].node) == 1);
    }
    SECTION("two loops, three ifs, one short-circuit gives seven") {
        const std::string src =
            "int f(int n) {\n"
            "  int total = 0;\n"
            "  for (int i = 0; i < n; i++) {\n"
            "    if (i % 2 == 0 && i > 2) total += i;\n"
            "    if (i == 5) total--;\n"
            "  }\n"
            "  while (total > 100) {\n"
            "    if (total % 3) total -= 2;\n"
            "    total--;\n"
            "  }\n"
            "  return total;\n"
            "}\n";
        c::CUnit u = c::parse_c(src);
        REQUIRE(u.functions.size() == 1);
        REQUIRE(metrics::cyclomatic(u.functions[0].node) == 7);
    }
    SECTION("switch cases each add one") {
        const std::string src =
            "int f(int k) {\n"
            "  switch (k) {\n"
            "    case 1: return 10;\n"
            "    case 2: return 20;\n"
            "    default: return 0;\n"
            "  }\n"
            "}\n";
        c::CUnit u = c::parse_c(src);
        REQUIRE(metrics::cyclomatic(u.functions[0].node) == 3);
    }
    SECTION("do-while and ternary each add one") {
        const std::string src =
            "int f(int k) {\n"
            "  do { k--; } while (k > 0);\n"
            "  return k ? 1 : 0;\n"
            "}\n";
        c::CUnit u = c::parse_c(src);
        REQUIRE(metrics::cyclomatic(u.functions[0].node) == 3);
    }
}

TEST_CASE("complexity similarity averages matched ratios") {
    const std::string src =
        "int a(int n) { if (n) return 1; return 0; }\n"
        "int b(int n) { while (n) n--; return n; }\n";

    SECTION("identical pair scores one") {
        c::CUnit s = c::parse_c(src);
        c::CUnit d = c::parse_c(src);
        REQUIRE(metrics::ccn_similarity_value(s, d) == 1.0);
    }
    SECTION("missing function scores zero for its slot") {
        c::CUnit s = c::parse_c(src);
        c::CUnit d = c::parse_c("int a(int n) { if (n) return 1; return 0; }\n");
        REQUIRE(metrics::ccn_similarity_value(s, d) == Catch::Approx(0.5));
    }
    SECTION("complexity mismatch scales by min over max") {
        // source a has V=2, decompiled a has V=4: ratio 0.5.
        c::CUnit s = c::parse_c("int a(int n) { if (n) return 1; return 0; }\n");
        c::CUnit d = c::parse_c(
            "int a(int n) { if (n) { if (n > 1) return 2; } if (n < 0) return -1; return 0; }\n");
        REQUIRE(metrics::ccn_similarity_value(s, d) == Catch::Approx(0.5));
    }
    SECTION("extra decompiled functions are reported, not scored") {
        c::CUnit s = c::parse_c("int a(void) { return 1; }\n");
        c::CUnit d = c::parse_c("int a(void) { return 1; }\nint ghost(void) { return 2; }\n");
        std::vector<std::string> extra;
        double v = metrics::ccn_similarity_value(s, d, &extra);
        REQUIRE(v == 1.0);
        REQUIRE(extra == std::vector<std::string>{"ghost"});
    }
}

TEST_CASE("cosine similarity over token frequencies") {
    SECTION("identical text scores one") {
        const std::string t = "int f(void) { return 42; }";
        REQUIRE(metrics::cosine_similarity_value(t, t) == Catch::Approx(1.0));
    }
    SECTION("disjoint token sets score zero") {
        REQUIRE(metrics::cosine_similarity_value("alpha beta", "gamma delta") ==
                Catch::Approx(0.0));
    }
    SECTION("empty versus empty is one, empty versus text is zero") {
        REQUIRE(metrics::cosine_similarity_value("", "") == 1.0);
        REQUIRE(metrics::cosine_similarity_value("", "int x;") == 0.0);
    }
    SECTION("partial overlap lands strictly between") {
        double v = metrics::cosine_similarity_value("int x = 1;", "int y = 1;");
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("composite n-gram score") {
    const std::string src = "int f(int a) { if (a > 0) { return a; } return -a; }\n";

    SECTION("identity scores one in every component") {
        c::CUnit u = c::parse_c(src);
        auto cb = metrics::codebleu_value(src, u, src, c::parse_c(src));
        REQUIRE(cb.bleu == Catch::Approx(1.0));
        REQUIRE(cb.weighted_bleu == Catch::Approx(1.0));
        REQUIRE(cb.ast_match == Catch::Approx(1.0));
        REQUIRE(cb.dataflow_match == Catch::Approx(1.0));
        REQUIRE(cb.total == Catch::Approx(1.0));
    }
    SECTION("unrelated text scores near zero") {
        const std::string junk = "float z(float q) { while (q < 9.5) q *= 3.0; return q; }\n";
        auto cb = metrics::codebleu_value(src, c::parse_c(src), junk, c::parse_c(junk));
        REQUIRE(cb.total < 0.5);
    }
    SECTION("renamed variables keep the tree and dataflow quarters") {
        const std::string renamed =
            "int f(int local_4) { if (local_4 > 0) { return local_4; } return -local_4; }\n";
        auto cb = metrics::codebleu_value(src, c::parse_c(src), renamed, c::parse_c(renamed));
        REQUIRE(cb.ast_match == Catch::Approx(1.0));
        REQUIRE(cb.dataflow_match == Catch::Approx(1.0));
        REQUIRE(cb.bleu < 1.0);
    }
}

TEST_CASE("volume growth measurement") {
    SECTION("identical volume is zero percent") {
        REQUIRE(metrics::bloat_percent_value("a;\nb;\n", "x;\ny;\n") == Catch::Approx(0.0));
    }
    SECTION("doubling the lines is one hundred percent") {
        REQUIRE(metrics::bloat_percent_value("a;\n", "a;\nb;\n") == Catch::Approx(100.0));
    }
    SECTION("blank lines do not count") {
        REQUIRE(metrics::bloat_percent_value("a;\n\n\nb;\n", "a;\nb;\n") == Catch::Approx(0.0));
    }
    SECTION("shrinking goes negative") {
        REQUIRE(metrics::bloat_percent_value("a;\nb;\n", "a;\n") == Catch::Approx(-50.0));
    }
}

TEST_CASE("syntactic completeness of recovered output") {
    SECTION("clean output scores one") {
        c::CUnit u = c::parse_c("int f(void) { return 1; }\nint g(void) { return 2; }\n");
        auto v = metrics::syntax_completeness_value(u);
        REQUIRE(v.has_value());
        REQUIRE(*v == Catch::Approx(1.0));
    }
    SECTION("empty output has no score") {
        c::CUnit u = c::parse_c("");
        REQUIRE_FALSE(metrics::syntax_completeness_value(u).has_value());
    }
    SECTION("a broken function drags the ratio down") {
        c::CUnit u = c::parse_c("int f(void) { return 1; }\nint g(void) { return 1 + ; }\n");
        auto v = metrics::syntax_completeness_value(u);
        REQUIRE(v.has_value());
        REQUIRE(*v < 1.0);
    }
}

TEST_CASE("function completeness tracks recovered names") {
    const std::string src = "int a(void) { return 1; }\nint b(void) { return 2; }\n";
    c::CUnit s = c::parse_c(src);

    SECTION("all present scores one") {
        c::CUnit d = c::parse_c(src);
        REQUIRE(metrics::function_completeness_value(s, d) == 1.0);
    }
    SECTION("a missing function halves the score") {
        c::CUnit d = c::parse_c("int a(void) { return 1; }\n");
        REQUIRE(metrics::function_completeness_value(s, d) == Catch::Approx(0.5));
    }
    SECTION("functions flagged incomplete do not count") {
        c::CUnit d = c::parse_c(src);
        REQUIRE(metrics::function_completeness_value(s, d, {"b"}) == Catch::Approx(0.5));
    }
}

TEST_CASE("full battery on an identity pair is exact") {
    const std::string src =
        "int sum_upto(int n) {\n"
        "  int total = 0;\n"
        "  int i = 0;\n"
        "  while (i <= n) {\n"
        "    total += i;\n"
        "    i++;\n"
        "  }\n"
        "  return total;\n"
        "}\n"
        "int twice(int x) { return x * 2; }\n";
    metrics::MetricReport r = metrics::score_pair(src, src);
    REQUIRE(r.aed_similarity == 1.0);
    REQUIRE(r.ccn_similarity == 1.0);
    REQUIRE(r.cosine_similarity == Catch::Approx(1.0));
    REQUIRE(r.codebleu == Catch::Approx(1.0));
    REQUIRE(r.bloat_percent == Catch::Approx(0.0));
    REQUIRE(r.syntax_completeness.has_value());
    REQUIRE(*r.syntax_completeness == 1.0);
    REQUIRE(r.function_completeness == 1.0);
    REQUIRE(r.source_functions == 2);
    REQUIRE(r.decompiled_functions == 2);
    REQUIRE(r.extra_functions.empty());
    REQUIRE(r.source_parse_ok);
    REQUIRE(r.decompiled_parse_ok);
}

TEST_CASE("battery degrades smoothly on a lossy pair") {
    const std::string src =
        "int count_down(int n) {\n"
        "  while (n > 0) n--;\n"
        "  return n;\n"
        "}\n";
    const std::string dec =
        "int count_down(int local_4) {\n"
        "  int local_8 = 0;\n"
        "  while (local_4 > 0) {\n"
        "    local_4--;\n"
        "    local_8++;\n"
        "  }\n"
        "  return local_4;\n"
        "}\n";
    metrics::MetricReport r = metrics::score_pair(src, dec);
    REQUIRE(r.aed_similarity > 0.0);
    REQUIRE(r.aed_similarity < 1.0);
    REQUIRE(r.ccn_similarity == 1.0);
    REQUIRE(r.bloat_percent > 0.0);
    REQUIRE(r.function_completeness == 1.0);
}
