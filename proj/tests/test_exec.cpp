// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "support/fixtures.hpp"
#include "watc/exec/harness.hpp"
#include "watc/exec/proc.hpp"

using namespace watc;

namespace {

exec::ToolchainConfig native_config() {
    exec::ToolchainConfig config;
    config.compile_template = "cc {in} -o {out}";
    config.run_template = "{prog}";
    config.artifact_suffix = ".out";
    config.run_timeout_seconds = 5.0;
    return config;
}

std::string write_scratch_file(const std::string& dir, const std::string& name,
                               const std::string& content) {
    std::string path = dir + "/" + name;
    testsupport::write_file(path, content);
    return path;
}

}  // namespace

TEST_CASE("command template expansion") {
    auto argv = exec::expand_template("cc {in} -o {out}", {{"in", "a.c"}, {"out", "a.out"}});
    REQUIRE(argv == std::vector<std::string>{"cc", "a.c", "-o", "a.out"});

    SECTION("unknown keys stay literal") {
        auto keep = exec::expand_template("run {prog} {flag}", {{"prog", "p"}});
        REQUIRE(keep == std::vector<std::string>{"run", "p", "{flag}"});
    }
    SECTION("template may be a bare placeholder") {
        auto bare = exec::expand_template("{prog}", {{"prog", "/bin/true"}});
        REQUIRE(bare == std::vector<std::string>{"/bin/true"});
    }
}

TEST_CASE("subprocess capture and timeout") {
    SECTION("stdout and exit code are captured") {
        exec::RunSpec spec;
        spec.argv = {"/bin/sh", "-c", "printf Hi; exit 3"};
        exec::RunOutcome run = exec::run_process(spec);
        REQUIRE(run.started);
        REQUIRE(run.exited);
        REQUIRE(run.exit_code == 3);
        REQUIRE(run.stdout_bytes == "Hi");
        REQUIRE_FALSE(run.timed_out);
    }
    SECTION("stdin reaches the child") {
        exec::RunSpec spec;
        spec.argv = {"/bin/cat"};
        spec.stdin_bytes = "abc";
        exec::RunOutcome run = exec::run_process(spec);
        REQUIRE(run.stdout_bytes == "abc");
        REQUIRE(run.exit_code == 0);
    }
    SECTION("stderr is kept separate") {
        exec::RunSpec spec;
        spec.argv = {"/bin/sh", "-c", "echo out; echo err 1>&2"};
        exec::RunOutcome run = exec::run_process(spec);
        REQUIRE(run.stdout_bytes == "out\n");
        REQUIRE(run.stderr_bytes == "err\n");
    }
    SECTION("a hung child is killed at the deadline") {
        exec::RunSpec spec;
        spec.argv = {"/bin/sh", "-c", "sleep 30"};
        spec.timeout_seconds = 0.3;
        exec::RunOutcome run = exec::run_process(spec);
        REQUIRE(run.timed_out);
        REQUIRE_FALSE(run.exited);
        REQUIRE(run.wall_seconds < 5.0);
    }
}

TEST_CASE("recompilation of C sources") {
    exec::ToolchainConfig config = native_config();
    std::string scratch = exec::make_scratch_dir();

    SECTION("a valid program compiles") {
        std::string src = write_scratch_file(
            scratch, "hello.c", "#include <stdio.h>\nint main(void) { puts(\"Hi\"); return 0; }\n");
        std::string artifact;
        exec::ExecResult r = exec::recompile(src, config, scratch, &artifact);
        REQUIRE(r.compiled);
        REQUIRE(exec::detail::file_exists(artifact));
    }
    SECTION("an undefined placeholder identifier fails with a diagnostic") {
        std::string src = write_scratch_file(
            scratch, "broken.c", "int main(void) { return STR_1024; }\n");
        exec::ExecResult r = exec::recompile(src, config, scratch);
        REQUIRE_FALSE(r.compiled);
        REQUIRE(r.diagnostics.find("STR_1024") != std::string::npos);
    }
    SECTION("a missing compiler is an error, not a verdict") {
        exec::ToolchainConfig missing = config;
        missing.compile_template = "no-such-compiler-xyz {in} -o {out}";
        std::string src = write_scratch_file(scratch, "any.c", "int main(void){return 0;}\n");
        REQUIRE_THROWS_AS(exec::recompile(src, missing, scratch), ToolchainMissing);
    }
}

TEST_CASE("execution of compiled artifacts") {
    exec::ToolchainConfig config = native_config();
    std::string scratch = exec::make_scratch_dir();

    SECTION("output and exit code come back") {
        std::string src = write_scratch_file(
            scratch, "hi.c", "#include <stdio.h>\nint main(void) { printf(\"Hi\"); return 0; }\n");
        std::string artifact;
        REQUIRE(exec::recompile(src, config, scratch, &artifact).compiled);
        exec::ExecResult r = exec::run_module(artifact, "", config);
        REQUIRE(r.executed);
        REQUIRE(r.stdout_bytes == "Hi");
        REQUIRE(r.exit_code == 0);
    }
    SECTION("stdin flows through an echo program") {
        std::string src = write_scratch_file(
            scratch, "echo.c",
            "#include <stdio.h>\nint main(void) { int c; while ((c = getchar()) != EOF) "
            "putchar(c); return 0; }\n");
        std::string artifact;
        REQUIRE(exec::recompile(src, config, scratch, &artifact).compiled);
        exec::ExecResult r = exec::run_module(artifact, "abc", config);
        REQUIRE(r.executed);
        REQUIRE(r.stdout_bytes == "abc");
    }
    SECTION("an infinite loop times out and does not count as executed") {
        std::string src = write_scratch_file(
            scratch, "spin.c", "int main(void) { for (;;) {} return 0; }\n");
        std::string artifact;
        exec::ToolchainConfig fast = config;
        fast.run_timeout_seconds = 0.3;
        REQUIRE(exec::recompile(src, fast, scratch, &artifact).compiled);
        exec::ExecResult r = exec::run_module(artifact, "", fast);
        REQUIRE(r.timed_out);
        REQUIRE_FALSE(r.executed);
    }
    SECTION("a missing runtime is an error") {
        exec::ToolchainConfig missing = config;
        missing.run_template = "no-such-runtime-xyz {prog}";
        REQUIRE_THROWS_AS(exec::run_module("/bin/true", "", missing), RuntimeMissing);
    }
}

TEST_CASE("consistency judgement") {
    exec::ExecResult good;
    good.compiled = true;
    good.executed = true;
    good.exit_code = 0;
    good.stdout_bytes = "Hi\n";

    SECTION("identical outputs give the full chain") {
        exec::ConsistencyVerdict v = exec::judge(good, good);
        REQUIRE(v.recompiled);
        REQUIRE(v.re_executed);
        REQUIRE(v.output_consistent);
    }
    SECTION("compile failure zeroes the chain") {
        exec::ExecResult bad;
        exec::ConsistencyVerdict v = exec::judge(good, bad);
        REQUIRE_FALSE(v.recompiled);
        REQUIRE_FALSE(v.re_executed);
        REQUIRE_FALSE(v.output_consistent);
    }
    SECTION("different stdout breaks only the last link") {
        exec::ExecResult other = good;
        other.stdout_bytes = "Bye\n";
        exec::ConsistencyVerdict v = exec::judge(good, other);
        REQUIRE(v.recompiled);
        REQUIRE(v.re_executed);
        REQUIRE_FALSE(v.output_consistent);
    }
    SECTION("different exit codes break consistency too") {
        exec::ExecResult other = good;
        other.exit_code = 1;
        exec::ConsistencyVerdict v = exec::judge(good, other);
        REQUIRE(v.re_executed);
        REQUIRE_FALSE(v.output_consistent);
    }
    SECTION("line-normalized mode forgives trailing whitespace") {
        exec::ExecResult other = good;
        other.stdout_bytes = "Hi \n";
        REQUIRE_FALSE(exec::judge(good, other, true).output_consistent);
        REQUIRE(exec::judge(good, other, false).output_consistent);
    }
}

TEST_CASE("paired runs and batch aggregation") {
    exec::ToolchainConfig config = native_config();
    std::string scratch = exec::make_scratch_dir();
    std::string src = write_scratch_file(
        scratch, "prog.c",
        "#include <stdio.h>\nint main(void) { printf(\"%d\\n\", 6 * 7); return 0; }\n");
    std::string broken = write_scratch_file(
        scratch, "broken.c", "int main(void) { return STR_4096; }\n");

    SECTION("the identity pair is fully consistent") {
        exec::PairOutcome pair = exec::run_pair("prog", src, src, "", config);
        REQUIRE(pair.verdict.recompiled);
        REQUIRE(pair.verdict.re_executed);
        REQUIRE(pair.verdict.output_consistent);
        REQUIRE(pair.note.empty());
    }
    SECTION("a broken candidate reports the failure stage") {
        exec::PairOutcome pair = exec::run_pair("prog", src, broken, "", config);
        REQUIRE_FALSE(pair.verdict.recompiled);
        REQUIRE(pair.note == "decompiled code does not compile");
    }
    SECTION("batch rates are monotone") {
        std::vector<exec::BatchItem> items = {
            {"ok", src, src, ""},
            {"broken", src, broken, ""},
        };
        exec::BatchReport report = exec::run_batch(items, config);
        REQUIRE(report.rows.size() == 2);
        REQUIRE(report.recompiled_pct == 50.0);
        REQUIRE(report.re_executed_pct == 50.0);
        REQUIRE(report.consistent_pct == 50.0);
        REQUIRE(report.consistent_pct <= report.re_executed_pct);
        REQUIRE(report.re_executed_pct <= report.recompiled_pct);
    }
}
