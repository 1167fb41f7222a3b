// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sys/stat.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "watc/errors.hpp"
#include "watc/exec/proc.hpp"

namespace watc::exec {

struct ToolchainConfig {
    // {in} and {out} expand in the compile template, {prog} in the run one.
    std::string compile_template = "emcc {in} -o {out}";
    std::string run_template = "wasmtime {prog}";
    std::string artifact_suffix = ".wasm";
    double compile_timeout_seconds = 60.0;
    double run_timeout_seconds = 10.0;
    std::string scratch_root;  // empty: TMPDIR or /tmp
    bool byte_exact = true;    // false: compare line-normalized stdout
    int parallel = 1;
};

/// One program's fate through the compile and execute phases.
struct ExecResult {
    bool compiled = false;
    bool executed = false;
    int exit_code = -1;
    std::string stdout_bytes;
    std::string stderr_bytes;
    std::string diagnostics;  // compile-phase stderr
    double wall_seconds = 0.0;
    bool timed_out = false;
};

struct ConsistencyVerdict {
    bool recompiled = false;
    bool re_executed = false;
    bool output_consistent = false;
};

namespace detail {

inline bool file_exists(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode);
}

inline std::string normalized_lines(const std::string& bytes) {
    std::string out;
    std::string line;
    auto flush = [&]() {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        out += line;
        out += '\n';
        line.clear();
    };
    for (char ch : bytes) {
        if (ch == '\n') flush();
        else line += ch;
    }
    if (!line.empty()) flush();
    return out;
}

}  // namespace detail

/// Creates a fresh private directory for one run's artifacts.
inline std::string make_scratch_dir(const std::string& root = "") {
    std::string base = root;
    if (base.empty()) {
        const char* tmp = std::getenv("TMPDIR");
        base = tmp ? tmp : "/tmp";
    }
    std::string pattern = base + "/watc-exec-XXXXXX";
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    char* made = ::mkdtemp(buf.data());
    if (!made) throw Error("cannot create scratch directory under " + base);
    return made;
}

/// Compiles one C file to an executable artifact in the scratch directory.
/// Returns the compile-phase result; the artifact path lands in *artifact.
inline ExecResult recompile(const std::string& c_path, const ToolchainConfig& config,
                            const std::string& scratch_dir, std::string* artifact = nullptr) {
    std::string out_path = scratch_dir + "/prog" + config.artifact_suffix;
    if (artifact) *artifact = out_path;
    std::vector<std::string> argv =
        expand_template(config.compile_template, {{"in", c_path}, {"out", out_path}});
    if (argv.empty() || !command_exists(argv[0]))
        throw ToolchainMissing(argv.empty() ? "(empty compile template)" : argv[0]);

    RunSpec spec;
    spec.argv = argv;
    spec.timeout_seconds = config.compile_timeout_seconds;
    RunOutcome run = run_process(spec);

    ExecResult result;
    result.diagnostics = run.stderr_bytes;
    result.timed_out = run.timed_out;
    result.wall_seconds = run.wall_seconds;
    result.exit_code = run.exit_code;
    result.compiled =
        run.started && run.exited && run.exit_code == 0 && detail::file_exists(out_path);
    return result;
}

/// Runs one compiled artifact under the configured runtime with bounded time
/// and captured output. Signal death and timeouts count as not executed.
inline ExecResult run_module(const std::string& artifact_path, const std::string& stdin_bytes,
                             const ToolchainConfig& config) {
    std::vector<std::string> argv = expand_template(config.run_template, {{"prog", artifact_path}});
    if (argv.empty()) throw RuntimeMissing("(empty run template)");
    // A template like "{prog}" resolves to the artifact itself; otherwise the
    // runtime command must exist.
    if (!command_exists(argv[0])) throw RuntimeMissing(argv[0]);

    RunSpec spec;
    spec.argv = argv;
    spec.stdin_bytes = stdin_bytes;
    spec.timeout_seconds = config.run_timeout_seconds;
    RunOutcome run = run_process(spec);

    ExecResult result;
    result.compiled = true;  // caller only gets here with an artifact in hand
    result.stdout_bytes = run.stdout_bytes;
    result.stderr_bytes = run.stderr_bytes;
    result.exit_code = run.exit_code;
    result.timed_out = run.timed_out;
    result.wall_seconds = run.wall_seconds;
    result.executed = run.started && run.exited && !run.timed_out;
    return result;
}

/// Collapses two execution results into the three Table-style flags. The
/// chain is monotone by construction: consistency needs re-execution, which
/// needs recompilation.
inline ConsistencyVerdict judge(const ExecResult& original, const ExecResult& recompiled,
                                bool byte_exact = true) {
    ConsistencyVerdict verdict;
    verdict.recompiled = recompiled.compiled;
    verdict.re_executed = verdict.recompiled && recompiled.executed;
    if (verdict.re_executed && original.executed) {
        bool same_out = byte_exact
                            ? original.stdout_bytes == recompiled.stdout_bytes
                            : detail::normalized_lines(original.stdout_bytes) ==
                                  detail::normalized_lines(recompiled.stdout_bytes);
        verdict.output_consistent = same_out && original.exit_code == recompiled.exit_code;
    }
    return verdict;
}

struct PairOutcome {
    std::string name;
    ExecResult original;
    ExecResult recompiled;
    ConsistencyVerdict verdict;
    std::string note;  // first failure reason, empty when consistent
};

/// Compiles and runs the original and the decompiled C side by side in a
/// private scratch directory. Inputs are never touched.
inline PairOutcome run_pair(const std::string& name, const std::string& original_c_path,
                            const std::string& decompiled_c_path, const std::string& stdin_bytes,
                            const ToolchainConfig& config) {
    PairOutcome outcome;
    outcome.name = name;
    std::string scratch = make_scratch_dir(config.scratch_root);
    std::string orig_dir = scratch + "/orig";
    std::string dec_dir = scratch + "/dec";
    ::mkdir(orig_dir.c_str(), 0700);
    ::mkdir(dec_dir.c_str(), 0700);

    std::string orig_artifact, dec_artifact;
    ExecResult orig_compile = recompile(original_c_path, config, orig_dir, &orig_artifact);
    if (orig_compile.compiled) {
        outcome.original = run_module(orig_artifact, stdin_bytes, config);
        outcome.original.diagnostics = orig_compile.diagnostics;
    } else {
        outcome.original = orig_compile;
        outcome.note = "original does not compile";
    }

    ExecResult dec_compile = recompile(decompiled_c_path, config, dec_dir, &dec_artifact);
    if (dec_compile.compiled) {
        outcome.recompiled = run_module(dec_artifact, stdin_bytes, config);
        outcome.recompiled.diagnostics = dec_compile.diagnostics;
    } else {
        outcome.recompiled = dec_compile;
        if (outcome.note.empty()) outcome.note = "decompiled code does not compile";
    }

    outcome.verdict = judge(outcome.original, outcome.recompiled, config.byte_exact);
    if (outcome.note.empty() && !outcome.verdict.output_consistent)
        outcome.note = outcome.verdict.re_executed ? "output differs" : "re-execution failed";
    if (outcome.verdict.output_consistent) outcome.note.clear();
    return outcome;
}

struct BatchItem {
    std::string name;
    std::string original_c_path;
    std::string decompiled_c_path;
    std::string stdin_bytes;
};

struct BatchReport {
    std::vector<PairOutcome> rows;
    double recompiled_pct = 0.0;
    double re_executed_pct = 0.0;
    double consistent_pct = 0.0;
};

/// Runs every pair, optionally across a bounded pool, and aggregates the
/// three rates. Row order always matches item order.
inline BatchReport run_batch(const std::vector<BatchItem>& items, const ToolchainConfig& config) {
    BatchReport report;
    report.rows.resize(items.size());
    if (config.parallel > 1 && items.size() > 1) {
        std::mutex queue_mutex;
        std::size_t next = 0;
        auto worker = [&]() {
            for (;;) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> hold(queue_mutex);
                    if (next >= items.size()) return;
                    mine = next++;
                }
                const BatchItem& item = items[mine];
                report.rows[mine] = run_pair(item.name, item.original_c_path,
                                             item.decompiled_c_path, item.stdin_bytes, config);
            }
        };
        std::size_t n =
            std::min<std::size_t>(static_cast<std::size_t>(config.parallel), items.size());
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < items.size(); ++i)
            report.rows[i] = run_pair(items[i].name, items[i].original_c_path,
                                      items[i].decompiled_c_path, items[i].stdin_bytes, config);
    }
    if (!report.rows.empty()) {
        double n = static_cast<double>(report.rows.size());
        double rc = 0, re = 0, oc = 0;
        for (const auto& row : report.rows) {
            if (row.verdict.recompiled) ++rc;
            if (row.verdict.re_executed) ++re;
            if (row.verdict.output_consistent) ++oc;
        }
        report.recompiled_pct = rc / n * 100.0;
        report.re_executed_pct = re / n * 100.0;
        report.consistent_pct = oc / n * 100.0;
    }
    return report;
}

}  // namespace watc::exec
