// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "watc/config.hpp"
#include "watc/errors.hpp"
#include "watc/exec/harness.hpp"
#include "watc/forge.hpp"
#include "watc/metrics/metrics.hpp"
#include "watc/pipeline/pipeline.hpp"
#include "watc/rename.hpp"
#include "watc/slicer.hpp"
#include "watc/text.hpp"
#include "watc/wat/parser.hpp"

namespace watc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

namespace fs = std::filesystem;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

/// Report sink: a file path, or "-" for stdout.
class ReportSink {
public:
    explicit ReportSink(const std::string& target) : target_(target) {}
    void row(const nlohmann::json& j) { lines_ += j.dump() + "\n"; }
    void flush() {
        if (target_ == "-" || target_.empty())
            std::cout << lines_;
        else
            write_file(target_, lines_);
    }

private:
    std::string target_;
    std::string lines_;
};

/// All regular files under root with the given suffix, as sorted
/// root-relative paths. Sorting keeps reports byte-stable across runs.
inline std::vector<std::string> files_with_suffix(const std::string& root,
                                                  const std::string& suffix,
                                                  const std::string& excluded_suffix = "") {
    std::vector<std::string> out;
    fs::path base(root);
    if (!fs::exists(base)) throw Error("no such directory: " + root);
    for (const auto& entry : fs::recursive_directory_iterator(base)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), base).generic_string();
        if (!text::ends_with(rel, suffix)) continue;
        if (!excluded_suffix.empty() && text::ends_with(rel, excluded_suffix)) continue;
        out.push_back(rel);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string strip_suffix(const std::string& value, const std::string& suffix) {
    return text::ends_with(value, suffix) ? value.substr(0, value.size() - suffix.size()) : value;
}

/// The decompiled candidate for a source file: prefers `{stem}{decomp_suffix}`
/// and falls back to the mirrored file name.
inline std::optional<std::string> find_decompiled(const std::string& dec_root,
                                                  const std::string& rel_c,
                                                  const std::string& decomp_suffix) {
    std::string stem = strip_suffix(rel_c, ".c");
    fs::path with_suffix = fs::path(dec_root) / (stem + decomp_suffix);
    if (fs::exists(with_suffix)) return with_suffix.string();
    fs::path mirrored = fs::path(dec_root) / rel_c;
    if (fs::exists(mirrored)) return mirrored.string();
    return std::nullopt;
}

}  // namespace detail

/// Writes one file per block plus a manifest of ids, extents, and marker
/// edges.
inline int cmd_slice(const std::string& input, const std::string& out_dir,
                     const RunConfig& /*config*/) {
    wat::WatModule mod = wat::parse_module(detail::read_file(input));
    SlicedProgram program = slice_program(mod);

    detail::ReportSink manifest((std::filesystem::path(out_dir) / "manifest.jsonl").string());
    for (const auto& fn : program.functions) {
        const wat::WatFunction& wf = *mod.function_at(fn.index);
        for (const auto& snippet : fn.snippets) {
            std::string file_name =
                snippet.function + "_" + std::to_string(snippet.block_id) + ".wat";
            detail::write_file((std::filesystem::path(out_dir) / file_name).string(),
                               snippet.text);
            int start, end;
            if (snippet.block_id == 0) {
                start = 0;
                end = wf.body_lines.empty() ? 0 : static_cast<int>(wf.body_lines.size()) - 1;
            } else {
                const wat::LoopExtent& extent =
                    wf.loop_extents[static_cast<std::size_t>(snippet.block_id) - 1];
                start = extent.start_line;
                end = extent.end_line;
            }
            manifest.row({{"schema", "watc.slice.v1"},
                          {"function", snippet.function},
                          {"block_id", snippet.block_id},
                          {"file", file_name},
                          {"start_line", wf.first_source_line + start + 1},
                          {"end_line", wf.first_source_line + end + 1},
                          {"children", snippet.child_blocks}});
        }
    }
    manifest.flush();
    return kExitOk;
}

/// Runs the whole decompilation pipeline on one wat file and writes the C
/// output plus a per-snippet report.
inline int cmd_decompile(const std::string& input, const std::string& out_path,
                         const RunConfig& config) {
    wat::WatModule mod = wat::parse_module(detail::read_file(input));

    std::string mock_jsonl;
    if (config.backend.endpoint == "mock" && !config.backend.mock_table_path.empty())
        mock_jsonl = detail::read_file(config.backend.mock_table_path);
    std::unique_ptr<pipeline::Backend> backend =
        pipeline::make_backend(config.backend, mock_jsonl);

    pipeline::DecompileOptions options;
    options.max_prompt_tokens = config.max_prompt_tokens;
    options.record_timings = config.record_timings;
    options.parallel_functions = config.parallel_functions;
    pipeline::DecompiledUnit unit = pipeline::decompile_module(mod, *backend, options);

    std::string target = out_path;
    if (target.empty())
        target = detail::strip_suffix(input, ".wat") + config.decomp_suffix;

    bool any_ok = false;
    bool any_failed = false;
    for (const auto& t : unit.transcripts) {
        if (t.ok) any_ok = true;
        else any_failed = true;
    }
    // A run where nothing decompiled produces no C at all, only the report.
    detail::write_file(target, any_ok || unit.transcripts.empty() ? unit.c_text : "");

    detail::ReportSink report(target + ".report.jsonl");
    for (const auto& t : unit.transcripts)
        report.row({{"schema", "watc.decompile.v1"},
                    {"function", t.function},
                    {"block_id", t.block_id},
                    {"ok", t.ok},
                    {"error", t.error},
                    {"prompt_tokens", t.prompt_tokens},
                    {"seconds", t.seconds}});
    std::vector<std::string> incomplete(unit.incomplete_functions.begin(),
                                        unit.incomplete_functions.end());
    report.row({{"schema", "watc.decompile.summary.v1"},
                {"output", target},
                {"functions", unit.functions.size()},
                {"incomplete", incomplete},
                {"recovered_strings", unit.recovered_strings},
                {"unresolved_placeholders", unit.unresolved_placeholders}});
    report.flush();
    return any_failed || !unit.incomplete_functions.empty() ? kExitPartial : kExitOk;
}

namespace detail {

inline nlohmann::json eval_row(const std::string& rel, const metrics::MetricReport& r) {
    nlohmann::json row = {{"schema", "watc.eval.v1"},
                          {"file", rel},
                          {"missing", false},
                          {"aed_similarity", r.aed_similarity},
                          {"ccn_similarity", r.ccn_similarity},
                          {"cosine_similarity", r.cosine_similarity},
                          {"codebleu", r.codebleu},
                          {"bleu", r.bleu},
                          {"weighted_bleu", r.weighted_bleu},
                          {"ast_match", r.ast_match},
                          {"dataflow_match", r.dataflow_match},
                          {"bloat_percent", r.bloat_percent},
                          {"function_completeness", r.function_completeness},
                          {"source_functions", r.source_functions},
                          {"decompiled_functions", r.decompiled_functions},
                          {"extra_functions", r.extra_functions}};
    if (r.syntax_completeness)
        row["syntax_completeness"] = *r.syntax_completeness;
    else
        row["syntax_completeness"] = nullptr;
    return row;
}

}  // namespace detail

/// Scores every source/decompiled pair under two roots and appends a summary
/// row of means.
inline int cmd_eval(const std::string& src_root, const std::string& dec_root,
                    const std::string& out, const RunConfig& config) {
    std::vector<std::string> sources =
        detail::files_with_suffix(src_root, ".c", config.decomp_suffix);
    detail::ReportSink report(out);

    bool any_missing = false;
    std::size_t scored = 0;
    double sum_aed = 0, sum_ccn = 0, sum_cos = 0, sum_cb = 0, sum_bloat = 0, sum_func = 0;
    for (const auto& rel : sources) {
        auto dec_path = detail::find_decompiled(dec_root, rel, config.decomp_suffix);
        if (!dec_path) {
            any_missing = true;
            report.row({{"schema", "watc.eval.v1"},
                        {"file", rel},
                        {"missing", true},
                        {"function_completeness", 0.0}});
            ++scored;
            sum_func += 0.0;
            continue;
        }
        std::string src_text = detail::read_file((std::filesystem::path(src_root) / rel).string());
        std::string dec_text = detail::read_file(*dec_path);
        metrics::MetricReport r = metrics::score_pair(src_text, dec_text);
        report.row(detail::eval_row(rel, r));
        ++scored;
        sum_aed += r.aed_similarity;
        sum_ccn += r.ccn_similarity;
        sum_cos += r.cosine_similarity;
        sum_cb += r.codebleu;
        sum_bloat += r.bloat_percent;
        sum_func += r.function_completeness;
    }
    double n = scored ? static_cast<double>(scored) : 1.0;
    report.row({{"schema", "watc.eval.summary.v1"},
                {"pairs", scored},
                {"aed_similarity", sum_aed / n},
                {"ccn_similarity", sum_ccn / n},
                {"cosine_similarity", sum_cos / n},
                {"codebleu", sum_cb / n},
                {"bloat_percent", sum_bloat / n},
                {"function_completeness", sum_func / n}});
    report.flush();
    return any_missing ? kExitPartial : kExitOk;
}

/// Recompiles and re-executes every pair and reports the three rates.
inline int cmd_exec(const std::string& src_root, const std::string& dec_root,
                    const std::string& out, const RunConfig& config) {
    std::vector<std::string> sources =
        detail::files_with_suffix(src_root, ".c", config.decomp_suffix);

    std::vector<exec::BatchItem> items;
    std::vector<std::string> missing;
    for (const auto& rel : sources) {
        auto dec_path = detail::find_decompiled(dec_root, rel, config.decomp_suffix);
        if (!dec_path) {
            missing.push_back(rel);
            continue;
        }
        exec::BatchItem item;
        item.name = rel;
        item.original_c_path = (std::filesystem::path(src_root) / rel).string();
        item.decompiled_c_path = *dec_path;
        std::filesystem::path stdin_path(item.original_c_path + ".stdin");
        if (std::filesystem::exists(stdin_path))
            item.stdin_bytes = detail::read_file(stdin_path.string());
        items.push_back(std::move(item));
    }

    exec::BatchReport batch = exec::run_batch(items, config.toolchain);
    detail::ReportSink report(out);
    for (const auto& row : batch.rows)
        report.row({{"schema", "watc.exec.v1"},
                    {"file", row.name},
                    {"recompiled", row.verdict.recompiled},
                    {"re_executed", row.verdict.re_executed},
                    {"output_consistent", row.verdict.output_consistent},
                    {"note", row.note}});
    for (const auto& rel : missing)
        report.row({{"schema", "watc.exec.v1"},
                    {"file", rel},
                    {"recompiled", false},
                    {"re_executed", false},
                    {"output_consistent", false},
                    {"note", "decompiled file missing"}});
    std::size_t total = batch.rows.size() + missing.size();
    double scale = total ? static_cast<double>(batch.rows.size()) / total : 0.0;
    report.row({{"schema", "watc.exec.summary.v1"},
                {"pairs", total},
                {"recompiled_pct", batch.recompiled_pct * scale},
                {"re_executed_pct", batch.re_executed_pct * scale},
                {"consistent_pct", batch.consistent_pct * scale}});
    report.flush();

    bool all_consistent = missing.empty();
    for (const auto& row : batch.rows)
        if (!row.verdict.output_consistent) all_consistent = false;
    return all_consistent ? kExitOk : kExitPartial;
}

/// Builds training records for every C file in a corpus. Each file needs its
/// wat next to it, or a compile template able to produce one.
inline int cmd_dataset(const std::string& corpus_root, const std::string& out,
                       const std::string& skip_out, const RunConfig& config) {
    std::vector<std::string> sources =
        detail::files_with_suffix(corpus_root, ".c", config.decomp_suffix);

    detail::ReportSink records(out);
    detail::ReportSink skips(skip_out.empty() ? out + ".skipped.jsonl" : skip_out);
    std::size_t record_count = 0, skip_count = 0;
    std::string scratch;

    for (const auto& rel : sources) {
        std::string c_path = (std::filesystem::path(corpus_root) / rel).string();
        std::string stem = detail::strip_suffix(rel, ".c");
        std::string wat_path =
            (std::filesystem::path(corpus_root) / (stem + ".wat")).string();

        auto skip = [&](const std::string& reason) {
            skips.row({{"schema", "watc.dataset.skip.v1"}, {"file", rel}, {"reason", reason}});
            ++skip_count;
        };

        if (!std::filesystem::exists(wat_path)) {
            if (config.toolchain.compile_template.empty()) {
                skip("no wat file and no compile template");
                continue;
            }
            auto argv = exec::expand_template(config.toolchain.compile_template,
                                              {{"in", c_path}, {"out", ""}});
            if (argv.empty() || !exec::command_exists(argv[0])) {
                skip("no wat file and the compile toolchain is unavailable");
                continue;
            }
            if (scratch.empty()) scratch = exec::make_scratch_dir(config.toolchain.scratch_root);
            std::string file_dir = scratch + "/" + std::to_string(record_count + skip_count);
            std::filesystem::create_directories(file_dir);
            std::string produced;
            exec::ExecResult compiled =
                exec::recompile(c_path, config.toolchain, file_dir, &produced);
            if (!compiled.compiled) {
                skip("compilation failed");
                continue;
            }
            wat_path = produced;
        }

        try {
            std::string c_text = detail::read_file(c_path);
            wat::WatModule mod = wat::parse_module(detail::read_file(wat_path));
            VarOffsetMap offsets;
            std::string offsets_path =
                (std::filesystem::path(corpus_root) / (stem + ".offsets.jsonl")).string();
            if (std::filesystem::exists(offsets_path))
                offsets = parse_offset_map(detail::read_file(offsets_path));

            forge::ForgeResult result = forge::build_records(c_text, mod, offsets, rel);
            if (result.skipped) {
                skip(result.skip_reason);
                continue;
            }
            for (const auto& rec : result.records) {
                records.row(forge::record_to_json(rec));
                ++record_count;
            }
        } catch (const Error& e) {
            skip(e.what());
        }
    }
    skips.row({{"schema", "watc.dataset.summary.v1"},
               {"files", sources.size()},
               {"records", record_count},
               {"skipped", skip_count}});
    records.flush();
    skips.flush();
    return kExitOk;
}

/// Entry point behind main: parses flags, resolves config, dispatches.
inline int run(int argc, const char* const* argv) {
    CLI::App app{"wat-to-C decompilation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--set", overrides, "override a config key, as key=value")
        ->type_name("KEY=VALUE");

    // slice
    auto* slice = app.add_subcommand("slice", "slice a wat file into loop-aligned blocks");
    std::string slice_input, slice_out_dir;
    slice->add_option("input", slice_input, "wat file")->required();
    slice->add_option("out_dir", slice_out_dir, "output directory")->required();

    // decompile
    auto* decompile = app.add_subcommand("decompile", "decompile a wat file to C");
    std::string dec_input, dec_out;
    decompile->add_option("input", dec_input, "wat file")->required();
    decompile->add_option("--out", dec_out, "output C file (default: input stem + suffix)");
    std::string flag_endpoint, flag_model, flag_mock_table;
    decompile->add_option("--endpoint", flag_endpoint, "backend endpoint URL, or 'mock'");
    decompile->add_option("--model", flag_model, "backend model name");
    decompile->add_option("--mock-table", flag_mock_table, "JSONL completion table for mock");

    // eval
    auto* eval = app.add_subcommand("eval", "score decompiled C against sources");
    std::string eval_src, eval_dec, eval_out = "-";
    eval->add_option("src_root", eval_src, "directory of source C files")->required();
    eval->add_option("dec_root", eval_dec, "directory of decompiled C files")->required();
    eval->add_option("--out", eval_out, "report file, or - for stdout");

    // exec
    auto* execute = app.add_subcommand("exec", "recompile and re-execute pairs");
    std::string exec_src, exec_dec, exec_out = "-";
    execute->add_option("src_root", exec_src, "directory of source C files")->required();
    execute->add_option("dec_root", exec_dec, "directory of decompiled C files")->required();
    execute->add_option("--out", exec_out, "report file, or - for stdout");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "build training records from a corpus");
    std::string ds_root, ds_out, ds_skip;
    dataset->add_option("corpus_root", ds_root, "directory of C files with wat siblings")
        ->required();
    dataset->add_option("--out", ds_out, "records file")->required();
    dataset->add_option("--skip-report", ds_skip, "skip report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig config = load_config(config_path);
        for (const auto& kv : overrides) {
            std::size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!flag_endpoint.empty()) config.backend.endpoint = flag_endpoint;
        if (!flag_model.empty()) config.backend.model = flag_model;
        if (!flag_mock_table.empty()) config.backend.mock_table_path = flag_mock_table;

        if (slice->parsed()) return cmd_slice(slice_input, slice_out_dir, config);
        if (decompile->parsed()) return cmd_decompile(dec_input, dec_out, config);
        if (eval->parsed()) return cmd_eval(eval_src, eval_dec, eval_out, config);
        if (execute->parsed()) return cmd_exec(exec_src, exec_dec, exec_out, config);
        if (dataset->parsed()) return cmd_dataset(ds_root, ds_out, ds_skip, config);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    }
}

}  // namespace watc::cli
