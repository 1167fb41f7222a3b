// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fixtures.hpp"
#include "watc/rename.hpp"
#include "watc/text.hpp"

// Deterministic paired C/wat corpus used by the acceptance suite. Every file
// carries a C translation unit, a structurally matching wat module, and a
// frame-offset map, so the same fixtures exercise slicing, renaming, the
// mock-backend pipeline, and dataset construction.
namespace testsupport::corpus {

struct FunctionInfo {
    std::string name;
    int loops = 0;    // loop statements in the function
    int nesting = 0;  // deepest loop nesting
};

struct GeneratedFile {
    std::string stem;
    std::string c_text;
    std::string renamed_c_text;  // locals as local_{offset}, like pipeline output
    std::string wat_text;
    std::string offsets_jsonl;
    std::vector<FunctionInfo> functions;
};

namespace detail {

struct FunctionPieces {
    std::string name;
    std::vector<std::string> c_lines;    // natural variable names
    std::vector<std::string> wat_lines;  // the (func ...) form, 2-space body indent
    watc::FunctionOffsets offsets;       // locals only; params keep their names
    int loops = 0;
    int nesting = 0;
};

inline void add_local(FunctionPieces& fn, const std::string& name, long offset) {
    watc::VarOffset v;
    v.name = name;
    v.offset = offset;
    v.type = "int";
    fn.offsets.vars.push_back(v);
}

/// Escapes bytes for a wat data-segment string.
inline std::string wat_escape(std::string_view bytes) {
    std::string out;
    for (unsigned char c : bytes) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '"': out += "\\\""; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (c >= 0x20 && c < 0x7f) {
                out += static_cast<char>(c);
            } else {
                const char* hex = "0123456789abcdef";
                out += '\\';
                out += hex[c >> 4];
                out += hex[c & 0xf];
            }
        }
    }
    return out;
}

inline FunctionPieces straight_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int a, int b) {",
                  "    int x;",
                  "    x = a + b;",
                  "    return x;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $a i32) (param $b i32) (result i32)",
                    "  (local $x i32)",
                    "  local.get $a",
                    "  local.get $b",
                    "  i32.add",
                    "  local.set $x",
                    "  local.get $x)"};
    add_local(fn, "x", 8);
    return fn;
}

inline FunctionPieces while_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int n) {",
                  "    int i;",
                  "    i = 0;",
                  "    while (i < n) {",
                  "        i = i + 1;",
                  "    }",
                  "    return i;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $n i32) (result i32)",
                    "  (local $i i32)",
                    "  i32.const 0",
                    "  local.set $i",
                    "  loop $l0",
                    "    local.get $i",
                    "    i32.const 1",
                    "    i32.add",
                    "    local.set $i",
                    "    local.get $i",
                    "    local.get $n",
                    "    i32.lt_s",
                    "    br_if $l0",
                    "  end",
                    "  local.get $i)"};
    add_local(fn, "i", 8);
    fn.loops = 1;
    fn.nesting = 1;
    return fn;
}

inline FunctionPieces for_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int n) {",
                  "    int i;",
                  "    int s;",
                  "    s = 0;",
                  "    for (i = 0; i < n; i = i + 1) {",
                  "        s = s + i;",
                  "    }",
                  "    return s;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $n i32) (result i32)",
                    "  (local $i i32)",
                    "  (local $s i32)",
                    "  i32.const 0",
                    "  local.set $s",
                    "  i32.const 0",
                    "  local.set $i",
                    "  loop $l0",
                    "    local.get $s",
                    "    local.get $i",
                    "    i32.add",
                    "    local.set $s",
                    "    local.get $i",
                    "    i32.const 1",
                    "    i32.add",
                    "    local.set $i",
                    "    local.get $i",
                    "    local.get $n",
                    "    i32.lt_s",
                    "    br_if $l0",
                    "  end",
                    "  local.get $s)"};
    add_local(fn, "i", 8);
    add_local(fn, "s", 16);
    fn.loops = 1;
    fn.nesting = 1;
    return fn;
}

inline FunctionPieces dowhile_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int n) {",
                  "    int i;",
                  "    i = n;",
                  "    do {",
                  "        i = i - 1;",
                  "    } while (i > 0);",
                  "    return i;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $n i32) (result i32)",
                    "  (local $i i32)",
                    "  local.get $n",
                    "  local.set $i",
                    "  loop $l0",
                    "    local.get $i",
                    "    i32.const 1",
                    "    i32.sub",
                    "    local.set $i",
                    "    local.get $i",
                    "    i32.const 0",
                    "    i32.gt_s",
                    "    br_if $l0",
                    "  end",
                    "  local.get $i)"};
    add_local(fn, "i", 8);
    fn.loops = 1;
    fn.nesting = 1;
    return fn;
}

inline FunctionPieces nested2_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int n) {",
                  "    int i;",
                  "    int j;",
                  "    int s;",
                  "    i = 0;",
                  "    s = 0;",
                  "    while (i < n) {",
                  "        for (j = 0; j < i; j = j + 1) {",
                  "            s = s + j;",
                  "        }",
                  "        i = i + 1;",
                  "    }",
                  "    return s;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $n i32) (result i32)",
                    "  (local $i i32)",
                    "  (local $j i32)",
                    "  (local $s i32)",
                    "  i32.const 0",
                    "  local.set $i",
                    "  i32.const 0",
                    "  local.set $s",
                    "  loop $outer",
                    "    i32.const 0",
                    "    local.set $j",
                    "    loop $inner",
                    "      local.get $s",
                    "      local.get $j",
                    "      i32.add",
                    "      local.set $s",
                    "      local.get $j",
                    "      i32.const 1",
                    "      i32.add",
                    "      local.set $j",
                    "      local.get $j",
                    "      local.get $i",
                    "      i32.lt_s",
                    "      br_if $inner",
                    "    end",
                    "    local.get $i",
                    "    i32.const 1",
                    "    i32.add",
                    "    local.set $i",
                    "    local.get $i",
                    "    local.get $n",
                    "    i32.lt_s",
                    "    br_if $outer",
                    "  end",
                    "  local.get $s)"};
    add_local(fn, "i", 8);
    add_local(fn, "j", 16);
    add_local(fn, "s", 24);
    fn.loops = 2;
    fn.nesting = 2;
    return fn;
}

inline FunctionPieces nested3_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int n) {",
                  "    int i;",
                  "    int j;",
                  "    int k;",
                  "    int s;",
                  "    i = 0;",
                  "    s = 0;",
                  "    while (i < n) {",
                  "        for (j = 0; j < i; j = j + 1) {",
                  "            k = 0;",
                  "            while (k < j) {",
                  "                s = s + 1;",
                  "                k = k + 1;",
                  "            }",
                  "        }",
                  "        i = i + 1;",
                  "    }",
                  "    return s;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $n i32) (result i32)",
                    "  (local $i i32)",
                    "  (local $j i32)",
                    "  (local $k i32)",
                    "  (local $s i32)",
                    "  i32.const 0",
                    "  local.set $i",
                    "  i32.const 0",
                    "  local.set $s",
                    "  loop $outer",
                    "    i32.const 0",
                    "    local.set $j",
                    "    loop $mid",
                    "      i32.const 0",
                    "      local.set $k",
                    "      loop $deep",
                    "        local.get $s",
                    "        i32.const 1",
                    "        i32.add",
                    "        local.set $s",
                    "        local.get $k",
                    "        i32.const 1",
                    "        i32.add",
                    "        local.set $k",
                    "        local.get $k",
                    "        local.get $j",
                    "        i32.lt_s",
                    "        br_if $deep",
                    "      end",
                    "      local.get $j",
                    "      i32.const 1",
                    "      i32.add",
                    "      local.set $j",
                    "      local.get $j",
                    "      local.get $i",
                    "      i32.lt_s",
                    "      br_if $mid",
                    "    end",
                    "    local.get $i",
                    "    i32.const 1",
                    "    i32.add",
                    "    local.set $i",
                    "    local.get $i",
                    "    local.get $n",
                    "    i32.lt_s",
                    "    br_if $outer",
                    "  end",
                    "  local.get $s)"};
    add_local(fn, "i", 8);
    add_local(fn, "j", 16);
    add_local(fn, "k", 24);
    add_local(fn, "s", 32);
    fn.loops = 3;
    fn.nesting = 3;
    return fn;
}

inline FunctionPieces twoloops_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int n) {",
                  "    int i;",
                  "    int s;",
                  "    i = 0;",
                  "    s = 0;",
                  "    while (i < n) {",
                  "        i = i + 1;",
                  "    }",
                  "    while (s < i) {",
                  "        s = s + 2;",
                  "    }",
                  "    return s;",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $n i32) (result i32)",
                    "  (local $i i32)",
                    "  (local $s i32)",
                    "  i32.const 0",
                    "  local.set $i",
                    "  i32.const 0",
                    "  local.set $s",
                    "  loop $first",
                    "    local.get $i",
                    "    i32.const 1",
                    "    i32.add",
                    "    local.set $i",
                    "    local.get $i",
                    "    local.get $n",
                    "    i32.lt_s",
                    "    br_if $first",
                    "  end",
                    "  loop $second",
                    "    local.get $s",
                    "    i32.const 2",
                    "    i32.add",
                    "    local.set $s",
                    "    local.get $s",
                    "    local.get $i",
                    "    i32.lt_s",
                    "    br_if $second",
                    "  end",
                    "  local.get $s)"};
    add_local(fn, "i", 8);
    add_local(fn, "s", 16);
    fn.loops = 2;
    fn.nesting = 1;
    return fn;
}

inline FunctionPieces sink_fn(const std::string& name) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int x) {", "    return x;", "}"};
    fn.wat_lines = {"(func $" + name + " (param $x i32) (result i32)", "  local.get $x)"};
    return fn;
}

inline FunctionPieces string_fn(const std::string& name, const std::string& sink,
                                long offset, const std::string& bytes) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(void) {",
                  "    return " + sink + "(" + watc::text::c_string_literal(bytes) + ");",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (result i32)",
                    "  i32.const " + std::to_string(offset),
                    "  call $" + sink + ")"};
    return fn;
}

inline FunctionPieces caller_fn(const std::string& name, const std::string& target) {
    FunctionPieces fn;
    fn.name = name;
    fn.c_lines = {"int " + name + "(int a) {",
                  "    return " + target + "(a, a);",
                  "}"};
    fn.wat_lines = {"(func $" + name + " (param $a i32) (result i32)",
                    "  local.get $a",
                    "  local.get $a",
                    "  call $" + target + ")"};
    return fn;
}

struct DataEntry {
    long offset;
    std::string bytes;
};

inline GeneratedFile assemble(const std::string& stem,
                              const std::vector<FunctionPieces>& fns,
                              const std::vector<DataEntry>& data) {
    GeneratedFile file;
    file.stem = stem;

    std::vector<std::string> c_parts, renamed_parts, offsets_rows;
    std::vector<std::string> wat_lines = {"(module"};
    if (!data.empty()) wat_lines.push_back("  (memory 1)");
    for (const auto& d : data)
        wat_lines.push_back("  (data (i32.const " + std::to_string(d.offset) + ") \"" +
                            wat_escape(d.bytes + std::string(1, '\0')) + "\")");

    for (const auto& fn : fns) {
        std::string c_text = watc::text::join_lines(fn.c_lines) + "\n";
        c_parts.push_back(c_text);
        renamed_parts.push_back(fn.offsets.vars.empty()
                                    ? c_text
                                    : watc::rename_c_source(c_text, fn.offsets));
        for (const auto& v : fn.offsets.vars)
            offsets_rows.push_back("{\"function\": \"" + fn.name + "\", \"name\": \"" + v.name +
                                   "\", \"offset\": " + std::to_string(v.offset) +
                                   ", \"type\": \"" + v.type + "\"}");
        for (const auto& line : fn.wat_lines) wat_lines.push_back("  " + line);
        FunctionInfo info;
        info.name = fn.name;
        info.loops = fn.loops;
        info.nesting = fn.nesting;
        file.functions.push_back(info);
    }
    wat_lines.back() += ")";

    file.c_text = watc::text::join_lines(c_parts);
    file.renamed_c_text = watc::text::join_lines(renamed_parts);
    file.wat_text = watc::text::join_lines(wat_lines) + "\n";
    file.offsets_jsonl = offsets_rows.empty()
                             ? std::string()
                             : watc::text::join_lines(offsets_rows) + "\n";
    return file;
}

}  // namespace detail

/// Twenty-two files, sixty-four functions, fourteen of them with loop nesting
/// depth >= 2. Deterministic: every call builds identical bytes.
inline std::vector<GeneratedFile> build_corpus() {
    using namespace detail;
    const std::vector<std::string> string_bytes = {
        "line one\nline two",
        "say \"hi\" now",
        "tab\there\nend",
        "quote \" and\nbreak",
        "plain text",
        "mix \"q\"\nand line",
    };

    std::vector<GeneratedFile> files;
    for (int fi = 0; fi < 22; ++fi) {
        char suffix_buf[8];
        std::snprintf(suffix_buf, sizeof suffix_buf, "m%02d", fi);
        std::string sfx = suffix_buf;
        std::string stem = "mod" + sfx.substr(1);

        std::vector<FunctionPieces> fns;
        std::vector<DataEntry> data;
        switch (fi % 4) {
        case 0:
            fns.push_back(straight_fn("calc_" + sfx));
            fns.push_back(while_fn("spin_" + sfx));
            fns.push_back(nested2_fn("grid_" + sfx));
            break;
        case 1: {
            std::string sink = "sink_" + sfx;
            const std::string& bytes = string_bytes[(fi / 4) % string_bytes.size()];
            fns.push_back(sink_fn(sink));
            fns.push_back(string_fn("greet_" + sfx, sink, 1024, bytes));
            fns.push_back(for_fn("total_" + sfx));
            if (fi % 8 == 5)
                fns.push_back(nested3_fn("cube_" + sfx));
            data.push_back({1024, bytes});
            break;
        }
        case 2:
            fns.push_back(nested2_fn("grid_" + sfx));
            fns.push_back(dowhile_fn("drain_" + sfx));
            break;
        default: {
            std::string target = "calc_" + sfx;
            fns.push_back(straight_fn(target));
            fns.push_back(caller_fn("wrap_" + sfx, target));
            fns.push_back(twoloops_fn("relay_" + sfx));
            break;
        }
        }
        files.push_back(assemble(stem, fns, data));
    }
    return files;
}

/// A C/wat pair whose loop counts disagree; dataset construction must reject
/// it with reason count_mismatch.
inline GeneratedFile mismatch_pair() {
    using namespace detail;
    FunctionPieces fn = while_fn("lopsided");
    // Flatten the C side: same function name, no loop.
    fn.c_lines = {"int lopsided(int n) {", "    int i;", "    i = n;", "    return i;", "}"};
    fn.loops = 0;
    fn.nesting = 0;
    return assemble("lopsided", {fn}, {});
}

/// Writes stem.c, stem.wat, and stem.offsets.jsonl for every file.
inline void write_corpus(const std::string& dir, const std::vector<GeneratedFile>& files) {
    for (const auto& file : files) {
        testsupport::write_file(dir + "/" + file.stem + ".c", file.c_text);
        testsupport::write_file(dir + "/" + file.stem + ".wat", file.wat_text);
        if (!file.offsets_jsonl.empty())
            testsupport::write_file(dir + "/" + file.stem + ".offsets.jsonl",
                                    file.offsets_jsonl);
    }
}

}  // namespace testsupport::corpus
