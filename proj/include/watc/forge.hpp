// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "watc/c/lexer.hpp"
#include "watc/c/parser.hpp"
#include "watc/context.hpp"
#include "watc/errors.hpp"
#include "watc/pipeline/pipeline.hpp"
#include "watc/rename.hpp"
#include "watc/slicer.hpp"
#include "watc/text.hpp"
#include "watc/wat/parser.hpp"

namespace watc::forge {

/// One training pair plus its feature columns and provenance.
struct DatasetRecord {
    std::string wat_snippet;
    std::string c_snippet;  // renamed, string literals as STR_{offset}
    std::vector<std::string> spatial_info;
    std::vector<VariableDef> temporal_info;
    std::map<long, std::string> offset2string;
    std::string source_path;
    std::string function;
    int block_id = 0;
};

inline nlohmann::json record_to_json(const DatasetRecord& rec) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : rec.temporal_info)
        vars.push_back({{"name", v.name}, {"type", v.type}});
    nlohmann::json strings = nlohmann::json::object();
    for (const auto& [offset, value] : rec.offset2string)
        strings[std::to_string(offset)] = value;
    return nlohmann::json{{"schema", "watc.dataset.v1"},
                          {"wat_snippet", rec.wat_snippet},
                          {"c_snippet", rec.c_snippet},
                          {"spatial_info", rec.spatial_info},
                          {"temporal_info", vars},
                          {"offset2string", strings},
                          {"source_path", rec.source_path},
                          {"function", rec.function},
                          {"block_id", rec.block_id}};
}

/// Slices one C function by its loop statements, mirroring the wat slicing
/// rule: block 0 is the whole function, each direct-child loop becomes a
/// marker, loop ids count in (start ascending, end descending) order.
inline std::vector<Snippet> slice_c_function(const std::string& c_func_text) {
    c::CUnit unit = c::parse_c(c_func_text);
    if (!unit.parse_ok || unit.functions.size() != 1 || unit.functions[0].has_error)
        throw ParseError("not a single clean C function", 0, 0);
    const c::CFunction& fn = unit.functions[0];

    wat::WatFunction shim;
    shim.name = fn.name;
    shim.index = 0;
    shim.body_lines = text::split_lines(c_func_text);
    std::vector<const c::CNode*> loops = c::collect_loop_nodes(fn.node);
    for (const c::CNode* loop : loops)
        shim.loop_extents.push_back({loop->start_line, loop->end_line});
    std::sort(shim.loop_extents.begin(), shim.loop_extents.end(),
              [](const wat::LoopExtent& a, const wat::LoopExtent& b) {
                  if (a.start_line != b.start_line) return a.start_line < b.start_line;
                  return a.end_line > b.end_line;
              });
    return slice_function(shim);
}

struct AlignedPair {
    Snippet c;
    Snippet wat;
};

struct AlignOutcome {
    bool ok = false;
    std::string reject_reason;  // "count_mismatch" or "shape_mismatch"
    std::vector<AlignedPair> pairs;
};

/// Pairs C and wat snippets by block index when the two slicings have the
/// same count and the same marker tree. Mismatches are rejected whole; a
/// repaired pair would train the model on an alignment that never existed.
inline AlignOutcome align(const std::vector<Snippet>& c_snips,
                          const std::vector<Snippet>& wat_snips) {
    AlignOutcome outcome;
    if (c_snips.size() != wat_snips.size()) {
        outcome.reject_reason = "count_mismatch";
        return outcome;
    }
    for (std::size_t i = 0; i < c_snips.size(); ++i) {
        if (c_snips[i].block_id != wat_snips[i].block_id) {
            outcome.reject_reason = "shape_mismatch";
            return outcome;
        }
        std::vector<int> c_children = c_snips[i].child_blocks;
        std::vector<int> wat_children = wat_snips[i].child_blocks;
        std::sort(c_children.begin(), c_children.end());
        std::sort(wat_children.begin(), wat_children.end());
        if (c_children != wat_children) {
            outcome.reject_reason = "shape_mismatch";
            return outcome;
        }
    }
    outcome.ok = true;
    for (std::size_t i = 0; i < c_snips.size(); ++i)
        outcome.pairs.push_back({c_snips[i], wat_snips[i]});
    return outcome;
}

struct PlaceholderResult {
    std::string text;
    std::set<long> used_offsets;
    std::vector<std::string> ambiguities;  // literals matching several offsets
};

/// Replaces each string literal whose decoded bytes match a data-segment
/// string with `STR_{offset}`. Several matching offsets take the lowest one.
inline PlaceholderResult substitute_string_placeholders(const std::string& c_text,
                                                        const OffsetStringMap& strings) {
    PlaceholderResult result;
    std::vector<c::CTok> tokens;
    try {
        tokens = c::tokenize_c(c_text);
    } catch (const ParseError&) {
        result.text = c_text;
        return result;
    }
    std::map<std::string, long> by_bytes;  // decoded bytes -> lowest offset
    std::map<std::string, int> matches;
    for (const auto& [offset, value] : strings.entries) {
        auto it = by_bytes.find(value);
        if (it == by_bytes.end()) by_bytes[value] = offset;
        ++matches[value];
    }

    std::vector<std::string> lines = text::split_lines(c_text);
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        if (it->kind != c::TokKind::String) continue;
        std::string decoded;
        try {
            decoded = c::decode_c_string(it->text);
        } catch (const BadEscape&) {
            continue;
        }
        auto hit = by_bytes.find(decoded);
        if (hit == by_bytes.end()) continue;
        if (matches[decoded] > 1) result.ambiguities.push_back(it->text);
        std::string placeholder =
            std::string(pipeline::kStringPlaceholderPrefix) + std::to_string(hit->second);
        std::string& line = lines[static_cast<std::size_t>(it->line)];
        line = line.substr(0, static_cast<std::size_t>(it->col)) + placeholder +
               line.substr(static_cast<std::size_t>(it->col) + it->text.size());
        result.used_offsets.insert(hit->second);
    }
    result.text = text::join_lines(lines);
    if (!c_text.empty() && c_text.back() == '\n') result.text += '\n';
    return result;
}

/// Offsets of every STR_ placeholder in a snippet, for coverage checks.
inline std::set<long> placeholder_offsets(const std::string& c_text) {
    std::set<long> out;
    const std::string prefix = pipeline::kStringPlaceholderPrefix;
    ::watc::detail::rewrite_identifiers(c_text, [&](const std::string& word) -> const std::string* {
        if (text::starts_with(word, prefix) && word.size() > prefix.size()) {
            std::string digits = word.substr(prefix.size());
            bool all = !digits.empty();
            for (char ch : digits)
                if (!std::isdigit(static_cast<unsigned char>(ch))) all = false;
            if (all) out.insert(std::stol(digits));
        }
        return nullptr;
    });
    return out;
}

struct ForgeResult {
    std::vector<DatasetRecord> records;
    bool skipped = false;
    std::string skip_reason;
    std::vector<std::string> notes;  // ambiguities and other non-fatal logs
};

namespace detail {

inline std::vector<int> marker_ids_in(const std::string& text_block) {
    std::vector<int> ids;
    for (const auto& ref : scan_markers(text_block)) ids.push_back(ref.block_id);
    return ids;
}

/// Both sides of a pair must reference the same child blocks; enforced per
/// record before anything is emitted.
inline bool marker_parity(const DatasetRecord& rec) {
    std::vector<int> wat_ids = marker_ids_in(rec.wat_snippet);
    std::vector<int> c_ids = marker_ids_in(rec.c_snippet);
    std::sort(wat_ids.begin(), wat_ids.end());
    std::sort(c_ids.begin(), c_ids.end());
    return wat_ids == c_ids;
}

inline bool placeholder_coverage(const DatasetRecord& rec) {
    for (long offset : placeholder_offsets(rec.c_snippet))
        if (!rec.offset2string.count(offset)) return false;
    return true;
}

}  // namespace detail

/// Builds the training records for one C file and its compiled module: rename
/// variables, substitute string placeholders, slice both sides, align, attach
/// features. Any failed stage skips the file with the reason recorded.
inline ForgeResult build_records(const std::string& c_text, const wat::WatModule& mod,
                                 const VarOffsetMap& offsets,
                                 const std::string& source_path = "") {
    ForgeResult result;
    auto skip = [&](const std::string& reason) {
        result.skipped = true;
        result.skip_reason = reason;
        result.records.clear();
        return result;
    };

    c::CUnit unit = c::parse_c(c_text);
    if (!unit.parse_ok || unit.functions.empty()) return skip("C source does not parse");
    for (const auto& fn : unit.functions)
        if (fn.has_error) return skip("C function '" + fn.name + "' does not parse");

    OffsetStringMap strings = wat::extract_data_strings(mod);
    std::vector<std::string> lines = text::split_lines(c_text);

    for (const auto& fn : unit.functions) {
        int wat_index = mod.index_of(fn.name);
        if (wat_index < 0) return skip("function '" + fn.name + "' not present in the module");
        const wat::WatFunction& wat_fn = *mod.function_at(wat_index);

        // The function's own lines, so snippet extents line up on both sides.
        std::vector<std::string> fn_lines(
            lines.begin() + static_cast<long>(fn.start_line),
            lines.begin() + static_cast<long>(fn.end_line) + 1);
        std::string fn_text = text::join_lines(fn_lines) + "\n";

        const FunctionOffsets* fn_offsets = offsets.find(fn.name);
        std::string renamed;
        try {
            renamed = fn_offsets ? rename_c_source(fn_text, *fn_offsets) : fn_text;
        } catch (const UnmappedCollision& e) {
            return skip("rename collision on '" + e.target + "' in '" + fn.name + "'");
        }

        PlaceholderResult placed = substitute_string_placeholders(renamed, strings);
        for (const auto& note : placed.ambiguities)
            result.notes.push_back("ambiguous literal " + note + " in '" + fn.name + "'");

        std::vector<Snippet> c_snips;
        std::vector<Snippet> wat_snips;
        try {
            c_snips = slice_c_function(placed.text);
            wat_snips = slice_function(wat_fn);
        } catch (const Error& e) {
            return skip(std::string("slicing failed: ") + e.what());
        }
        AlignOutcome aligned = align(c_snips, wat_snips);
        if (!aligned.ok) return skip("align rejected '" + fn.name + "': " + aligned.reject_reason);

        std::vector<VariableDef> params;
        for (const auto& p : fn.param_names)
            if (!p.empty()) params.push_back({p, "int", ""});
        for (std::size_t i = 0; i < params.size() && i < fn.param_types.size(); ++i)
            if (!fn.param_types[i].empty()) params[i].type = fn.param_types[i];

        std::vector<std::string> prior;
        for (const auto& pair : aligned.pairs) {
            DatasetRecord rec;
            rec.wat_snippet = pair.wat.text;
            rec.c_snippet = pair.c.text;
            rec.spatial_info = spatial_info(pair.wat.text, mod);
            rec.temporal_info = temporal_info(prior, params);
            for (long offset : placeholder_offsets(rec.c_snippet)) {
                auto it = strings.entries.find(offset);
                if (it != strings.entries.end()) rec.offset2string[offset] = it->second;
            }
            rec.source_path = source_path;
            rec.function = fn.name;
            rec.block_id = pair.c.block_id;
            if (!detail::marker_parity(rec))
                return skip("marker parity violated in '" + fn.name + "'");
            if (!detail::placeholder_coverage(rec))
                return skip("placeholder coverage violated in '" + fn.name + "'");
            result.records.push_back(std::move(rec));
            prior.push_back(pair.c.text);
        }
    }
    return result;
}

}  // namespace watc::forge
