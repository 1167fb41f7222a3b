// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "watc/errors.hpp"
#include "watc/text.hpp"
#include "watc/wat/lexer.hpp"
#include "watc/wat/module.hpp"

namespace watc {

using wat::FunctionSignature;
using wat::LoopExtent;
using wat::WatFunction;

/// Identifies one sliced block: block 0 is the whole-function view, blocks
/// 1..k are the function's loop extents in source order.
struct MarkerRef {
    std::string function;
    int block_id = 0;

    std::string key() const { return function + "_" + std::to_string(block_id); }
    friend bool operator==(const MarkerRef&, const MarkerRef&) = default;
    friend bool operator<(const MarkerRef& a, const MarkerRef& b) {
        return a.function != b.function ? a.function < b.function : a.block_id < b.block_id;
    }
};

inline std::string make_marker(const std::string& function, int block_id) {
    return "<<" + function + "_" + std::to_string(block_id) + ">>";
}

inline std::string make_marker(const MarkerRef& ref) {
    return make_marker(ref.function, ref.block_id);
}

/// Parses a line holding exactly one marker (surrounding whitespace allowed).
inline std::optional<MarkerRef> parse_marker_line(const std::string& line) {
    std::string t = text::trim(line);
    if (!text::starts_with(t, "<<") || !text::ends_with(t, ">>") || t.size() < 7)
        return std::nullopt;
    std::string inner = t.substr(2, t.size() - 4);
    std::size_t us = inner.rfind('_');
    if (us == std::string::npos || us == 0 || us + 1 >= inner.size()) return std::nullopt;
    for (std::size_t i = us + 1; i < inner.size(); ++i)
        if (inner[i] < '0' || inner[i] > '9') return std::nullopt;
    MarkerRef ref;
    ref.function = inner.substr(0, us);
    ref.block_id = std::stoi(inner.substr(us + 1));
    return ref;
}

/// All markers occupying whole lines of `text`, in order of appearance.
inline std::vector<MarkerRef> scan_markers(const std::string& text_block) {
    std::vector<MarkerRef> refs;
    for (const auto& line : text::split_lines(text_block))
        if (auto ref = parse_marker_line(line)) refs.push_back(*ref);
    return refs;
}

/// True if any marker-shaped token appears anywhere in `text`, including
/// mid-line. Used to enforce that finished output carries no markers.
inline bool contains_marker_token(const std::string& text_block) {
    std::size_t pos = 0;
    while ((pos = text_block.find("<<", pos)) != std::string::npos) {
        std::size_t close = text_block.find(">>", pos + 2);
        if (close == std::string::npos) return false;
        std::string inner = text_block.substr(pos + 2, close - pos - 2);
        std::size_t us = inner.rfind('_');
        if (us != std::string::npos && us > 0 && us + 1 < inner.size()) {
            bool digits = true;
            for (std::size_t i = us + 1; i < inner.size() && digits; ++i)
                digits = inner[i] >= '0' && inner[i] <= '9';
            if (digits && inner.find('\n') == std::string::npos) return true;
        }
        pos += 2;
    }
    return false;
}

/// One sliced block of a function body.
struct Snippet {
    std::string function;
    int block_id = 0;
    std::string text;                  // lines joined with '\n'
    std::vector<int> child_blocks;     // ids this snippet references via markers
};

struct SlicedFunction {
    std::string function;
    int index = 0;                     // function-space index
    std::vector<Snippet> snippets;     // block 0 first, then loop blocks ascending
};

struct SlicedProgram {
    std::vector<int> order;            // function-space indices, callee-first
    std::vector<SlicedFunction> functions;
};

namespace detail {

inline void validate_extents(const WatFunction& fn) {
    int n = static_cast<int>(fn.body_lines.size());
    for (const auto& e : fn.loop_extents) {
        if (e.start_line < 0 || e.end_line >= n || e.start_line > e.end_line)
            throw OverlapError("loop extent out of range in function '" + fn.name + "'");
    }
    for (std::size_t i = 0; i < fn.loop_extents.size(); ++i) {
        for (std::size_t j = i + 1; j < fn.loop_extents.size(); ++j) {
            const auto& a = fn.loop_extents[i];
            const auto& b = fn.loop_extents[j];
            bool disjoint = a.end_line < b.start_line || b.end_line < a.start_line;
            bool a_in_b = b.start_line <= a.start_line && a.end_line <= b.end_line;
            bool b_in_a = a.start_line <= b.start_line && b.end_line <= a.end_line;
            if (!disjoint && !a_in_b && !b_in_a)
                throw OverlapError("loop extents overlap without nesting in function '" +
                                   fn.name + "'");
        }
    }
}

// Parent of extent j: the tightest extent strictly containing it, else -1.
inline std::vector<int> extent_parents(const std::vector<LoopExtent>& extents) {
    std::vector<int> parent(extents.size(), -1);
    for (std::size_t j = 0; j < extents.size(); ++j) {
        int best = -1;
        long best_span = -1;
        for (std::size_t i = 0; i < extents.size(); ++i) {
            if (i == j) continue;
            const auto& a = extents[i];
            const auto& b = extents[j];
            bool contains = a.start_line <= b.start_line && b.end_line <= a.end_line &&
                            !(a.start_line == b.start_line && a.end_line == b.end_line);
            if (!contains) continue;
            long span = a.end_line - a.start_line;
            if (best == -1 || span < best_span) {
                best = static_cast<int>(i);
                best_span = span;
            }
        }
        parent[j] = best;
    }
    return parent;
}

}  // namespace detail

/// Slices one function into its whole-body view (block 0) plus one snippet
/// per loop extent (blocks 1..k). In every snippet, immediate child loops
/// are replaced by a single marker line carrying the child's indentation, so
/// no snippet retains more than one loop of its own.
///
/// Slicing is line-granular: a loop that begins on the same line as its
/// enclosing block's other content cannot be cut out cleanly and is rejected.
inline std::vector<Snippet> slice_function(const WatFunction& fn) {
    detail::validate_extents(fn);

    const auto& extents = fn.loop_extents;
    std::vector<int> parent = detail::extent_parents(extents);
    std::vector<std::vector<int>> children(extents.size() + 1);
    for (std::size_t j = 0; j < extents.size(); ++j) {
        int p = parent[j];
        children[static_cast<std::size_t>(p + 1)].push_back(static_cast<int>(j));
    }

    auto emit = [&](int block_id, int range_start, int range_end,
                    const std::vector<int>& kids) {
        Snippet snip;
        snip.function = fn.name;
        snip.block_id = block_id;
        std::map<int, int> child_at;  // child start line -> extent id
        for (int c : kids) {
            if (extents[static_cast<std::size_t>(c)].start_line == range_start && block_id != 0)
                throw OverlapError("loop in function '" + fn.name +
                                   "' shares a line with its enclosing block");
            if (block_id == 0 &&
                extents[static_cast<std::size_t>(c)].start_line == range_start)
                throw OverlapError("loop in function '" + fn.name +
                                   "' begins on the function header line");
            child_at[extents[static_cast<std::size_t>(c)].start_line] = c;
        }
        std::vector<std::string> lines;
        for (int line = range_start; line <= range_end; ++line) {
            auto it = child_at.find(line);
            if (it == child_at.end()) {
                lines.push_back(fn.body_lines[static_cast<std::size_t>(line)]);
                continue;
            }
            int c = it->second;
            const std::string& first = fn.body_lines[static_cast<std::size_t>(line)];
            std::string indent = first.substr(0, text::indentation_of(first));
            lines.push_back(indent + make_marker(fn.name, c + 1));
            snip.child_blocks.push_back(c + 1);
            line = extents[static_cast<std::size_t>(c)].end_line;
        }
        snip.text = text::join_lines(lines);
        return snip;
    };

    std::vector<Snippet> out;
    out.push_back(emit(0, 0, static_cast<int>(fn.body_lines.size()) - 1, children[0]));
    for (std::size_t j = 0; j < extents.size(); ++j)
        out.push_back(emit(static_cast<int>(j) + 1, extents[j].start_line, extents[j].end_line,
                           children[j + 1]));
    return out;
}

/// Callee-first ordering of the defined functions. Call cycles are collapsed
/// into one unit and emitted as consecutive indices in ascending order; among
/// simultaneously ready units the one containing the lowest index goes first,
/// so the result is deterministic.
inline std::vector<int> order_functions(const wat::WatModule& mod) {
    int import_count = static_cast<int>(mod.imports.size());
    int n = static_cast<int>(mod.functions.size());
    auto local = [&](int space_index) { return space_index - import_count; };

    std::vector<std::vector<int>> deps(static_cast<std::size_t>(n));  // local -> local callees
    for (const auto& fn : mod.functions) {
        for (int callee : fn.callees) {
            if (callee >= import_count && local(callee) != local(fn.index))
                deps[static_cast<std::size_t>(local(fn.index))].push_back(local(callee));
        }
    }

    // Tarjan strongly connected components.
    std::vector<int> idx(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
        scc(static_cast<std::size_t>(n), -1);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    int counter = 0, scc_count = 0;
    std::function<void(int)> strongconnect = [&](int v) {
        idx[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = counter++;
        stack.push_back(v);
        on_stack[static_cast<std::size_t>(v)] = true;
        for (int w : deps[static_cast<std::size_t>(v)]) {
            if (idx[static_cast<std::size_t>(w)] == -1) {
                strongconnect(w);
                low[static_cast<std::size_t>(v)] =
                    std::min(low[static_cast<std::size_t>(v)], low[static_cast<std::size_t>(w)]);
            } else if (on_stack[static_cast<std::size_t>(w)]) {
                low[static_cast<std::size_t>(v)] =
                    std::min(low[static_cast<std::size_t>(v)], idx[static_cast<std::size_t>(w)]);
            }
        }
        if (low[static_cast<std::size_t>(v)] == idx[static_cast<std::size_t>(v)]) {
            while (true) {
                int w = stack.back();
                stack.pop_back();
                on_stack[static_cast<std::size_t>(w)] = false;
                scc[static_cast<std::size_t>(w)] = scc_count;
                if (w == v) break;
            }
            ++scc_count;
        }
    };
    for (int v = 0; v < n; ++v)
        if (idx[static_cast<std::size_t>(v)] == -1) strongconnect(v);

    std::vector<std::set<int>> scc_deps(static_cast<std::size_t>(scc_count));
    std::vector<std::vector<int>> scc_members(static_cast<std::size_t>(scc_count));
    for (int v = 0; v < n; ++v) {
        scc_members[static_cast<std::size_t>(scc[static_cast<std::size_t>(v)])].push_back(v);
        for (int w : deps[static_cast<std::size_t>(v)])
            if (scc[static_cast<std::size_t>(v)] != scc[static_cast<std::size_t>(w)])
                scc_deps[static_cast<std::size_t>(scc[static_cast<std::size_t>(v)])].insert(
                    scc[static_cast<std::size_t>(w)]);
    }
    for (auto& members : scc_members) std::sort(members.begin(), members.end());

    std::vector<int> unmet(static_cast<std::size_t>(scc_count));
    for (int s = 0; s < scc_count; ++s)
        unmet[static_cast<std::size_t>(s)] =
            static_cast<int>(scc_deps[static_cast<std::size_t>(s)].size());
    std::vector<std::vector<int>> dependents(static_cast<std::size_t>(scc_count));
    for (int s = 0; s < scc_count; ++s)
        for (int d : scc_deps[static_cast<std::size_t>(s)])
            dependents[static_cast<std::size_t>(d)].push_back(s);

    std::set<std::pair<int, int>> ready;  // (min member, scc id)
    for (int s = 0; s < scc_count; ++s)
        if (unmet[static_cast<std::size_t>(s)] == 0)
            ready.insert({scc_members[static_cast<std::size_t>(s)].front(), s});

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        auto [min_member, s] = *ready.begin();
        ready.erase(ready.begin());
        for (int v : scc_members[static_cast<std::size_t>(s)])
            order.push_back(v + import_count);
        for (int t : dependents[static_cast<std::size_t>(s)])
            if (--unmet[static_cast<std::size_t>(t)] == 0)
                ready.insert({scc_members[static_cast<std::size_t>(t)].front(), t});
    }
    return order;
}

/// Slices every defined function, listing functions callee-first.
inline SlicedProgram slice_program(const wat::WatModule& mod) {
    SlicedProgram prog;
    prog.order = order_functions(mod);
    for (int space_index : prog.order) {
        const WatFunction* fn = mod.function_at(space_index);
        SlicedFunction sf;
        sf.function = fn->name;
        sf.index = space_index;
        sf.snippets = slice_function(*fn);
        prog.functions.push_back(std::move(sf));
    }
    return prog;
}

struct ExpandResult {
    std::string text;
    std::vector<MarkerRef> unresolved;
};

/// Replaces every marker line in `root_text` with the looked-up child text,
/// recursively, re-basing each child's indentation onto the marker line's.
/// Unknown markers either become `placeholder(ref)` (and are recorded) or
/// raise UnresolvedMarker; a marker reachable from itself raises CyclicMarker.
inline ExpandResult expand_markers(
    const std::string& root_text,
    const std::function<const std::string*(const MarkerRef&)>& lookup,
    const std::function<std::string(const MarkerRef&)>& placeholder = nullptr,
    const std::optional<MarkerRef>& root_ref = std::nullopt) {
    ExpandResult result;
    std::set<std::string> visiting;
    if (root_ref) visiting.insert(root_ref->key());

    std::function<void(const std::string&, int, std::vector<std::string>&)> walk =
        [&](const std::string& block, int indent_delta, std::vector<std::string>& out) {
            for (const auto& line : text::split_lines(block)) {
                auto rebase = [&](const std::string& l) {
                    if (indent_delta == 0 || text::trim(l).empty()) return l;
                    int ind = static_cast<int>(text::indentation_of(l));
                    int target = std::max(0, ind + indent_delta);
                    return std::string(static_cast<std::size_t>(target), ' ') +
                           l.substr(static_cast<std::size_t>(ind));
                };
                auto ref = parse_marker_line(line);
                if (!ref) {
                    out.push_back(rebase(line));
                    continue;
                }
                if (visiting.count(ref->key())) throw CyclicMarker(ref->key());
                const std::string* child = lookup(*ref);
                if (!child) {
                    if (!placeholder) throw UnresolvedMarker(ref->key());
                    result.unresolved.push_back(*ref);
                    std::string marker_indent =
                        line.substr(0, text::indentation_of(line));
                    out.push_back(rebase(marker_indent + placeholder(*ref)));
                    continue;
                }
                int marker_indent =
                    static_cast<int>(text::indentation_of(rebase(line)));
                int child_indent = 0;
                for (const auto& cl : text::split_lines(*child)) {
                    if (text::trim(cl).empty()) continue;
                    child_indent = static_cast<int>(text::indentation_of(cl));
                    break;
                }
                visiting.insert(ref->key());
                walk(*child, marker_indent - child_indent, out);
                visiting.erase(ref->key());
            }
        };

    std::vector<std::string> lines;
    walk(root_text, 0, lines);
    result.text = text::join_lines(lines);
    return result;
}

/// Rebuilds the original function text from its snippets. Exact inverse of
/// slice_function for unmodified snippets.
inline std::string reassemble_function(const std::vector<Snippet>& snippets) {
    const Snippet* root = nullptr;
    std::map<int, const Snippet*> by_id;
    for (const auto& s : snippets) {
        by_id[s.block_id] = &s;
        if (s.block_id == 0) root = &s;
    }
    if (!root) throw UnresolvedMarker(snippets.empty() ? "0" : snippets.front().function + "_0");
    auto lookup = [&](const MarkerRef& ref) -> const std::string* {
        if (ref.function != root->function) return nullptr;
        auto it = by_id.find(ref.block_id);
        return it == by_id.end() ? nullptr : &it->second->text;
    };
    MarkerRef root_ref{root->function, 0};
    return expand_markers(root->text, lookup, nullptr, root_ref).text;
}

/// Number of loop constructs textually present in a wat snippet, counting
/// both the flat `loop` opcode and the folded `(loop` form. Marker lines do
/// not count; this backs the one-loop-per-snippet budget.
inline int count_unmarked_loops(const std::string& snippet_text) {
    try {
        int count = 0;
        for (const auto& tok : wat::tokenize(snippet_text))
            if (tok.kind == wat::TokenKind::Atom && tok.text == "loop") ++count;
        return count;
    } catch (const ParseError&) {
        int count = 0;
        for (const auto& line : text::split_lines(snippet_text)) {
            std::string t = text::trim(line);
            if (text::starts_with(t, "loop") || text::starts_with(t, "(loop")) ++count;
        }
        return count;
    }
}

}  // namespace watc
