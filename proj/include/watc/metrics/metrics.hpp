// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "watc/c/lexer.hpp"
#include "watc/c/parser.hpp"
#include "watc/metrics/ted.hpp"
#include "watc/text.hpp"

namespace watc::metrics {

/// Cyclomatic complexity by decision-point counting: one plus every branch
/// construct and short-circuit operator. Counting syntax nodes rather than
/// graph edges keeps do-while and for from being double charged.
inline int cyclomatic(const c::CNode& fn) {
    int decisions = 0;
    c::visit(fn, [&](const c::CNode& n) {
        if (n.label == "if" || n.label == "while" || n.label == "for" || n.label == "do" ||
            n.label == "case" || n.label == "cond")
            ++decisions;
        else if (n.label == "binop" && (n.text == "&&" || n.text == "||"))
            ++decisions;
    });
    return 1 + decisions;
}

/// Mean complexity agreement over the source functions: a name-matched pair
/// contributes min/max of the two complexities, an unmatched source function
/// contributes zero. Decompiled-only functions are listed, not scored.
inline double ccn_similarity_value(const c::CUnit& source, const c::CUnit& decompiled,
                                   std::vector<std::string>* extra_functions = nullptr) {
    std::map<std::string, const c::CFunction*> dec_by_name;
    for (const auto& fn : decompiled.functions) dec_by_name[fn.name] = &fn;

    if (extra_functions) {
        std::set<std::string> src_names;
        for (const auto& fn : source.functions) src_names.insert(fn.name);
        for (const auto& fn : decompiled.functions)
            if (!src_names.count(fn.name)) extra_functions->push_back(fn.name);
    }
    if (source.functions.empty()) return decompiled.functions.empty() ? 1.0 : 0.0;

    double total = 0.0;
    for (const auto& fn : source.functions) {
        auto it = dec_by_name.find(fn.name);
        if (it == dec_by_name.end()) continue;
        double a = static_cast<double>(cyclomatic(fn.node));
        double b = static_cast<double>(cyclomatic(it->second->node));
        total += std::min(a, b) / std::max(a, b);
    }
    return total / static_cast<double>(source.functions.size());
}

namespace detail {

inline std::vector<std::string> metric_tokens(const std::string& text_in) {
    std::vector<std::string> out;
    try {
        for (const auto& t : c::tokenize_c(text_in)) {
            if (t.kind == c::TokKind::Eof) break;
            out.push_back(t.text);
        }
    } catch (const ParseError&) {
        std::string word;
        for (char ch : text_in) {
            if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!word.empty()) out.push_back(word);
                word.clear();
            } else {
                word += ch;
            }
        }
        if (!word.empty()) out.push_back(word);
    }
    return out;
}

}  // namespace detail

/// Cosine of the token-frequency vectors of two code texts.
inline double cosine_similarity_value(const std::string& a, const std::string& b) {
    auto ta = detail::metric_tokens(a);
    auto tb = detail::metric_tokens(b);
    if (ta.empty() && tb.empty()) return 1.0;
    if (ta.empty() || tb.empty()) return 0.0;
    std::map<std::string, double> fa, fb;
    for (const auto& t : ta) fa[t] += 1.0;
    for (const auto& t : tb) fb[t] += 1.0;
    double dot = 0, na = 0, nb = 0;
    for (const auto& [tok, n] : fa) {
        na += n * n;
        auto it = fb.find(tok);
        if (it != fb.end()) dot += n * it->second;
    }
    for (const auto& [tok, n] : fb) nb += n * n;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct CodeBleuScores {
    double total = 0.0;
    double bleu = 0.0;
    double weighted_bleu = 0.0;
    double ast_match = 0.0;
    double dataflow_match = 0.0;
    bool candidate_parsed = true;
};

namespace detail {

struct NGramCounts {
    std::map<std::vector<std::string>, double> plain;
    double plain_total = 0.0;
    std::map<std::vector<std::string>, double> weighted;
    double weighted_total = 0.0;
};

inline double ngram_weight(const std::vector<std::string>& gram) {
    for (const auto& t : gram)
        if (c::c_keywords().count(t)) return 5.0;
    return 1.0;
}

inline NGramCounts ngrams_of(const std::vector<std::string>& toks, std::size_t n) {
    NGramCounts counts;
    if (toks.size() < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::vector<std::string> gram(toks.begin() + static_cast<long>(i),
                                      toks.begin() + static_cast<long>(i + n));
        double w = ngram_weight(gram);
        counts.plain[gram] += 1.0;
        counts.plain_total += 1.0;
        counts.weighted[gram] += w;
        counts.weighted_total += w;
    }
    return counts;
}

inline void bleu_components(const std::vector<std::string>& ref,
                            const std::vector<std::string>& cand, double& bleu_out,
                            double& weighted_out) {
    if (ref.empty() && cand.empty()) {
        bleu_out = weighted_out = 1.0;
        return;
    }
    if (ref.empty() || cand.empty()) {
        bleu_out = weighted_out = 0.0;
        return;
    }
    double log_sum = 0.0, wlog_sum = 0.0;
    int orders = 0;
    bool zero = false, wzero = false;
    for (std::size_t n = 1; n <= 4; ++n) {
        NGramCounts rc = ngrams_of(ref, n);
        NGramCounts cc = ngrams_of(cand, n);
        if (cc.plain_total == 0.0) continue;
        ++orders;
        double clipped = 0.0, wclipped = 0.0;
        for (const auto& [gram, count] : cc.plain) {
            auto it = rc.plain.find(gram);
            if (it != rc.plain.end()) clipped += std::min(count, it->second);
        }
        for (const auto& [gram, wcount] : cc.weighted) {
            auto it = rc.weighted.find(gram);
            if (it != rc.weighted.end()) wclipped += std::min(wcount, it->second);
        }
        double p = clipped / cc.plain_total;
        double wp = wclipped / cc.weighted_total;
        if (p <= 0.0) zero = true; else log_sum += std::log(p);
        if (wp <= 0.0) wzero = true; else wlog_sum += std::log(wp);
    }
    double bp = 1.0;
    double r = static_cast<double>(ref.size());
    double ccount = static_cast<double>(cand.size());
    if (ccount < r) bp = std::exp(1.0 - r / ccount);
    if (orders == 0) {
        bleu_out = weighted_out = 0.0;
        return;
    }
    bleu_out = zero ? 0.0 : bp * std::exp(log_sum / orders);
    weighted_out = wzero ? 0.0 : bp * std::exp(wlog_sum / orders);
}

inline void subtree_hashes(const SkelNode& n, std::vector<std::uint64_t>& out,
                           std::uint64_t& own) {
    std::uint64_t h = text::fnv1a(n.label);
    for (const auto& child : n.children) {
        std::uint64_t ch = 0;
        subtree_hashes(child, out, ch);
        h = (h * 1099511628211ull) ^ ch;
    }
    out.push_back(h);
    own = h;
}

inline double multiset_match(const std::vector<std::uint64_t>& ref,
                             const std::vector<std::uint64_t>& cand) {
    if (ref.empty()) return cand.empty() ? 1.0 : 0.0;
    std::map<std::uint64_t, long> rc;
    for (auto h : ref) ++rc[h];
    long hit = 0;
    for (auto h : cand) {
        auto it = rc.find(h);
        if (it != rc.end() && it->second > 0) {
            --it->second;
            ++hit;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(ref.size());
}

struct DataflowState {
    std::map<std::string, int> var_ordinal;
    std::map<std::string, int> last_def;
    int def_counter = 0;
    std::vector<std::pair<int, int>> pairs;  // (variable ordinal, defining event)

    int ordinal(const std::string& name) {
        auto it = var_ordinal.find(name);
        if (it != var_ordinal.end()) return it->second;
        int next = static_cast<int>(var_ordinal.size());
        var_ordinal[name] = next;
        return next;
    }
    void use(const std::string& name) {
        auto it = last_def.find(name);
        pairs.emplace_back(ordinal(name), it == last_def.end() ? -1 : it->second);
    }
    void def(const std::string& name) {
        ordinal(name);
        last_def[name] = def_counter++;
    }
};

inline void dataflow_walk(const c::CNode& n, DataflowState& st);

inline void dataflow_uses(const c::CNode& n, DataflowState& st) {
    if (n.label == "ident") {
        st.use(n.text);
        return;
    }
    dataflow_walk(n, st);
}

inline void dataflow_walk(const c::CNode& n, DataflowState& st) {
    if (n.label == "assign") {
        const c::CNode& lhs = n.children[0];
        bool compound = n.text != "=";
        if (lhs.label == "ident") {
            if (compound) st.use(lhs.text);
            for (std::size_t i = 1; i < n.children.size(); ++i)
                dataflow_uses(n.children[i], st);
            st.def(lhs.text);
        } else {
            for (const auto& child : n.children) dataflow_uses(child, st);
        }
        return;
    }
    if (n.label == "decl") {
        for (const auto& d : n.children) {
            if (d.label != "declarator") continue;
            std::string name = d.text;
            while (!name.empty() && name.front() == '*') name.erase(name.begin());
            bool has_init = false;
            for (const auto& child : d.children) {
                if (child.label == "array") continue;
                has_init = true;
                dataflow_uses(child, st);
            }
            st.def(name);
            (void)has_init;
        }
        return;
    }
    if ((n.label == "unop" || n.label == "postop") &&
        (n.text == "++" || n.text == "--") && !n.children.empty() &&
        n.children[0].label == "ident") {
        st.use(n.children[0].text);
        st.def(n.children[0].text);
        return;
    }
    if (n.label == "call") {
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i == 0 && n.children[i].label == "ident") continue;  // callee name
            dataflow_uses(n.children[i], st);
        }
        return;
    }
    if (n.label == "ident") {
        st.use(n.text);
        return;
    }
    for (const auto& child : n.children) dataflow_walk(child, st);
}

inline std::vector<std::pair<int, int>> dataflow_pairs(const c::CUnit& unit) {
    DataflowState st;
    for (const auto& fn : unit.functions) {
        for (const auto& name : fn.param_names)
            if (!name.empty()) st.def(name);
        dataflow_walk(fn.node, st);
    }
    return st.pairs;
}

inline double dataflow_match_value(const c::CUnit& ref, const c::CUnit& cand) {
    auto rp = dataflow_pairs(ref);
    auto cp = dataflow_pairs(cand);
    if (rp.empty()) return cp.empty() ? 1.0 : 0.0;
    std::map<std::pair<int, int>, long> counts;
    for (const auto& p : rp) ++counts[p];
    long hit = 0;
    for (const auto& p : cp) {
        auto it = counts.find(p);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++hit;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(rp.size());
}

}  // namespace detail

/// Composite n-gram / weighted n-gram / syntax-tree / dataflow score with
/// equal quarter weights. A candidate that fails to parse loses the tree and
/// dataflow quarters rather than the whole score.
inline CodeBleuScores codebleu_value(const std::string& ref_text, const c::CUnit& ref_unit,
                                     const std::string& cand_text,
                                     const c::CUnit& cand_unit) {
    CodeBleuScores scores;
    auto ref_toks = detail::metric_tokens(ref_text);
    auto cand_toks = detail::metric_tokens(cand_text);
    detail::bleu_components(ref_toks, cand_toks, scores.bleu, scores.weighted_bleu);

    scores.candidate_parsed = cand_unit.parse_ok;
    if (cand_unit.parse_ok || !cand_unit.functions.empty()) {
        std::vector<std::uint64_t> rh, ch;
        std::uint64_t own = 0;
        detail::subtree_hashes(skeleton_of(ref_unit.root), rh, own);
        detail::subtree_hashes(skeleton_of(cand_unit.root), ch, own);
        scores.ast_match = detail::multiset_match(rh, ch);
        scores.dataflow_match = detail::dataflow_match_value(ref_unit, cand_unit);
    }
    scores.total = 0.25 * scores.bleu + 0.25 * scores.weighted_bleu + 0.25 * scores.ast_match +
                   0.25 * scores.dataflow_match;
    return scores;
}

inline std::size_t nonblank_lines(const std::string& text_in) {
    std::size_t n = 0;
    for (const auto& line : text::split_lines(text_in))
        if (!text::trim(line).empty()) ++n;
    return n;
}

/// Percentage growth of the decompiled text over the source, in non-blank
/// lines. 0 for identical volume; negative when the decompiled text is
/// smaller.
inline double bloat_percent_value(const std::string& source, const std::string& decompiled) {
    double s = static_cast<double>(nonblank_lines(source));
    double d = static_cast<double>(nonblank_lines(decompiled));
    if (s == 0.0) return d == 0.0 ? 0.0 : d * 100.0;
    return (d - s) / s * 100.0;
}

/// Share of recovered functions whose bodies parse cleanly. Empty output has
/// no syntactic completeness to speak of, hence the empty optional.
inline std::optional<double> syntax_completeness_value(const c::CUnit& unit) {
    std::size_t units = unit.functions.size();
    std::size_t broken_top = 0;
    for (const auto& child : unit.root.children)
        if (child.label == "error") ++broken_top;
    units += broken_top;
    if (units == 0) return std::nullopt;
    std::size_t ok = 0;
    for (const auto& fn : unit.functions)
        if (!fn.has_error) ++ok;
    return static_cast<double>(ok) / static_cast<double>(units);
}

/// Share of source functions that come back whole: present by name, parsing
/// cleanly, and not carrying unresolved holes.
inline double function_completeness_value(const c::CUnit& source, const c::CUnit& decompiled,
                                          const std::set<std::string>& incomplete = {}) {
    if (source.functions.empty()) return 1.0;
    std::map<std::string, const c::CFunction*> dec_by_name;
    for (const auto& fn : decompiled.functions) dec_by_name[fn.name] = &fn;
    std::size_t whole = 0;
    for (const auto& fn : source.functions) {
        auto it = dec_by_name.find(fn.name);
        if (it == dec_by_name.end()) continue;
        if (it->second->has_error) continue;
        if (incomplete.count(fn.name)) continue;
        ++whole;
    }
    return static_cast<double>(whole) / static_cast<double>(source.functions.size());
}

struct MetricReport {
    double aed_similarity = 0.0;
    double ccn_similarity = 0.0;
    double cosine_similarity = 0.0;
    double codebleu = 0.0;
    double bleu = 0.0;
    double weighted_bleu = 0.0;
    double ast_match = 0.0;
    double dataflow_match = 0.0;
    double bloat_percent = 0.0;
    std::optional<double> syntax_completeness;
    double function_completeness = 0.0;
    std::size_t source_functions = 0;
    std::size_t decompiled_functions = 0;
    std::vector<std::string> extra_functions;
    bool source_parse_ok = true;
    bool decompiled_parse_ok = true;
};

/// Runs the whole battery on one source/decompiled pair.
inline MetricReport score_pair(const std::string& source_text,
                               const std::string& decompiled_text,
                               const std::set<std::string>& incomplete = {}) {
    MetricReport r;
    c::CUnit src = c::parse_c(source_text);
    c::CUnit dec = c::parse_c(decompiled_text);
    r.source_parse_ok = src.parse_ok;
    r.decompiled_parse_ok = dec.parse_ok;
    r.source_functions = src.functions.size();
    r.decompiled_functions = dec.functions.size();

    r.aed_similarity = aed_similarity(src.root, dec.root);
    r.ccn_similarity = ccn_similarity_value(src, dec, &r.extra_functions);
    r.cosine_similarity = cosine_similarity_value(source_text, decompiled_text);
    CodeBleuScores cb = codebleu_value(source_text, src, decompiled_text, dec);
    r.codebleu = cb.total;
    r.bleu = cb.bleu;
    r.weighted_bleu = cb.weighted_bleu;
    r.ast_match = cb.ast_match;
    r.dataflow_match = cb.dataflow_match;
    r.bloat_percent = bloat_percent_value(source_text, decompiled_text);
    r.syntax_completeness = syntax_completeness_value(dec);
    r.function_completeness = function_completeness_value(src, dec, incomplete);
    return r;
}

}  // namespace watc::metrics
