// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "watc/c/parser.hpp"

namespace watc::metrics {

/// Ordered labeled tree used for edit-distance scoring. Identifier names and
/// literal values are deliberately absent; operators stay, because swapping
/// an operator changes meaning while renaming a variable does not.
struct SkelNode {
    std::string label;
    std::vector<SkelNode> children;
};

inline SkelNode skeleton_of(const c::CNode& n) {
    SkelNode s;
    bool op_node = n.label == "binop" || n.label == "unop" || n.label == "assign" ||
                   n.label == "postop";
    s.label = op_node ? n.label + ":" + n.text : n.label;
    s.children.reserve(n.children.size());
    for (const auto& child : n.children) s.children.push_back(skeleton_of(child));
    return s;
}

inline std::size_t tree_size(const SkelNode& n) {
    std::size_t total = 1;
    for (const auto& child : n.children) total += tree_size(child);
    return total;
}

namespace detail {

struct FlatTree {
    std::vector<const SkelNode*> post;  // postorder
    std::vector<int> lld;               // leftmost leaf descendant, postorder index
    std::vector<int> keyroots;          // ascending
};

inline int flatten(const SkelNode& n, FlatTree& out) {
    int first_leaf = -1;
    for (const auto& child : n.children) {
        int l = flatten(child, out);
        if (first_leaf < 0) first_leaf = l;
    }
    out.post.push_back(&n);
    int idx = static_cast<int>(out.post.size()) - 1;
    out.lld.push_back(first_leaf < 0 ? idx : first_leaf);
    return out.lld.back();
}

inline FlatTree flat_tree(const SkelNode& root) {
    FlatTree t;
    flatten(root, t);
    std::map<int, int> last_with_lld;
    for (int i = 0; i < static_cast<int>(t.post.size()); ++i) last_with_lld[t.lld[i]] = i;
    for (const auto& [lld, idx] : last_with_lld) t.keyroots.push_back(idx);
    std::sort(t.keyroots.begin(), t.keyroots.end());
    return t;
}

}  // namespace detail

/// Ordered tree edit distance with unit costs (insert, delete, relabel),
/// computed with the keyroot dynamic program.
inline std::size_t tree_edit_distance(const SkelNode& a, const SkelNode& b) {
    detail::FlatTree A = detail::flat_tree(a);
    detail::FlatTree B = detail::flat_tree(b);
    int n = static_cast<int>(A.post.size());
    int m = static_cast<int>(B.post.size());
    std::vector<std::vector<int>> td(static_cast<std::size_t>(n),
                                     std::vector<int>(static_cast<std::size_t>(m), 0));

    for (int i : A.keyroots) {
        for (int j : B.keyroots) {
            int ioff = A.lld[static_cast<std::size_t>(i)];
            int joff = B.lld[static_cast<std::size_t>(j)];
            int w = i - ioff + 2;
            int h = j - joff + 2;
            std::vector<std::vector<int>> fd(static_cast<std::size_t>(w),
                                             std::vector<int>(static_cast<std::size_t>(h), 0));
            for (int x = 1; x < w; ++x) fd[static_cast<std::size_t>(x)][0] = x;
            for (int y = 1; y < h; ++y) fd[0][static_cast<std::size_t>(y)] = y;
            for (int x = 1; x < w; ++x) {
                for (int y = 1; y < h; ++y) {
                    int ai = ioff + x - 1;
                    int bj = joff + y - 1;
                    int del = fd[static_cast<std::size_t>(x - 1)][static_cast<std::size_t>(y)] + 1;
                    int ins = fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y - 1)] + 1;
                    if (A.lld[static_cast<std::size_t>(ai)] == ioff &&
                        B.lld[static_cast<std::size_t>(bj)] == joff) {
                        int rel =
                            A.post[static_cast<std::size_t>(ai)]->label ==
                                    B.post[static_cast<std::size_t>(bj)]->label
                                ? 0
                                : 1;
                        int sub = fd[static_cast<std::size_t>(x - 1)]
                                    [static_cast<std::size_t>(y - 1)] +
                                  rel;
                        fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                            std::min({del, ins, sub});
                        td[static_cast<std::size_t>(ai)][static_cast<std::size_t>(bj)] =
                            fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
                    } else {
                        int px = A.lld[static_cast<std::size_t>(ai)] - ioff;
                        int py = B.lld[static_cast<std::size_t>(bj)] - joff;
                        int sub = fd[static_cast<std::size_t>(px)][static_cast<std::size_t>(py)] +
                                  td[static_cast<std::size_t>(ai)][static_cast<std::size_t>(bj)];
                        fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                            std::min({del, ins, sub});
                    }
                }
            }
        }
    }
    return static_cast<std::size_t>(td[static_cast<std::size_t>(n - 1)]
                                      [static_cast<std::size_t>(m - 1)]);
}

/// Normalized edit-distance similarity: 1 - d/max(|a|, |b|), floored at 0.
/// Identical trees score 1; same-shape trees with every label changed score 0.
inline double aed_similarity(const SkelNode& a, const SkelNode& b) {
    std::size_t sa = tree_size(a);
    std::size_t sb = tree_size(b);
    std::size_t mx = std::max(sa, sb);
    if (mx == 0) return 1.0;
    double d = static_cast<double>(tree_edit_distance(a, b));
    double s = 1.0 - d / static_cast<double>(mx);
    return s < 0.0 ? 0.0 : s;
}

inline double aed_similarity(const c::CNode& a, const c::CNode& b) {
    return aed_similarity(skeleton_of(a), skeleton_of(b));
}

}  // namespace watc::metrics
