#pragma once

#include <vector>

#include "gridpt/stats.hpp"

namespace gridpt {

struct RecoveryStep {
    int added = -1;
    int parent = -1;
    double d = 0.0;
    double margin = 0.0;    // runner-up distance minus the chosen one
    bool tie = false;       // another candidate pair achieved the same distance
    bool match_tie = false; // the chosen pair's ordering was ambiguous
};

// Output of a recovery run. edges hold (child, parent); phases[i][s] is the
// phase assigned to slot s of node i.
struct RecoveryResult {
    int root = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<Phase>> phases;
    std::vector<RecoveryStep> steps;
};

struct NextPick {
    int node = -1;
    int parent = -1;
    double d = 0.0;
    double margin = 0.0;
    bool tie = false;
};

// Smallest-distance pair between a candidate and a tree node. Candidates are
// scanned in ascending id order with strict improvement, so ties resolve to
// the smallest (candidate, parent) pair and are flagged. Every scanned pair
// must have a score cell unless `require_all` is cleared, in which case
// cell-less pairs are treated as inadmissible edges and skipped (labeled
// tables omit pairs whose phase sets do not nest).
inline NextPick get_next(const PairScores& scores, const std::vector<int>& tree,
                         const std::vector<int>& candidates, bool require_all = true) {
    if (candidates.empty() || tree.empty())
        throw Error("bad_argument", "get_next needs non-empty candidate and tree sets");
    NextPick best;
    double runner_up = 0.0;
    bool have_best = false, have_runner = false;
    for (int a : candidates) {
        for (int b : tree) {
            const auto& cell = scores.at(a, b);
            if (!cell) {
                if (require_all)
                    throw Error("missing_pair", "no score for pair (" + std::to_string(a) +
                                                    ", " + std::to_string(b) + ")");
                continue;
            }
            double d = cell->d;
            if (!have_best) {
                best.node = a;
                best.parent = b;
                best.d = d;
                have_best = true;
            } else if (d < best.d) {
                runner_up = best.d;
                have_runner = true;
                best.node = a;
                best.parent = b;
                best.d = d;
                best.tie = false;
            } else {
                if (d == best.d) best.tie = true;
                if (!have_runner || d < runner_up) {
                    runner_up = d;
                    have_runner = true;
                }
            }
        }
    }
    if (!have_best)
        throw Error("missing_pair", "no admissible pair between the tree and the remaining nodes");
    best.margin = have_runner ? runner_up - best.d : 0.0;
    return best;
}

namespace detail {

struct NodeBuckets {
    std::vector<int> n3, n2, n1;
};

inline NodeBuckets bucket_by_count(const ChannelLayout& layout, int skip) {
    NodeBuckets b;
    for (int i = 0; i < layout.n(); ++i) {
        if (i == skip) continue;
        int c = layout.count[static_cast<std::size_t>(i)];
        (c == 3 ? b.n3 : c == 2 ? b.n2 : b.n1).push_back(i);
    }
    return b;
}

// Shared greedy loop: grow the tree from `root`, attaching all three-phase
// nodes first, then two-phase, then single-phase. `on_attach` receives each
// (child, parent) with its score cell.
template <class F>
inline void grow_tree(const PairScores& scores, const ChannelLayout& layout, int root,
                      bool require_all, RecoveryResult& res, F&& on_attach) {
    NodeBuckets buckets = bucket_by_count(layout, root);
    std::vector<int> tree = {root};
    for (std::vector<int>* group : {&buckets.n3, &buckets.n2, &buckets.n1}) {
        while (!group->empty()) {
            NextPick pick = get_next(scores, tree, *group, require_all);
            const auto& cell = scores.at(pick.node, pick.parent);
            res.edges.push_back({pick.node, pick.parent});
            RecoveryStep step;
            step.added = pick.node;
            step.parent = pick.parent;
            step.d = pick.d;
            step.margin = pick.margin;
            step.tie = pick.tie;
            step.match_tie = cell->tie;
            res.steps.push_back(step);
            on_attach(pick.node, pick.parent, *cell);
            group->erase(std::find(group->begin(), group->end(), pick.node));
            tree.push_back(pick.node);
            std::sort(tree.begin(), tree.end());
        }
    }
}

} // namespace detail

// Joint topology and phase recovery from a covariance table. The reference
// acts as the root when it carries three slots (its zero covariance rows are
// legitimate: it is the voltage origin); otherwise the lowest three-phase
// node seeds the tree. Root slots are labeled (a, b, c) in slot order and
// every attached node inherits its parent's labels through the best ordering.
inline RecoveryResult gpt(const CovTable& table, int reference) {
    const int n = table.layout.n();
    if (reference < 0 || reference >= n)
        throw Error("bad_argument", "reference id out of range");

    int root = -1;
    if (table.layout.count[static_cast<std::size_t>(reference)] == 3) {
        root = reference;
    } else {
        for (int i = 0; i < n; ++i)
            if (table.layout.count[static_cast<std::size_t>(i)] == 3) {
                root = i;
                break;
            }
    }
    if (root < 0) throw Error("no_three_phase_root", "recovery needs a three-phase node to seed");

    RecoveryResult res;
    res.root = root;
    res.phases.assign(static_cast<std::size_t>(n), {});
    res.phases[static_cast<std::size_t>(root)] = {Phase::a, Phase::b, Phase::c};

    PairScores scores = pairwise_scores(table);
    detail::grow_tree(scores, table.layout, root, true, res,
                      [&](int child, int parent, const PairScore& cell) {
                          auto& pp = res.phases[static_cast<std::size_t>(parent)];
                          auto& cp = res.phases[static_cast<std::size_t>(child)];
                          cp.resize(static_cast<std::size_t>(cell.map.size));
                          for (int s = 0; s < cell.map.size; ++s)
                              cp[static_cast<std::size_t>(s)] =
                                  pp[static_cast<std::size_t>(cell.map[s])];
                      });
    return res;
}

// Phase labeling when the tree is already known: walk it from the reference
// and carry labels across each edge through the best ordering.
inline RecoveryResult phase_id_known_topology(const CovTable& table,
                                              const std::vector<std::pair<int, int>>& edges,
                                              int reference) {
    const int n = table.layout.n();
    if (reference < 0 || reference >= n)
        throw Error("bad_argument", "reference id out of range");
    if (table.layout.count[static_cast<std::size_t>(reference)] != 3)
        throw Error("bad_argument", "reference must carry three slots");

    std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    seen[static_cast<std::size_t>(reference)] = true;
    if (static_cast<int>(edges.size()) != n - 1)
        throw Error("bad_argument", "edge list does not span the nodes");
    std::vector<std::pair<int, int>> pending = edges;
    // orient the given edges away from the reference
    bool progress = true;
    while (progress && !pending.empty()) {
        progress = false;
        for (std::size_t k = 0; k < pending.size();) {
            auto [u, v] = pending[k];
            if (seen[static_cast<std::size_t>(u)] == seen[static_cast<std::size_t>(v)]) {
                ++k;
                continue;
            }
            int par = seen[static_cast<std::size_t>(u)] ? u : v;
            int child = (par == u) ? v : u;
            children[static_cast<std::size_t>(par)].push_back(child);
            seen[static_cast<std::size_t>(child)] = true;
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
            progress = true;
        }
    }
    if (!pending.empty()) throw Error("bad_argument", "edge list is not a spanning tree");

    RecoveryResult res;
    res.root = reference;
    res.edges = edges;
    res.phases.assign(static_cast<std::size_t>(n), {});
    res.phases[static_cast<std::size_t>(reference)] = {Phase::a, Phase::b, Phase::c};

    std::vector<int> stack = {reference};
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : children[static_cast<std::size_t>(u)]) {
            MatchResult m = best_phase_match(table, v, u);
            auto& pp = res.phases[static_cast<std::size_t>(u)];
            auto& cp = res.phases[static_cast<std::size_t>(v)];
            cp.resize(static_cast<std::size_t>(m.map.size));
            for (int s = 0; s < m.map.size; ++s)
                cp[static_cast<std::size_t>(s)] = pp[static_cast<std::size_t>(m.map[s])];
            RecoveryStep step;
            step.added = v;
            step.parent = u;
            step.d = diff_variance(table, v, u, m.map);
            step.match_tie = m.tie;
            res.steps.push_back(step);
            stack.push_back(v);
        }
    }
    return res;
}

// Topology recovery when per-slot phase labels are already known; orderings
// are fixed by the labels and only the distances drive the greedy growth.
// Pairs whose label sets do not nest cannot be edges and are never scanned.
inline RecoveryResult topology_known_phases(const CovTable& table,
                                            const std::vector<std::vector<Phase>>& labels,
                                            int reference) {
    const int n = table.layout.n();
    if (reference < 0 || reference >= n)
        throw Error("bad_argument", "reference id out of range");
    if (table.layout.count[static_cast<std::size_t>(reference)] != 3)
        throw Error("bad_argument", "reference must carry three slots");

    PairScores scores = pairwise_scores_labeled(table, labels);
    RecoveryResult res;
    res.root = reference;
    res.phases = labels;
    detail::grow_tree(scores, table.layout, reference, false, res,
                      [](int, int, const PairScore&) {});
    return res;
}

// Blind recovery straight from a panel; works identically for phasor and
// magnitude panels since both feed the same covariance table.
inline RecoveryResult recover_panel(const Panel& panel, int reference) {
    return gpt(cov_from_panel(panel, reference), reference);
}

inline RecoveryResult recover_from_magnitudes(const Panel& panel, int reference) {
    if (panel.mode != PanelMode::magnitude)
        throw Error("bad_argument", "panel does not hold magnitude readings");
    return recover_panel(panel, reference);
}

} // namespace gridpt
