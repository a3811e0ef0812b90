#pragma once

#include <optional>
#include <vector>

#include "gridpt/simulate.hpp"

namespace gridpt {

// Channel layout for covariance tables: every node (reference included) gets
// `count` consecutive slots. Phase sets may be known (analytic tables,
// diagnostics) or not (blind recovery from a panel); recovery itself only
// ever reads the counts.
struct ChannelLayout {
    std::vector<int> count;
    std::vector<int> offset;
    std::vector<PhaseSet> sets;
    bool sets_known = false;
    int total = 0;

    int n() const { return static_cast<int>(count.size()); }

    static ChannelLayout from_counts(const std::vector<int>& counts) {
        ChannelLayout l;
        l.count = counts;
        l.offset.resize(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] < 1 || counts[i] > 3)
                throw Error("bad_argument", "channel counts must be between 1 and 3");
            l.offset[i] = l.total;
            l.total += counts[i];
        }
        l.sets.assign(counts.size(), PhaseSet{});
        return l;
    }

    static ChannelLayout from_net(const RadialNetwork& net) {
        std::vector<int> counts(static_cast<std::size_t>(net.n()));
        for (int i = 0; i < net.n(); ++i)
            counts[static_cast<std::size_t>(i)] = net.node_phases[static_cast<std::size_t>(i)].size();
        ChannelLayout l = from_counts(counts);
        l.sets = net.node_phases;
        l.sets_known = true;
        return l;
    }
};

// Real channel-by-channel covariance over all nodes. Rows and columns of an
// unmeasured reference node are zero, which encodes its role as the voltage
// origin: every score against it vanishes.
struct CovTable {
    ChannelLayout layout;
    RMat c;

    double at(int i, int s, int j, int t) const {
        return c(static_cast<std::size_t>(layout.offset[static_cast<std::size_t>(i)] + s),
                 static_cast<std::size_t>(layout.offset[static_cast<std::size_t>(j)] + t));
    }
};

// Sample covariance of two equally long series: real part of the centered
// complex cross-moment, or the plain real covariance. Normalized by T-1.
inline double empirical_cov(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error("bad_argument", "series must have equal length of at least 2");
    cplx mx{}, my{};
    for (std::size_t t = 0; t < x.size(); ++t) {
        mx += x[t];
        my += y[t];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        cplx dx = x[t] - mx, dy = y[t] - my;
        s += dx.real() * dy.real() + dx.imag() * dy.imag();
    }
    return s / static_cast<double>(x.size() - 1);
}

inline double empirical_cov(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error("bad_argument", "series must have equal length of at least 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        mx += x[t];
        my += y[t];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) s += (x[t] - mx) * (y[t] - my);
    return s / static_cast<double>(x.size() - 1);
}

// Full covariance table from a measurement panel. Panel channels must be
// grouped by ascending node id with canonically ordered phases; the reference
// node must not appear among them and gets an all-zero three-slot block.
// The sample covariance is the second hot loop; channels are centered once
// into channel-major buffers first.
inline CovTable cov_from_panel(const Panel& panel, int reference) {
    if (panel.samples < 2) throw Error("bad_argument", "need at least two samples");
    const int C = panel.width();
    if (C < 1) throw Error("bad_argument", "panel has no channels");

    int maxnode = reference;
    for (const auto& [node, p] : panel.channels) {
        (void)p;
        if (node == reference)
            throw Error("bad_panel", "panel contains channels of the reference node");
        maxnode = std::max(maxnode, node);
    }
    const int n = maxnode + 1;

    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    int last_node = -1;
    Phase last_phase = Phase::a;
    for (const auto& [node, p] : panel.channels) {
        if (node < last_node || (node == last_node && p <= last_phase))
            throw Error("bad_panel", "panel channels must be sorted by node id and phase");
        counts[static_cast<std::size_t>(node)] += 1;
        last_node = node;
        last_phase = p;
    }
    counts[static_cast<std::size_t>(reference)] = 3;
    for (int i = 0; i < n; ++i)
        if (counts[static_cast<std::size_t>(i)] == 0)
            throw Error("bad_panel", "node " + std::to_string(i) + " has no channels");

    ChannelLayout layout = ChannelLayout::from_counts(counts);

    // centered channel-major buffers
    const int T = panel.samples;
    std::vector<double> re(static_cast<std::size_t>(C) * static_cast<std::size_t>(T));
    std::vector<double> im;
    const bool cx = (panel.mode == PanelMode::phasor);
    if (cx) im.resize(re.size());
    for (int ch = 0; ch < C; ++ch) {
        double mr = 0.0, mi = 0.0;
        if (cx) {
            for (int t = 0; t < T; ++t) {
                mr += panel.cat(t, ch).real();
                mi += panel.cat(t, ch).imag();
            }
        } else {
            for (int t = 0; t < T; ++t) mr += panel.rat(t, ch);
        }
        mr /= T;
        mi /= T;
        double* rrow = &re[static_cast<std::size_t>(ch) * static_cast<std::size_t>(T)];
        if (cx) {
            double* irow = &im[static_cast<std::size_t>(ch) * static_cast<std::size_t>(T)];
            for (int t = 0; t < T; ++t) {
                rrow[t] = panel.cat(t, ch).real() - mr;
                irow[t] = panel.cat(t, ch).imag() - mi;
            }
        } else {
            for (int t = 0; t < T; ++t) rrow[t] = panel.rat(t, ch) - mr;
        }
    }

    // map panel channel -> table channel
    std::vector<int> slot(static_cast<std::size_t>(C));
    {
        std::vector<int> next(static_cast<std::size_t>(n), 0);
        for (int ch = 0; ch < C; ++ch) {
            int node = panel.channels[static_cast<std::size_t>(ch)].first;
            slot[static_cast<std::size_t>(ch)] =
                layout.offset[static_cast<std::size_t>(node)] + next[static_cast<std::size_t>(node)]++;
        }
    }

    CovTable table;
    table.layout = layout;
    table.c = RMat(static_cast<std::size_t>(layout.total), static_cast<std::size_t>(layout.total));
    const double norm = 1.0 / (T - 1);
    for (int p = 0; p < C; ++p) {
        const double* rp = &re[static_cast<std::size_t>(p) * static_cast<std::size_t>(T)];
        const double* ip = cx ? &im[static_cast<std::size_t>(p) * static_cast<std::size_t>(T)] : nullptr;
        for (int q = p; q < C; ++q) {
            const double* rq = &re[static_cast<std::size_t>(q) * static_cast<std::size_t>(T)];
            double s = 0.0;
            if (cx) {
                const double* iq = &im[static_cast<std::size_t>(q) * static_cast<std::size_t>(T)];
                for (int t = 0; t < T; ++t) s += rp[t] * rq[t] + ip[t] * iq[t];
            } else {
                for (int t = 0; t < T; ++t) s += rp[t] * rq[t];
            }
            s *= norm;
            table.c(static_cast<std::size_t>(slot[static_cast<std::size_t>(p)]),
                    static_cast<std::size_t>(slot[static_cast<std::size_t>(q)])) = s;
            table.c(static_cast<std::size_t>(slot[static_cast<std::size_t>(q)]),
                    static_cast<std::size_t>(slot[static_cast<std::size_t>(p)])) = s;
        }
    }
    return table;
}

// Exact covariance implied by the linear model with independent injections:
// cov(v_p, v_q) = sum over injection channels k of s2_k Re(Z[p,k] conj(Z[q,k])).
// Only the independent case is supported; correlated injections change the
// matching scores in ways this table would misrepresent, so eps != 0 is
// rejected outright.
inline CovTable analytic_cov(const RadialNetwork& net, const InjectionSpec& spec) {
    if (spec.epsilon != 0.0)
        throw Error("unsupported", "analytic covariance requires epsilon == 0");
    require_valid(net);
    spec.validate(-1 /* unused */);

    Rooted tree = Rooted::build(net);
    BlockIndex red = BlockIndex::reduced(net);
    CMat z = impedance_by_paths(net, tree, red);

    std::vector<double> w(static_cast<std::size_t>(red.total));
    for (int k = 0; k < red.total; ++k) {
        int node = red.channels[static_cast<std::size_t>(k)].first;
        auto it = spec.node_variance.find(node);
        w[static_cast<std::size_t>(k)] = (it != spec.node_variance.end()) ? it->second : spec.s2;
    }

    ChannelLayout layout = ChannelLayout::from_net(net);
    CovTable table;
    table.layout = layout;
    table.c = RMat(static_cast<std::size_t>(layout.total), static_cast<std::size_t>(layout.total));

    // reduced channel -> table channel
    std::vector<int> slot(static_cast<std::size_t>(red.total));
    for (int ch = 0; ch < red.total; ++ch) {
        auto [node, p] = red.channels[static_cast<std::size_t>(ch)];
        int s = net.node_phases[static_cast<std::size_t>(node)].slot_of(p);
        slot[static_cast<std::size_t>(ch)] = layout.offset[static_cast<std::size_t>(node)] + s;
    }

    for (int p = 0; p < red.total; ++p) {
        for (int q = p; q < red.total; ++q) {
            double s = 0.0;
            for (int k = 0; k < red.total; ++k) {
                cplx zp = z(static_cast<std::size_t>(p), static_cast<std::size_t>(k));
                cplx zq = z(static_cast<std::size_t>(q), static_cast<std::size_t>(k));
                s += w[static_cast<std::size_t>(k)] *
                     (zp.real() * zq.real() + zp.imag() * zq.imag());
            }
            table.c(static_cast<std::size_t>(slot[static_cast<std::size_t>(p)]),
                    static_cast<std::size_t>(slot[static_cast<std::size_t>(q)])) = s;
            table.c(static_cast<std::size_t>(slot[static_cast<std::size_t>(q)]),
                    static_cast<std::size_t>(slot[static_cast<std::size_t>(p)])) = s;
        }
    }
    return table;
}

// Matching score of ordering `map` between node i's slots and node j's:
// sum over i-slots s of cov(i slot s, j slot map[s]).
inline double phase_match_score(const CovTable& t, int i, int j, const SlotMap& map) {
    double s = 0.0;
    for (int a = 0; a < map.size; ++a) s += t.at(i, a, j, map[a]);
    return s;
}

// Variant summing correlation coefficients instead of raw covariances, so
// high-variance channels cannot dominate the ordering choice. Slot pairs
// where either variance is zero contribute nothing.
inline double phase_match_score_normalized(const CovTable& t, int i, int j, const SlotMap& map) {
    double s = 0.0;
    for (int a = 0; a < map.size; ++a) {
        double den = t.at(i, a, i, a) * t.at(j, map[a], j, map[a]);
        if (den > 0.0) s += t.at(i, a, j, map[a]) / std::sqrt(den);
    }
    return s;
}

struct MatchResult {
    SlotMap map;
    double score = 0.0;
    bool tie = false;
};

// Best injective ordering of node i's slots into node j's by matching score.
// Requires count(i) <= count(j). Maps are scanned in lexicographic order and
// kept only on strict improvement, so ties resolve to the lexicographically
// smallest map and are flagged. `normalized` switches the score to summed
// correlations; off by default since the raw sum is the proven statistic.
inline MatchResult best_phase_match(const CovTable& t, int i, int j, bool normalized = false) {
    int ki = t.layout.count[static_cast<std::size_t>(i)];
    int kj = t.layout.count[static_cast<std::size_t>(j)];
    if (ki > kj)
        throw Error("bad_argument", "cannot match node with more phases into one with fewer");
    MatchResult best;
    bool first = true;
    for (const SlotMap& m : enumerate_slot_maps(ki, kj)) {
        double s = normalized ? phase_match_score_normalized(t, i, j, m)
                              : phase_match_score(t, i, j, m);
        if (first) {
            best.map = m;
            best.score = s;
            first = false;
        } else if (s > best.score) {
            best.map = m;
            best.score = s;
            best.tie = false;
        } else if (s == best.score) {
            best.tie = true;
        }
    }
    return best;
}

// Summed variance of the per-slot differences under an ordering, the
// distance the tree step minimizes.
inline double diff_variance(const CovTable& t, int i, int j, const SlotMap& map) {
    double s = 0.0;
    for (int a = 0; a < map.size; ++a)
        s += t.at(i, a, i, a) + t.at(j, map[a], j, map[a]) - 2.0 * t.at(i, a, j, map[a]);
    return s;
}

struct PairScore {
    SlotMap map;
    double c = 0.0;
    double d = 0.0;
    bool tie = false;       // matching score tie
    bool cross_set = false; // matched across non-nested phase sets (needs known sets)
};

// Scores for every ordered admissible pair (i, j), count(i) <= count(j):
// the best ordering, its score, and the distance under it.
struct PairScores {
    int n = 0;
    std::vector<std::optional<PairScore>> cells;

    const std::optional<PairScore>& at(int i, int j) const {
        return cells[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(j)];
    }
    std::optional<PairScore>& at(int i, int j) {
        return cells[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(j)];
    }
};

inline PairScores pairwise_scores(const CovTable& t, bool normalized = false) {
    PairScores ps;
    ps.n = t.layout.n();
    ps.cells.assign(static_cast<std::size_t>(ps.n) * static_cast<std::size_t>(ps.n), std::nullopt);
    for (int i = 0; i < ps.n; ++i) {
        for (int j = 0; j < ps.n; ++j) {
            if (i == j) continue;
            if (t.layout.count[static_cast<std::size_t>(i)] >
                t.layout.count[static_cast<std::size_t>(j)])
                continue;
            MatchResult m = best_phase_match(t, i, j, normalized);
            PairScore cell;
            cell.map = m.map;
            cell.c = m.score;
            cell.tie = m.tie;
            cell.d = diff_variance(t, i, j, m.map);
            if (t.layout.sets_known)
                cell.cross_set = !t.layout.sets[static_cast<std::size_t>(i)].subset_of(
                    t.layout.sets[static_cast<std::size_t>(j)]);
            ps.at(i, j) = cell;
        }
    }
    return ps;
}

// Scores with orderings fixed by known per-slot phase labels instead of
// covariance matching; admissible only when i's labels are contained in j's.
inline PairScores pairwise_scores_labeled(const CovTable& t,
                                          const std::vector<std::vector<Phase>>& labels) {
    if (static_cast<int>(labels.size()) != t.layout.n())
        throw Error("bad_argument", "label list size does not match table");
    std::vector<PhaseSet> sets(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (static_cast<int>(labels[i].size()) != t.layout.count[i])
            throw Error("bad_argument", "labels of node " + std::to_string(i) +
                                            " do not match its channel count");
        std::uint8_t m = 0;
        for (Phase p : labels[i]) m = static_cast<std::uint8_t>(m | (1u << static_cast<int>(p)));
        sets[i] = PhaseSet(m);
        if (sets[i].size() != static_cast<int>(labels[i].size()))
            throw Error("bad_argument", "duplicate phase label on node " + std::to_string(i));
    }

    PairScores ps;
    ps.n = t.layout.n();
    ps.cells.assign(static_cast<std::size_t>(ps.n) * static_cast<std::size_t>(ps.n), std::nullopt);
    for (int i = 0; i < ps.n; ++i) {
        for (int j = 0; j < ps.n; ++j) {
            if (i == j || !sets[static_cast<std::size_t>(i)].subset_of(sets[static_cast<std::size_t>(j)]))
                continue;
            SlotMap m;
            m.size = static_cast<std::uint8_t>(labels[static_cast<std::size_t>(i)].size());
            for (int s = 0; s < m.size; ++s) {
                Phase p = labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
                int tslot = -1;
                for (std::size_t u = 0; u < labels[static_cast<std::size_t>(j)].size(); ++u)
                    if (labels[static_cast<std::size_t>(j)][u] == p) tslot = static_cast<int>(u);
                m.to[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(tslot);
            }
            PairScore cell;
            cell.map = m;
            cell.c = phase_match_score(t, i, j, m);
            cell.d = diff_variance(t, i, j, m);
            ps.at(i, j) = cell;
        }
    }
    return ps;
}

} // namespace gridpt
