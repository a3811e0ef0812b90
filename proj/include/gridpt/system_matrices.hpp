#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "gridpt/linalg.hpp"
#include "gridpt/network.hpp"

namespace gridpt {

// Maps (node, phase) pairs to flat channel indices. Channels run over nodes
// in ascending id order, phases in canonical order within a node. The reduced
// layout drops the reference node's channels.
struct BlockIndex {
    std::vector<int> offset; // per node id, -1 when excluded
    std::vector<int> length;
    std::vector<std::pair<int, Phase>> channels; // flat index -> (node, phase)
    int total = 0;

    int channel_of(int node, Phase p) const {
        int off = offset[static_cast<std::size_t>(node)];
        if (off < 0) return -1;
        int slot = 0;
        bool found = false;
        // recover the slot from the stored channel list to stay layout-agnostic
        for (int k = 0; k < length[static_cast<std::size_t>(node)]; ++k) {
            if (channels[static_cast<std::size_t>(off + k)].second == p) {
                slot = k;
                found = true;
                break;
            }
        }
        return found ? off + slot : -1;
    }

    static BlockIndex full(const RadialNetwork& net) { return make(net, -1); }
    static BlockIndex reduced(const RadialNetwork& net) { return make(net, net.reference); }

private:
    static BlockIndex make(const RadialNetwork& net, int excluded) {
        BlockIndex idx;
        idx.offset.assign(static_cast<std::size_t>(net.n()), -1);
        idx.length.assign(static_cast<std::size_t>(net.n()), 0);
        for (int i = 0; i < net.n(); ++i) {
            if (i == excluded) continue;
            PhaseSet ps = net.node_phases[static_cast<std::size_t>(i)];
            idx.offset[static_cast<std::size_t>(i)] = idx.total;
            idx.length[static_cast<std::size_t>(i)] = ps.size();
            for (Phase p : ps.phases()) idx.channels.push_back({i, p});
            idx.total += ps.size();
        }
        return idx;
    }
};

// Column layout over edge-phase pairs. Edges are ordered by child id; an
// edge's phases are the child's, so for a valid network this index is in
// bijection with the reduced node-phase index.
struct EdgeIndex {
    std::vector<int> edge_ids; // position -> index into net.edges
    std::vector<int> offset;   // per position
    std::vector<int> pos_of;   // per index into net.edges
    int total = 0;

    static EdgeIndex make(const RadialNetwork& net, const Rooted& tree) {
        EdgeIndex idx;
        const int m = static_cast<int>(net.edges.size());
        idx.edge_ids.resize(static_cast<std::size_t>(m));
        std::vector<std::pair<int, int>> by_child; // (child id, edge id)
        for (int ei = 0; ei < m; ++ei) {
            const auto& e = net.edges[static_cast<std::size_t>(ei)];
            int child = (tree.parent[static_cast<std::size_t>(e.to)] == e.from) ? e.to : e.from;
            by_child.push_back({child, ei});
        }
        std::sort(by_child.begin(), by_child.end());
        idx.pos_of.assign(static_cast<std::size_t>(m), -1);
        idx.offset.resize(static_cast<std::size_t>(m));
        for (int pos = 0; pos < m; ++pos) {
            int ei = by_child[static_cast<std::size_t>(pos)].second;
            idx.edge_ids[static_cast<std::size_t>(pos)] = ei;
            idx.pos_of[static_cast<std::size_t>(ei)] = pos;
            idx.offset[static_cast<std::size_t>(pos)] = idx.total;
            idx.total += net.edges[static_cast<std::size_t>(ei)].phases.size();
        }
        return idx;
    }
};

// Signed incidence over channels: column (edge, phi) has +1 at the parent
// endpoint's phi channel and -1 at the child's. Edges are oriented away from
// the reference regardless of how they were entered.
inline CMat build_incidence(const RadialNetwork& net, const Rooted& tree, const BlockIndex& rows,
                            const EdgeIndex& cols) {
    CMat a(static_cast<std::size_t>(rows.total), static_cast<std::size_t>(cols.total));
    for (std::size_t pos = 0; pos < cols.edge_ids.size(); ++pos) {
        int ei = cols.edge_ids[pos];
        const auto& e = net.edges[static_cast<std::size_t>(ei)];
        int child = (tree.parent[static_cast<std::size_t>(e.to)] == e.from) ? e.to : e.from;
        int par = (child == e.to) ? e.from : e.to;
        int col = cols.offset[pos];
        for (Phase p : e.phases.phases()) {
            int rp = rows.channel_of(par, p);
            int rc = rows.channel_of(child, p);
            if (rp >= 0) a(static_cast<std::size_t>(rp), static_cast<std::size_t>(col)) = 1.0;
            if (rc >= 0) a(static_cast<std::size_t>(rc), static_cast<std::size_t>(col)) = -1.0;
            ++col;
        }
    }
    return a;
}

// Block-diagonal edge admittances: per edge the inverse of its impedance.
inline CMat build_edge_admittance(const RadialNetwork& net, const EdgeIndex& cols) {
    CMat d(static_cast<std::size_t>(cols.total), static_cast<std::size_t>(cols.total));
    for (std::size_t pos = 0; pos < cols.edge_ids.size(); ++pos) {
        const auto& e = net.edges[static_cast<std::size_t>(cols.edge_ids[pos])];
        CMat y = invert(e.z, 1e-12, ("impedance of edge " + detail::edge_name(e)).c_str());
        int off = cols.offset[pos];
        for (std::size_t r = 0; r < y.rows(); ++r)
            for (std::size_t c = 0; c < y.cols(); ++c)
                d(static_cast<std::size_t>(off) + r, static_cast<std::size_t>(off) + c) = y(r, c);
    }
    return d;
}

namespace detail {

// adds s * y (defined on edge phases) into the (ni, nj) block of yhat,
// padding with zeros where a node phase is not carried by the edge
inline void accumulate_block(CMat& yhat, const BlockIndex& idx, int ni, int nj, PhaseSet edge_ps,
                             const CMat& y, double s) {
    for (Phase p : edge_ps.phases()) {
        int rp = idx.channel_of(ni, p);
        if (rp < 0) continue;
        for (Phase q : edge_ps.phases()) {
            int cq = idx.channel_of(nj, q);
            if (cq < 0) continue;
            yhat(static_cast<std::size_t>(rp), static_cast<std::size_t>(cq)) +=
                s * y(static_cast<std::size_t>(edge_ps.slot_of(p)),
                      static_cast<std::size_t>(edge_ps.slot_of(q)));
        }
    }
}

} // namespace detail

// Full nodal admittance assembled block-wise: each edge adds its admittance
// to both endpoint diagonal blocks and subtracts it from the two off-diagonal
// blocks, zero-padded onto the node phase sets.
inline CMat build_admittance(const RadialNetwork& net, const BlockIndex& idx) {
    CMat yhat(static_cast<std::size_t>(idx.total), static_cast<std::size_t>(idx.total));
    for (const auto& e : net.edges) {
        CMat y = invert(e.z, 1e-12, ("impedance of edge " + detail::edge_name(e)).c_str());
        detail::accumulate_block(yhat, idx, e.from, e.from, e.phases, y, 1.0);
        detail::accumulate_block(yhat, idx, e.to, e.to, e.phases, y, 1.0);
        detail::accumulate_block(yhat, idx, e.from, e.to, e.phases, y, -1.0);
        detail::accumulate_block(yhat, idx, e.to, e.from, e.phases, y, -1.0);
    }
    return yhat;
}

// Drops the reference node's rows and columns from a full channel matrix.
inline CMat reduce_channels(const CMat& full, const BlockIndex& full_idx,
                            const BlockIndex& red_idx, const RadialNetwork& net) {
    CMat out(static_cast<std::size_t>(red_idx.total), static_cast<std::size_t>(red_idx.total));
    std::vector<int> keep;
    for (int ch = 0; ch < full_idx.total; ++ch)
        if (full_idx.channels[static_cast<std::size_t>(ch)].first != net.reference)
            keep.push_back(ch);
    for (std::size_t r = 0; r < keep.size(); ++r)
        for (std::size_t c = 0; c < keep.size(); ++c)
            out(r, c) = full(static_cast<std::size_t>(keep[r]), static_cast<std::size_t>(keep[c]));
    return out;
}

// Path matrix: entry ((i, phi), (edge, phi)) is -1 exactly when the edge lies
// on the path from node i to the reference; all other entries are zero. Its
// transpose is a left inverse of the reduced incidence.
inline CMat build_path_matrix(const RadialNetwork& net, const Rooted& tree, const BlockIndex& red,
                              const EdgeIndex& cols) {
    CMat b(static_cast<std::size_t>(red.total), static_cast<std::size_t>(cols.total));
    for (int i = 0; i < net.n(); ++i) {
        if (i == net.reference) continue;
        for (int ei : tree.path_edges(i)) {
            int pos = cols.pos_of[static_cast<std::size_t>(ei)];
            const auto& e = net.edges[static_cast<std::size_t>(ei)];
            int off = cols.offset[static_cast<std::size_t>(pos)];
            for (Phase p : net.node_phases[static_cast<std::size_t>(i)].phases()) {
                int row = red.channel_of(i, p);
                int slot = e.phases.slot_of(p);
                // phase sets grow toward the root, so slot >= 0 holds on valid input
                if (row < 0 || slot < 0) continue;
                b(static_cast<std::size_t>(row), static_cast<std::size_t>(off + slot)) = -1.0;
            }
        }
    }
    return b;
}

// Cumulative impedance from the reference to each node, as a 3x3 block over
// global phases (couplings absent from the path are zero). The reference's
// block is zero and a child's block is its parent's plus its line impedance.
struct PathImpedance {
    std::vector<CMat> at_node; // per node id, 3x3 over global phases
};

inline PathImpedance path_impedances(const RadialNetwork& net, const Rooted& tree) {
    PathImpedance pe;
    pe.at_node.assign(static_cast<std::size_t>(net.n()), CMat(3, 3));
    for (int u : tree.order) {
        int par = tree.parent[static_cast<std::size_t>(u)];
        if (par < 0) continue;
        const auto& e = net.edges[static_cast<std::size_t>(tree.parent_edge[static_cast<std::size_t>(u)])];
        CMat acc = pe.at_node[static_cast<std::size_t>(par)];
        auto ph = e.phases.phases();
        for (std::size_t r = 0; r < ph.size(); ++r)
            for (std::size_t c = 0; c < ph.size(); ++c)
                acc(static_cast<std::size_t>(static_cast<int>(ph[r])),
                    static_cast<std::size_t>(static_cast<int>(ph[c]))) += e.z(r, c);
        pe.at_node[static_cast<std::size_t>(u)] = acc;
    }
    return pe;
}

// Reduced impedance by path sums: block (i, j) is the cumulative impedance at
// the lowest common ancestor of i and j, restricted to their phase rows and
// columns. Never forms or inverts the admittance.
inline CMat impedance_by_paths(const RadialNetwork& net, const Rooted& tree,
                               const BlockIndex& red) {
    PathImpedance pe = path_impedances(net, tree);
    CMat z(static_cast<std::size_t>(red.total), static_cast<std::size_t>(red.total));
    for (int r = 0; r < red.total; ++r) {
        auto [i, p] = red.channels[static_cast<std::size_t>(r)];
        for (int c = 0; c < red.total; ++c) {
            auto [j, q] = red.channels[static_cast<std::size_t>(c)];
            int a = tree.lca(i, j);
            z(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                pe.at_node[static_cast<std::size_t>(a)](
                    static_cast<std::size_t>(static_cast<int>(p)),
                    static_cast<std::size_t>(static_cast<int>(q)));
        }
    }
    return z;
}

// Everything derived from one network, with consistent layouts.
struct SystemMatrices {
    BlockIndex full_index;
    BlockIndex reduced_index;
    EdgeIndex edge_index;
    CMat a_hat;   // full incidence
    CMat d_hat;   // edge admittance blocks
    CMat y_hat;   // full admittance
    CMat a_red;   // incidence without reference rows
    CMat y_red;   // admittance without reference rows/cols
    CMat b;       // path matrix
    CMat z_red;   // reduced impedance (by path sums)
};

inline CMat drop_reference_rows(const CMat& full, const BlockIndex& full_idx,
                                const BlockIndex& red_idx, const RadialNetwork& net) {
    CMat out(static_cast<std::size_t>(red_idx.total), full.cols());
    int r = 0;
    for (int ch = 0; ch < full_idx.total; ++ch) {
        if (full_idx.channels[static_cast<std::size_t>(ch)].first == net.reference) continue;
        for (std::size_t c = 0; c < full.cols(); ++c)
            out(static_cast<std::size_t>(r), c) = full(static_cast<std::size_t>(ch), c);
        ++r;
    }
    return out;
}

inline SystemMatrices build_system(const RadialNetwork& net) {
    require_valid(net);
    Rooted tree = Rooted::build(net);
    SystemMatrices s;
    s.full_index = BlockIndex::full(net);
    s.reduced_index = BlockIndex::reduced(net);
    s.edge_index = EdgeIndex::make(net, tree);
    s.a_hat = build_incidence(net, tree, s.full_index, s.edge_index);
    s.d_hat = build_edge_admittance(net, s.edge_index);
    s.y_hat = build_admittance(net, s.full_index);
    s.a_red = drop_reference_rows(s.a_hat, s.full_index, s.reduced_index, net);
    s.y_red = reduce_channels(s.y_hat, s.full_index, s.reduced_index, net);
    s.b = build_path_matrix(net, tree, s.reduced_index, s.edge_index);
    s.z_red = impedance_by_paths(net, tree, s.reduced_index);
    return s;
}

// Reduced impedance via direct inversion of the reduced admittance. Costs a
// dense inverse; use impedance_by_paths for anything large. Kept as the
// independent cross-check of the path construction.
inline CMat impedance_by_inverse(const RadialNetwork& net) {
    require_valid(net);
    BlockIndex full = BlockIndex::full(net);
    BlockIndex red = BlockIndex::reduced(net);
    CMat yhat = build_admittance(net, full);
    CMat yred = reduce_channels(yhat, full, red, net);
    return invert(yred, 1e-12, "reduced admittance");
}

} // namespace gridpt
