#pragma once

#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "gridpt/error.hpp"
#include "gridpt/linalg.hpp"
#include "gridpt/phase.hpp"

namespace gridpt {

// One line segment. `from` is the parent endpoint (nearer the reference),
// `to` the child; the phase set and the |phases| x |phases| impedance matrix
// z belong to the child's phases in canonical order. z is symmetric with
// positive-real diagonal.
struct LineModel {
    int from = -1;
    int to = -1;
    PhaseSet phases;
    CMat z;
};

struct RadialNetwork {
    std::string name;
    int reference = 0;
    std::vector<PhaseSet> node_phases; // index = node id, ids dense 0..n-1
    std::vector<LineModel> edges;

    int n() const { return static_cast<int>(node_phases.size()); }
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }

    std::string joined() const {
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v;
        }
        return s;
    }
};

namespace detail {

inline std::string edge_name(const LineModel& e) {
    return std::to_string(e.from) + "-" + std::to_string(e.to);
}

} // namespace detail

// Checks every structural invariant and reports all violations instead of
// stopping at the first: dense ids, three-phase reference, tree shape
// (connected, n-1 edges), edge phase set equal to the child set and contained
// in the parent set, and well-formed impedances (square, symmetric,
// positive-real diagonal, invertible).
inline ValidationReport validate_network(const RadialNetwork& net) {
    ValidationReport rep;
    const int n = net.n();
    if (n < 1) {
        rep.violations.push_back("network has no nodes");
        return rep;
    }
    if (net.reference < 0 || net.reference >= n)
        rep.violations.push_back("reference id " + std::to_string(net.reference) + " out of range");
    else if (net.node_phases[static_cast<std::size_t>(net.reference)] != PhaseSet::all())
        rep.violations.push_back("reference node must carry all three phases");

    for (int i = 0; i < n; ++i)
        if (net.node_phases[static_cast<std::size_t>(i)].empty())
            rep.violations.push_back("node " + std::to_string(i) + " has an empty phase set");

    if (static_cast<int>(net.edges.size()) != n - 1)
        rep.violations.push_back("expected " + std::to_string(n - 1) + " edges, found " +
                                 std::to_string(net.edges.size()));

    bool endpoints_ok = true;
    for (const auto& e : net.edges) {
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n || e.from == e.to) {
            rep.violations.push_back("edge " + detail::edge_name(e) + " has invalid endpoints");
            endpoints_ok = false;
        }
    }

    // connectivity via union-find (orientation-agnostic)
    if (endpoints_ok && n >= 1) {
        std::vector<int> parent(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) {
                parent[static_cast<std::size_t>(x)] =
                    parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                x = parent[static_cast<std::size_t>(x)];
            }
            return x;
        };
        for (const auto& e : net.edges) {
            int a = find(e.from), b = find(e.to);
            if (a == b)
                rep.violations.push_back("edge " + detail::edge_name(e) + " closes a cycle");
            else
                parent[static_cast<std::size_t>(a)] = b;
        }
        int roots = 0;
        for (int i = 0; i < n; ++i)
            if (find(i) == i) ++roots;
        if (roots != 1) rep.violations.push_back("network is not connected");
    }

    // orientation-dependent checks only make sense on a tree
    bool is_tree = rep.ok() && endpoints_ok;
    if (is_tree && net.reference >= 0 && net.reference < n) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
        for (int ei = 0; ei < static_cast<int>(net.edges.size()); ++ei) {
            adj[static_cast<std::size_t>(net.edges[static_cast<std::size_t>(ei)].from)].push_back(ei);
            adj[static_cast<std::size_t>(net.edges[static_cast<std::size_t>(ei)].to)].push_back(ei);
        }
        std::vector<int> depth(static_cast<std::size_t>(n), -1);
        std::queue<int> q;
        depth[static_cast<std::size_t>(net.reference)] = 0;
        q.push(net.reference);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int ei : adj[static_cast<std::size_t>(u)]) {
                const auto& e = net.edges[static_cast<std::size_t>(ei)];
                int v = (e.from == u) ? e.to : e.from;
                if (depth[static_cast<std::size_t>(v)] < 0) {
                    depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
                    q.push(v);
                }
            }
        }
        for (const auto& e : net.edges) {
            int child = depth[static_cast<std::size_t>(e.from)] > depth[static_cast<std::size_t>(e.to)]
                            ? e.from
                            : e.to;
            int par = (child == e.from) ? e.to : e.from;
            PhaseSet mc = net.node_phases[static_cast<std::size_t>(child)];
            PhaseSet mp = net.node_phases[static_cast<std::size_t>(par)];
            if (e.phases != mc)
                rep.violations.push_back("edge " + detail::edge_name(e) + " phase set {" +
                                         e.phases.to_string() + "} differs from child node " +
                                         std::to_string(child) + " {" + mc.to_string() + "}");
            if (!mc.subset_of(mp))
                rep.violations.push_back("child node " + std::to_string(child) + " phases {" +
                                         mc.to_string() + "} not contained in parent " +
                                         std::to_string(par) + " {" + mp.to_string() + "}");
        }
    }

    for (const auto& e : net.edges) {
        std::size_t m = static_cast<std::size_t>(e.phases.size());
        if (e.z.rows() != m || e.z.cols() != m) {
            rep.violations.push_back("edge " + detail::edge_name(e) + " impedance is " +
                                     std::to_string(e.z.rows()) + "x" + std::to_string(e.z.cols()) +
                                     ", expected " + std::to_string(m) + "x" + std::to_string(m));
            continue;
        }
        double scale = std::max(max_abs(e.z), 1e-300);
        double asym = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = r + 1; c < m; ++c)
                asym = std::max(asym, std::abs(e.z(r, c) - e.z(c, r)));
        if (asym > 1e-12 * scale)
            rep.violations.push_back("edge " + detail::edge_name(e) + " impedance is not symmetric");
        for (std::size_t r = 0; r < m; ++r)
            if (!(e.z(r, r).real() > 0.0))
                rep.violations.push_back("edge " + detail::edge_name(e) +
                                         " impedance diagonal entry " + std::to_string(r) +
                                         " has non-positive real part");
        try {
            invert(e.z, 1e-12, "impedance");
        } catch (const Error&) {
            rep.violations.push_back("edge " + detail::edge_name(e) + " impedance is singular");
        }
    }

    return rep;
}

inline void require_valid(const RadialNetwork& net) {
    auto rep = validate_network(net);
    if (!rep.ok()) throw Error("invalid_network", rep.joined());
}

// Tree rooted at the reference. Edges are re-indexed by child id, which makes
// the edge-phase column space line up with the reduced node-phase index.
struct Rooted {
    const RadialNetwork* net = nullptr;
    std::vector<int> parent;      // -1 at the root
    std::vector<int> parent_edge; // index into net->edges, -1 at the root
    std::vector<int> depth;
    std::vector<int> order; // breadth-first from the root

    static Rooted build(const RadialNetwork& net) {
        const int n = net.n();
        Rooted r;
        r.net = &net;
        r.parent.assign(static_cast<std::size_t>(n), -2);
        r.parent_edge.assign(static_cast<std::size_t>(n), -1);
        r.depth.assign(static_cast<std::size_t>(n), -1);
        std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
        for (int ei = 0; ei < static_cast<int>(net.edges.size()); ++ei) {
            const auto& e = net.edges[static_cast<std::size_t>(ei)];
            if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
                throw Error("invalid_network", "edge endpoint out of range");
            adj[static_cast<std::size_t>(e.from)].push_back({e.to, ei});
            adj[static_cast<std::size_t>(e.to)].push_back({e.from, ei});
        }
        std::queue<int> q;
        r.parent[static_cast<std::size_t>(net.reference)] = -1;
        r.depth[static_cast<std::size_t>(net.reference)] = 0;
        q.push(net.reference);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            r.order.push_back(u);
            for (auto [v, ei] : adj[static_cast<std::size_t>(u)]) {
                if (r.parent[static_cast<std::size_t>(v)] != -2) continue;
                r.parent[static_cast<std::size_t>(v)] = u;
                r.parent_edge[static_cast<std::size_t>(v)] = ei;
                r.depth[static_cast<std::size_t>(v)] = r.depth[static_cast<std::size_t>(u)] + 1;
                q.push(v);
            }
        }
        if (static_cast<int>(r.order.size()) != n)
            throw Error("invalid_network", "network is not connected");
        return r;
    }

    // edge indices on the path node -> root, nearest edge first
    std::vector<int> path_edges(int node) const {
        std::vector<int> out;
        while (parent[static_cast<std::size_t>(node)] >= 0) {
            out.push_back(parent_edge[static_cast<std::size_t>(node)]);
            node = parent[static_cast<std::size_t>(node)];
        }
        return out;
    }

    int lca(int i, int j) const {
        while (depth[static_cast<std::size_t>(i)] > depth[static_cast<std::size_t>(j)])
            i = parent[static_cast<std::size_t>(i)];
        while (depth[static_cast<std::size_t>(j)] > depth[static_cast<std::size_t>(i)])
            j = parent[static_cast<std::size_t>(j)];
        while (i != j) {
            i = parent[static_cast<std::size_t>(i)];
            j = parent[static_cast<std::size_t>(j)];
        }
        return i;
    }
};

namespace detail {

// Deterministic diagonally dominant impedance for fixture networks. Entries
// vary with the global phase indices so no two couplings coincide.
inline CMat fixture_line_z(PhaseSet ps, double scale) {
    auto ph = ps.phases();
    std::size_t m = ph.size();
    CMat z(m, m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            int gp = static_cast<int>(ph[r]);
            int gq = static_cast<int>(ph[c]);
            if (r == c)
                z(r, c) = cplx(0.044 + 0.002 * gp, 0.088 + 0.004 * gp) * scale;
            else
                z(r, c) = cplx(0.010 + 0.001 * (gp + gq), 0.020 + 0.002 * (gp + gq)) * scale;
        }
    }
    return z;
}

} // namespace detail

// Nine-node fixture used across the tests: a mix of three-, two- and
// single-phase laterals deep enough to exercise every recovery branch.
//
//   0(abc) - 1(abc) - 2(abc) - 5(abc) - 6(ac) - 7(c)
//                |        |                 |
//                3(ab)    4(b)              8(a)
inline RadialNetwork toynet() {
    RadialNetwork net;
    net.name = "toynet";
    net.reference = 0;
    auto S = [](const char* s) { return PhaseSet::from_string(s); };
    net.node_phases = {S("abc"), S("abc"), S("abc"), S("ab"), S("b"),
                       S("abc"), S("ac"),  S("c"),   S("a")};
    struct Row {
        int from, to;
    };
    const Row rows[] = {{0, 1}, {1, 2}, {1, 3}, {2, 4}, {2, 5}, {5, 6}, {6, 7}, {6, 8}};
    int k = 0;
    for (const auto& r : rows) {
        LineModel e;
        e.from = r.from;
        e.to = r.to;
        e.phases = net.node_phases[static_cast<std::size_t>(r.to)];
        e.z = detail::fixture_line_z(e.phases, 1.0 + 0.07 * k);
        net.edges.push_back(e);
        ++k;
    }
    return net;
}

} // namespace gridpt
