#pragma once

#include <string>
#include <vector>

#include "gridpt/network.hpp"
#include "gridpt/rng.hpp"

namespace gridpt {

// Bands for random line impedances. Diagonal real/imaginary parts are drawn
// uniformly from their bands; off-diagonal parts from the same bands divided
// by `dominance`. The defaults keep bands narrow enough that a dominance of 4
// satisfies the pairwise matching separation with worst-case draws, not just
// on average. dominance == 1 is a degenerate mode that fills every entry of a
// coupling block with one shared value (useful for forcing score ties); those
// blocks are singular for two or more phases.
struct ImpedanceParams {
    double diag_real_lo = 0.04;
    double diag_real_hi = 0.05;
    double diag_imag_lo = 0.08;
    double diag_imag_hi = 0.10;
    double dominance = 4.0;
};

namespace detail {

inline CMat random_line_z(PhaseSet ps, const ImpedanceParams& p, Rng& rng) {
    std::size_t m = static_cast<std::size_t>(ps.size());
    CMat z(m, m);
    if (p.dominance == 1.0) {
        cplx v(rng.uniform(p.diag_real_lo, p.diag_real_hi),
               rng.uniform(p.diag_imag_lo, p.diag_imag_hi));
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) z(r, c) = v;
        return z;
    }
    for (std::size_t r = 0; r < m; ++r)
        z(r, r) = cplx(rng.uniform(p.diag_real_lo, p.diag_real_hi),
                       rng.uniform(p.diag_imag_lo, p.diag_imag_hi));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = r + 1; c < m; ++c) {
            cplx v(rng.uniform(p.diag_real_lo, p.diag_real_hi) / p.dominance,
                   rng.uniform(p.diag_imag_lo, p.diag_imag_hi) / p.dominance);
            z(r, c) = v;
            z(c, r) = v;
        }
    return z;
}

} // namespace detail

// Random radial feeder with the requested number of three-, two- and
// single-phase nodes. Node 0 is the three-phase reference. Construction is
// monotone by design: each node attaches to an earlier node whose phase set
// contains its own, so the result always validates. Draw order is fixed
// (phase sets first, then per node parent choice followed by impedance
// entries), so a seed fully determines the network.
inline RadialNetwork random_radial(int n3, int n2, int n1, const ImpedanceParams& params,
                                   std::uint64_t seed) {
    if (n3 < 1) throw Error("bad_argument", "need at least one three-phase node for the reference");
    if (n2 < 0 || n1 < 0) throw Error("bad_argument", "node counts must be non-negative");
    const int n = n3 + n2 + n1;
    Rng rng(seed);

    RadialNetwork net;
    net.name = "random";
    net.reference = 0;
    net.node_phases.assign(static_cast<std::size_t>(n), PhaseSet::all());

    // ids: three-phase nodes first, then two-, then single-phase. Keeping the
    // counts in id order (rather than shuffling labels) costs no generality
    // because recovery never looks at ids beyond tie-breaking.
    const PhaseSet two_sets[3] = {PhaseSet::from_string("ab"), PhaseSet::from_string("ac"),
                                  PhaseSet::from_string("bc")};
    for (int i = n3; i < n3 + n2; ++i)
        net.node_phases[static_cast<std::size_t>(i)] = two_sets[rng.uniform_index(3)];
    for (int i = n3 + n2; i < n; ++i)
        net.node_phases[static_cast<std::size_t>(i)] =
            PhaseSet::single(static_cast<Phase>(rng.uniform_index(3)));

    for (int i = 1; i < n; ++i) {
        PhaseSet mi = net.node_phases[static_cast<std::size_t>(i)];
        std::vector<int> eligible;
        for (int j = 0; j < i; ++j)
            if (mi.subset_of(net.node_phases[static_cast<std::size_t>(j)])) eligible.push_back(j);
        // a three-phase prefix always exists, and every node's set is
        // contained in the reference's, so this cannot be empty
        int parent = eligible[rng.uniform_index(eligible.size())];
        LineModel e;
        e.from = parent;
        e.to = i;
        e.phases = mi;
        e.z = detail::random_line_z(mi, params, rng);
        net.edges.push_back(e);
    }
    return net;
}

} // namespace gridpt
