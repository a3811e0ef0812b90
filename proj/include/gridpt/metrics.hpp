#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "gridpt/network.hpp"
#include "gridpt/recover.hpp"

namespace gridpt {

struct TopologyErrorReport {
    int wrong = 0;   // estimated edges absent from the truth
    int missing = 0; // true edges absent from the estimate
    int total = 0;   // true edge count
    double error = 0.0;
};

// Fraction (wrong + missing) / total over unordered edges.
inline TopologyErrorReport topology_error(const std::vector<std::pair<int, int>>& estimated,
                                          const RadialNetwork& truth) {
    std::set<std::pair<int, int>> t, e;
    for (const auto& ed : truth.edges)
        t.insert({std::min(ed.from, ed.to), std::max(ed.from, ed.to)});
    for (const auto& ed : estimated) {
        if (ed.first < 0 || ed.first >= truth.n() || ed.second < 0 || ed.second >= truth.n())
            throw Error("bad_argument", "estimated edge endpoint out of range");
        e.insert({std::min(ed.first, ed.second), std::max(ed.first, ed.second)});
    }
    TopologyErrorReport rep;
    rep.total = static_cast<int>(t.size());
    for (const auto& ed : e)
        if (!t.count(ed)) ++rep.wrong;
    for (const auto& ed : t)
        if (!e.count(ed)) ++rep.missing;
    rep.error = rep.total > 0 ? static_cast<double>(rep.wrong + rep.missing) / rep.total : 0.0;
    return rep;
}

struct PhaseErrorReport {
    int wrong = 0;
    int total = 0; // labeled slots outside the reference
    double error = 0.0;
};

// True per-slot labels of a network's channels: canonical order of each
// node's phase set.
inline std::vector<std::vector<Phase>> canonical_slot_phases(const RadialNetwork& net) {
    std::vector<std::vector<Phase>> out(static_cast<std::size_t>(net.n()));
    for (int i = 0; i < net.n(); ++i)
        out[static_cast<std::size_t>(i)] = net.node_phases[static_cast<std::size_t>(i)].phases();
    return out;
}

// Fraction of wrongly labeled slots over all nodes except the reference.
inline PhaseErrorReport phase_error(const std::vector<std::vector<Phase>>& estimated,
                                    const std::vector<std::vector<Phase>>& truth, int reference) {
    if (estimated.size() != truth.size())
        throw Error("bad_argument", "estimate and truth cover different node sets");
    PhaseErrorReport rep;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (static_cast<int>(i) == reference) continue;
        if (estimated[i].size() != truth[i].size())
            throw Error("bad_argument",
                        "node " + std::to_string(i) + " has mismatched slot counts");
        for (std::size_t s = 0; s < truth[i].size(); ++s) {
            ++rep.total;
            if (estimated[i][s] != truth[i][s]) ++rep.wrong;
        }
    }
    rep.error = rep.total > 0 ? static_cast<double>(rep.wrong) / rep.total : 0.0;
    return rep;
}

} // namespace gridpt
