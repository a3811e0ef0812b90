#pragma once

#include <string>
#include <vector>

#include "gridpt/network.hpp"
#include "gridpt/phase.hpp"

namespace gridpt {

// One failing case of the line separation property: for rows M, comparing
// line `edge_a` against line `edge_b`, the non-identity `ordering` of M into
// edge_b's phases scored at least as well as the identity. gap = wrong score
// minus identity score (0 on an exact tie).
struct ConditionViolation {
    int edge_a = -1;
    int edge_b = -1;
    PhaseSet rows;
    SlotMap ordering;
    double gap = 0.0;
    bool tie = false;
};

struct ConditionReport {
    bool holds = true;
    std::vector<ConditionViolation> violations;
};

namespace detail {

// sum over rho in rows and shared columns psi of
// Re( conj(za[rho, psi]) * zb[ordering(rho), psi] )
inline double alignment_score(const LineModel& ea, const LineModel& eb, PhaseSet rows,
                              const SlotMap& ordering) {
    PhaseSet shared = ea.phases.intersect(eb.phases);
    double s = 0.0;
    for (int rs = 0; rs < rows.size(); ++rs) {
        int ra = ea.phases.slot_of(rows.phase_at(rs));
        int rb = ordering[rs];
        for (Phase psi : shared.phases()) {
            int ca = ea.phases.slot_of(psi);
            int cb = eb.phases.slot_of(psi);
            s += (std::conj(ea.z(static_cast<std::size_t>(ra), static_cast<std::size_t>(ca))) *
                  eb.z(static_cast<std::size_t>(rb), static_cast<std::size_t>(cb)))
                     .real();
        }
    }
    return s;
}

} // namespace detail

// Checks, exhaustively over ordered line pairs and every phase set M carried
// by some node with M contained in both lines, that the identity ordering of
// M strictly beats every other injective ordering of M into the second
// line's phases. Ties count as violations. This is the sufficient condition
// under which covariance-based matching provably picks the true ordering.
inline ConditionReport check_line_condition(const RadialNetwork& net) {
    for (const auto& e : net.edges) {
        std::size_t m = static_cast<std::size_t>(e.phases.size());
        if (e.z.rows() != m || e.z.cols() != m)
            throw Error("invalid_network",
                        "edge " + detail::edge_name(e) + " impedance has wrong shape");
    }

    std::vector<PhaseSet> sets;
    for (PhaseSet ps : net.node_phases) {
        bool seen = false;
        for (PhaseSet q : sets)
            if (q == ps) seen = true;
        if (!seen) sets.push_back(ps);
    }

    ConditionReport rep;
    const int m = static_cast<int>(net.edges.size());
    for (PhaseSet rows : sets) {
        for (int a = 0; a < m; ++a) {
            const auto& ea = net.edges[static_cast<std::size_t>(a)];
            if (!rows.subset_of(ea.phases)) continue;
            for (int b = 0; b < m; ++b) {
                const auto& eb = net.edges[static_cast<std::size_t>(b)];
                if (!rows.subset_of(eb.phases)) continue;
                SlotMap ident = phase_identity_map(rows, eb.phases);
                double sid = detail::alignment_score(ea, eb, rows, ident);
                for (const SlotMap& o : enumerate_slot_maps(rows.size(), eb.phases.size())) {
                    if (o == ident) continue;
                    double s = detail::alignment_score(ea, eb, rows, o);
                    if (s >= sid) {
                        ConditionViolation v;
                        v.edge_a = a;
                        v.edge_b = b;
                        v.rows = rows;
                        v.ordering = o;
                        v.gap = s - sid;
                        v.tie = (s == sid);
                        rep.violations.push_back(v);
                    }
                }
            }
        }
    }
    rep.holds = rep.violations.empty();
    return rep;
}

} // namespace gridpt
