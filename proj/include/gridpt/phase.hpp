#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridpt/error.hpp"

namespace gridpt {

enum class Phase : std::uint8_t { a = 0, b = 1, c = 2 };

inline char phase_char(Phase p) { return static_cast<char>('a' + static_cast<int>(p)); }

inline Phase phase_from_char(char c) {
    if (c < 'a' || c > 'c') throw Error("bad_phase", std::string("unknown phase '") + c + "'");
    return static_cast<Phase>(c - 'a');
}

// Subset of {a, b, c} as a 3-bit mask. Slots are positions in the canonical
// a < b < c order; all channel and matrix block layouts use that order.
class PhaseSet {
public:
    PhaseSet() = default;
    explicit PhaseSet(std::uint8_t mask) : mask_(static_cast<std::uint8_t>(mask & 7u)) {}

    static PhaseSet all() { return PhaseSet(7u); }
    static PhaseSet single(Phase p) { return PhaseSet(static_cast<std::uint8_t>(1u << static_cast<int>(p))); }

    static PhaseSet from_string(const std::string& s) {
        std::uint8_t m = 0;
        for (char c : s) {
            std::uint8_t bit = static_cast<std::uint8_t>(1u << static_cast<int>(phase_from_char(c)));
            if (m & bit) throw Error("bad_phase", "duplicate phase in \"" + s + "\"");
            m |= bit;
        }
        return PhaseSet(m);
    }

    std::uint8_t mask() const { return mask_; }
    bool empty() const { return mask_ == 0; }
    int size() const { return (mask_ & 1) + ((mask_ >> 1) & 1) + ((mask_ >> 2) & 1); }

    bool contains(Phase p) const { return (mask_ >> static_cast<int>(p)) & 1; }
    bool subset_of(PhaseSet o) const { return (mask_ & ~o.mask_) == 0; }

    PhaseSet intersect(PhaseSet o) const { return PhaseSet(mask_ & o.mask_); }

    // phase occupying canonical slot s
    Phase phase_at(int s) const {
        for (int p = 0; p < 3; ++p)
            if ((mask_ >> p) & 1) {
                if (s == 0) return static_cast<Phase>(p);
                --s;
            }
        throw Error("bad_phase", "slot out of range");
    }

    // canonical slot of phase p, or -1 when absent
    int slot_of(Phase p) const {
        if (!contains(p)) return -1;
        int s = 0;
        for (int q = 0; q < static_cast<int>(p); ++q)
            if ((mask_ >> q) & 1) ++s;
        return s;
    }

    std::vector<Phase> phases() const {
        std::vector<Phase> out;
        for (int p = 0; p < 3; ++p)
            if ((mask_ >> p) & 1) out.push_back(static_cast<Phase>(p));
        return out;
    }

    std::string to_string() const {
        std::string s;
        for (int p = 0; p < 3; ++p)
            if ((mask_ >> p) & 1) s += static_cast<char>('a' + p);
        return s;
    }

    bool operator==(const PhaseSet& o) const { return mask_ == o.mask_; }
    bool operator!=(const PhaseSet& o) const { return mask_ != o.mask_; }

private:
    std::uint8_t mask_ = 0;
};

// Injective map from k source slots to target slots, the "ordering" objects
// the matching step searches over. to[s] is the target slot of source slot s.
struct SlotMap {
    std::uint8_t size = 0;
    std::array<std::uint8_t, 3> to{{0, 0, 0}};

    int operator[](int s) const { return to[static_cast<std::size_t>(s)]; }

    bool is_identity() const {
        for (int s = 0; s < size; ++s)
            if (to[static_cast<std::size_t>(s)] != s) return false;
        return true;
    }

    bool operator==(const SlotMap& o) const {
        if (size != o.size) return false;
        for (int s = 0; s < size; ++s)
            if (to[static_cast<std::size_t>(s)] != o.to[static_cast<std::size_t>(s)]) return false;
        return true;
    }

    std::string to_string() const {
        std::string s = "(";
        for (int i = 0; i < size; ++i) {
            if (i) s += ',';
            s += std::to_string(to[static_cast<std::size_t>(i)]);
        }
        return s + ")";
    }
};

inline SlotMap identity_map(int k) {
    SlotMap m;
    m.size = static_cast<std::uint8_t>(k);
    for (int s = 0; s < k; ++s) m.to[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(s);
    return m;
}

// All injective maps from k slots into m slots, lexicographic by
// (to[0], to[1], ...). Scanning in this order with a strict ">" keeps the
// lexicographically smallest map on ties.
inline std::vector<SlotMap> enumerate_slot_maps(int k, int m) {
    if (k < 0 || m < 0 || k > 3 || m > 3) throw Error("bad_argument", "slot map sizes must be 0..3");
    if (k > m) return {};
    std::vector<SlotMap> out;
    SlotMap cur;
    cur.size = static_cast<std::uint8_t>(k);
    std::array<bool, 3> used{{false, false, false}};
    auto rec = [&](auto&& self, int s) -> void {
        if (s == k) {
            out.push_back(cur);
            return;
        }
        for (int t = 0; t < m; ++t) {
            if (used[static_cast<std::size_t>(t)]) continue;
            used[static_cast<std::size_t>(t)] = true;
            cur.to[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(t);
            self(self, s + 1);
            used[static_cast<std::size_t>(t)] = false;
        }
    };
    rec(rec, 0);
    return out;
}

// Slot map realizing the identity on phase labels: slot s of `from` goes to
// the slot of the same phase in `to`. Requires from to be contained in to.
inline SlotMap phase_identity_map(PhaseSet from, PhaseSet to) {
    if (!from.subset_of(to))
        throw Error("bad_argument",
                    "phase set {" + from.to_string() + "} not contained in {" + to.to_string() + "}");
    SlotMap m;
    m.size = static_cast<std::uint8_t>(from.size());
    for (int s = 0; s < m.size; ++s)
        m.to[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(to.slot_of(from.phase_at(s)));
    return m;
}

} // namespace gridpt
