#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "gridpt/gridpt.hpp"

using namespace gridpt;

TEST_CASE("splitmix stream is reproducible and seed-sensitive", "[rng]") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 100; ++i) {
        auto va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
        all_equal = all_equal && (va == vb);
        any_equal_c = any_equal_c || (va == vc);
    }
    REQUIRE(all_equal);
    REQUIRE_FALSE(any_equal_c);
}

TEST_CASE("derived seeds differ across indices", "[rng]") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
    REQUIRE(seen.size() == 1000);
    REQUIRE(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("uniform01 stays in range with sane mean", "[rng]") {
    Rng r(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE(std::fabs(sum / 100000 - 0.5) < 0.01);
}

TEST_CASE("uniform_index covers its range", "[rng]") {
    Rng r(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        auto v = r.uniform_index(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    REQUIRE(seen.size() == 7);
}

TEST_CASE("normal draws have unit variance and zero mean", "[rng]") {
    Rng r(9);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        s += x;
        s2 += x * x;
    }
    double mean = s / n;
    double var = s2 / n - mean * mean;
    REQUIRE(std::fabs(mean) < 0.01);
    REQUIRE(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("shuffle is a deterministic permutation", "[rng]") {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> w = v;
    Rng r1(3), r2(3);
    r1.shuffle(v);
    r2.shuffle(w);
    REQUIRE(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("matrix basics", "[linalg]") {
    RMat a(2, 3);
    a(0, 0) = 1;
    a(0, 2) = 2;
    a(1, 1) = -3;
    RMat at = transpose(a);
    REQUIRE(at.rows() == 3);
    REQUIRE(at(2, 0) == 2.0);
    REQUIRE(at(1, 1) == -3.0);
    REQUIRE(max_abs(a) == 3.0);
    REQUIRE(one_norm(a) == 3.0);

    RMat i2 = RMat::identity(2);
    RMat prod = matmul(i2, a);
    REQUIRE(max_abs_diff(prod, a) == 0.0);
}

TEST_CASE("conjugate transpose", "[linalg]") {
    CMat m(1, 2);
    m(0, 0) = cplx(1, 2);
    m(0, 1) = cplx(-3, 4);
    CMat h = conj_transpose(m);
    REQUIRE(h.rows() == 2);
    REQUIRE(h(0, 0) == cplx(1, -2));
    REQUIRE(h(1, 0) == cplx(-3, -4));
}

TEST_CASE("known inverses come out exactly", "[linalg]") {
    CMat a(2, 2);
    a(0, 0) = 2;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 1;
    CMat inv = invert(a);
    REQUIRE(std::abs(inv(0, 0) - cplx(1)) < 1e-14);
    REQUIRE(std::abs(inv(0, 1) - cplx(-1)) < 1e-14);
    REQUIRE(std::abs(inv(1, 0) - cplx(-1)) < 1e-14);
    REQUIRE(std::abs(inv(1, 1) - cplx(2)) < 1e-14);

    CMat d(2, 2);
    d(0, 0) = cplx(0, 1);
    d(1, 1) = cplx(2, 0);
    CMat dinv = invert(d);
    REQUIRE(std::abs(dinv(0, 0) - cplx(0, -1)) < 1e-15);
    REQUIRE(std::abs(dinv(1, 1) - cplx(0.5, 0)) < 1e-15);
}

TEST_CASE("random well-conditioned inverses verify", "[linalg]") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 1 + rng.uniform_index(6);
        CMat a(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                a(r, c) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)) + (r == c ? cplx(8, 0) : cplx(0));
        CMat inv = invert(a);
        CMat prod = matmul(a, inv);
        REQUIRE(max_abs_diff(prod, CMat::identity(n)) < 1e-12);
    }
}

TEST_CASE("singular matrices are refused", "[linalg]") {
    CMat s(2, 2);
    s(0, 0) = s(0, 1) = s(1, 0) = s(1, 1) = cplx(1, 1);
    REQUIRE_THROWS_AS(invert(s), Error);
    try {
        invert(s);
    } catch (const Error& e) {
        REQUIRE(e.code() == "singular_matrix");
    }

    CMat near(2, 2);
    near(0, 0) = 1;
    near(0, 1) = 1;
    near(1, 0) = 1;
    near(1, 1) = 1 + 1e-14;
    REQUIRE_THROWS_AS(invert(near), Error);
}

TEST_CASE("phase parsing and formatting", "[phase]") {
    REQUIRE(phase_char(Phase::b) == 'b');
    REQUIRE(phase_from_char('c') == Phase::c);
    REQUIRE_THROWS_AS(phase_from_char('d'), Error);

    PhaseSet s = PhaseSet::from_string("ca");
    REQUIRE(s.to_string() == "ac"); // canonical order
    REQUIRE(s.size() == 2);
    REQUIRE(s.contains(Phase::a));
    REQUIRE_FALSE(s.contains(Phase::b));
    REQUIRE_THROWS_AS(PhaseSet::from_string("aa"), Error);
}

TEST_CASE("slots and phases are inverse to each other", "[phase]") {
    for (std::uint8_t mask = 1; mask < 8; ++mask) {
        PhaseSet s{mask};
        for (int slot = 0; slot < s.size(); ++slot)
            REQUIRE(s.slot_of(s.phase_at(slot)) == slot);
        for (Phase p : s.phases()) REQUIRE(s.phase_at(s.slot_of(p)) == p);
    }
    REQUIRE(PhaseSet::from_string("ac").slot_of(Phase::b) == -1);
}

TEST_CASE("subset relation", "[phase]") {
    REQUIRE(PhaseSet::from_string("ac").subset_of(PhaseSet::all()));
    REQUIRE_FALSE(PhaseSet::all().subset_of(PhaseSet::from_string("ac")));
    REQUIRE(PhaseSet::from_string("b").subset_of(PhaseSet::from_string("ab")));
}

TEST_CASE("slot map enumeration is lexicographic and injective", "[phase]") {
    auto maps33 = enumerate_slot_maps(3, 3);
    REQUIRE(maps33.size() == 6);
    REQUIRE(maps33.front().is_identity());
    for (const auto& m : maps33) {
        std::set<int> targets;
        for (int s = 0; s < m.size; ++s) targets.insert(m[s]);
        REQUIRE(targets.size() == 3);
    }
    for (std::size_t k = 1; k < maps33.size(); ++k) {
        auto key = [](const SlotMap& m) {
            return std::tuple{m[0], m[1], m[2]};
        };
        REQUIRE(key(maps33[k - 1]) < key(maps33[k]));
    }

    REQUIRE(enumerate_slot_maps(2, 3).size() == 6);
    REQUIRE(enumerate_slot_maps(1, 3).size() == 3);
    REQUIRE(enumerate_slot_maps(2, 2).size() == 2);
    REQUIRE(enumerate_slot_maps(3, 2).empty());
}

TEST_CASE("phase identity map follows labels", "[phase]") {
    SlotMap m = phase_identity_map(PhaseSet::from_string("ac"), PhaseSet::all());
    REQUIRE(m.size == 2);
    REQUIRE(m[0] == 0);
    REQUIRE(m[1] == 2);
    REQUIRE(phase_identity_map(PhaseSet::all(), PhaseSet::all()).is_identity());
    REQUIRE_THROWS_AS(phase_identity_map(PhaseSet::all(), PhaseSet::from_string("ab")), Error);
}

TEST_CASE("errors carry their code", "[error]") {
    Error e("some_code", "something broke");
    REQUIRE(e.code() == "some_code");
    REQUIRE(std::string(e.what()) == "something broke");
}
