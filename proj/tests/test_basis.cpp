#include <doctest.h>

#include <set>

#include "qbench/basis.hpp"
#include "qbench/rng.hpp"

using namespace qbench;

TEST_CASE("paper-reported dimensions are reproduced exactly") {
    CHECK(enumerate_basis(LatticeSpec::bose_hubbard_chain(10, 10)).dimension() == 92378);
    CHECK(enumerate_basis(LatticeSpec::fermi_hubbard_chain(10, 5, 5)).dimension() == 63504);
    CHECK(enumerate_basis(LatticeSpec::pxp_grid(5, 5)).dimension() == 55447);
    CHECK(enumerate_basis(LatticeSpec::spin_chain(16)).dimension() == 65536);
    CHECK(enumerate_basis(LatticeSpec::bose_hubbard_chain(9, 9)).dimension() == 24310);
    CHECK(enumerate_basis(LatticeSpec::bose_hubbard_chain(1, 1)).dimension() == 1);
}

TEST_CASE("dimension matches the combinatorial formula") {
    for (int l = 2; l <= 6; ++l) {
        for (int n = 0; n <= l; ++n) {
            const auto bh = enumerate_basis(LatticeSpec::bose_hubbard_chain(l, n));
            CHECK(bh.dimension() == basis_dimension_formula(bh.spec()));
        }
    }
    const auto fh = enumerate_basis(LatticeSpec::fermi_hubbard_chain(6, 2, 3));
    CHECK(fh.dimension() == basis_dimension_formula(fh.spec()));
}

TEST_CASE("pxp enumeration equals a brute-force constraint filter") {
    // 1D up to 20 sites via the closed recursion, small sizes by filter.
    for (int l = 2; l <= 20; ++l) {
        const auto basis = enumerate_basis(LatticeSpec::pxp_chain(l));
        CHECK(basis.dimension() == basis_dimension_formula(basis.spec()));
    }
    for (int l = 2; l <= 16; ++l) {
        std::int64_t count = 0;
        for (std::int64_t v = 0; v < (std::int64_t{1} << l); ++v)
            if ((v & (v >> 1)) == 0) ++count;
        CHECK(enumerate_basis(LatticeSpec::pxp_chain(l)).dimension() == count);
    }
    // 2D grids by filter.
    for (int r = 2; r <= 3; ++r) {
        for (int c = 2; c <= 4; ++c) {
            const auto basis = enumerate_basis(LatticeSpec::pxp_grid(r, c));
            std::int64_t count = 0;
            for (std::int64_t v = 0; v < (std::int64_t{1} << (r * c)); ++v) {
                bool ok = true;
                for (int i = 0; ok && i < r * c; ++i) {
                    if (!((v >> i) & 1)) continue;
                    const int ri = i / c, ci = i % c;
                    if (ci + 1 < c && ((v >> (i + 1)) & 1)) ok = false;
                    if (ri + 1 < r && ((v >> (i + c)) & 1)) ok = false;
                }
                if (ok) ++count;
            }
            CHECK(basis.dimension() == count);
            CHECK(basis.dimension() == basis_dimension_formula(basis.spec()));
        }
    }
}

TEST_CASE("bijection between indices and configurations") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(8, 8));
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto i = static_cast<std::int64_t>(rng.uniform_index(basis.dimension()));
        const auto z = basis.configuration_of(i);
        REQUIRE(basis.index_of(z).has_value());
        CHECK(*basis.index_of(z) == i);
    }
}

TEST_CASE("every configuration satisfies the constraints (exhaustive)") {
    const auto bh = enumerate_basis(LatticeSpec::bose_hubbard_chain(7, 5));
    REQUIRE(bh.dimension() <= 10000);
    std::set<Configuration> seen;
    for (std::int64_t i = 0; i < bh.dimension(); ++i) {
        const auto& z = bh.configuration_of(i);
        int total = 0;
        for (auto n : z) total += n;
        CHECK(total == 5);
        CHECK(seen.insert(z).second); // uniqueness
        if (i > 0) CHECK(bh.configuration_of(i - 1) < z); // canonical order
    }
    const auto pxp = enumerate_basis(LatticeSpec::pxp_chain(12));
    for (std::int64_t i = 0; i < pxp.dimension(); ++i) {
        const auto& z = pxp.configuration_of(i);
        for (std::size_t s = 0; s + 1 < z.size(); ++s) CHECK(!(z[s] && z[s + 1]));
    }
}

TEST_CASE("index_of rejects and reports") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(4, 4));
    const Configuration unity{1, 1, 1, 1};
    REQUIRE(basis.index_of(unity).has_value());
    CHECK(basis.configuration_of(*basis.index_of(unity)) == unity);

    CHECK(!basis.index_of(Configuration{2, 0, 1, 0}).has_value()); // wrong total
    CHECK_THROWS_AS((void)basis.index_of(Configuration{1, 1, 1}), ValidationError);

    const auto pxp = enumerate_basis(LatticeSpec::pxp_chain(4));
    CHECK(!pxp.index_of(Configuration{0, 1, 1, 0}).has_value()); // adjacent excitations

    const auto spin = enumerate_basis(LatticeSpec::spin_chain(5));
    CHECK(spin.configuration_of(0) == Configuration{0, 0, 0, 0, 0});
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(LatticeSpec::fermi_hubbard_chain(4, 5, 2), ValidationError);
    CHECK_THROWS_AS(LatticeSpec::pxp_grid(0, 5), ValidationError);
    CHECK_THROWS_AS(LatticeSpec::bose_hubbard_chain(0, 2), ValidationError);
}

TEST_CASE("configuration string round trip") {
    const Configuration z{1, 0, 2, 1};
    CHECK(configuration_to_string(z) == "1,0,2,1");
    CHECK(configuration_from_string("1,0,2,1") == z);
    CHECK_THROWS_AS(configuration_from_string("1,,2"), ValidationError);
    CHECK_THROWS_AS(configuration_from_string("1,x"), ValidationError);
}
