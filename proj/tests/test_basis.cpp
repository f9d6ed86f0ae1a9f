#include <doctest.h>

#include <bit>
#include <cstdint>

#include "spinring/basis.hpp"
#include "spinring/errors.hpp"

using namespace spinring;

TEST_CASE("chain spec validation") {
    CHECK_NOTHROW(ChainSpec(4, 1.0, 0.0));
    CHECK_NOTHROW(ChainSpec(20, 0.5, -0.1));
    CHECK_THROWS_AS(ChainSpec(2, 1.0, 0.0), DomainError);   // double-bond ambiguity
    CHECK_THROWS_AS(ChainSpec(3, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ChainSpec(5, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ChainSpec(0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ChainSpec(-4, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ChainSpec(32, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ChainSpec(10, 0.0, 0.0), DomainError);   // ferromagnetic or zero J
    CHECK_THROWS_AS(ChainSpec(10, -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ChainSpec(10, 1.0, 1.0 / 0.0), DomainError);
}

TEST_CASE("dimension and site-bit mapping") {
    const ChainSpec spec(10, 1.0, 0.0);
    CHECK(spec.dimension() == 1024);
    CHECK(spec.bit_of_site(1) == 0);
    CHECK(spec.bit_of_site(10) == 9);
    CHECK_THROWS_AS(spec.bit_of_site(0), DomainError);
    CHECK_THROWS_AS(spec.bit_of_site(11), DomainError);
}

TEST_CASE("sector enumeration") {
    const ChainSpec spec(4, 1.0, 0.0);

    SUBCASE("fully polarized") {
        const SzSector s = enumerate_sector(spec, 2.0);
        REQUIRE(s.size() == 1);
        CHECK(s.member_codes[0] == 0b1111);
        const SzSector down = enumerate_sector(spec, -2.0);
        REQUIRE(down.size() == 1);
        CHECK(down.member_codes[0] == 0);
    }

    SUBCASE("half filling") {
        const SzSector s = enumerate_sector(spec, 0.0);
        REQUIRE(s.size() == 6);
        CHECK(s.member_codes == std::vector<BasisCode>{0b0011, 0b0101, 0b0110, 0b1001,
                                                       0b1010, 0b1100});
    }

    SUBCASE("out of range") {
        CHECK_THROWS_AS(enumerate_sector(spec, 3.0), DomainError);
        CHECK_THROWS_AS(enumerate_sector(spec, -2.5), DomainError);
        CHECK_THROWS_AS(enumerate_sector(spec, 0.3), DomainError);
    }
}

TEST_CASE("sector sizes are binomial coefficients") {
    const ChainSpec spec(10, 1.0, 0.0);
    CHECK(enumerate_sector(spec, 0.0).size() == 252);
    CHECK(enumerate_sector(spec, 1.0).size() == 210);
    CHECK(enumerate_sector(spec, -4.0).size() == 10);

    std::size_t total = 0;
    const ChainSpec small(8, 1.0, 0.0);
    for (int twice = -8; twice <= 8; twice += 2) {
        total += enumerate_sector(small, twice / 2.0).size();
    }
    CHECK(total == 256);
}

TEST_CASE("sector members sorted with matching popcount") {
    const ChainSpec spec(10, 1.0, 0.0);
    const SzSector s = enumerate_sector(spec, 1.0);
    REQUIRE(s.n_up() == 6);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(std::popcount(s.member_codes[i]) == 6);
        if (i > 0) CHECK(s.member_codes[i - 1] < s.member_codes[i]);
    }
}

TEST_CASE("sector rank") {
    const ChainSpec spec(4, 1.0, 0.0);
    const SzSector s = enumerate_sector(spec, 0.0);
    CHECK(sector_rank(s, 0b0011) == 0);
    CHECK(sector_rank(s, 0b1100) == 5);
    CHECK_THROWS_AS(sector_rank(s, 0b0001), LookupError);
    CHECK_THROWS_AS(sector_rank(s, 0b0111), LookupError);

    const ChainSpec six(6, 1.0, 0.0);
    const SzSector s6 = enumerate_sector(six, 0.0);
    for (std::size_t r = 0; r < s6.size(); ++r) {
        CHECK(sector_rank(s6, s6.member_codes[r]) == r);
    }
}

TEST_CASE("total sz from code") {
    CHECK(code_total_sz(0b1111, 4) == doctest::Approx(2.0));
    CHECK(code_total_sz(0b0000, 4) == doctest::Approx(-2.0));
    CHECK(code_total_sz(0b0110, 4) == doctest::Approx(0.0));
    CHECK(code_total_sz(0b10110, 6) == doctest::Approx(0.0));
}
