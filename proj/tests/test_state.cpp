#include <doctest.h>

#include <cmath>

#include "spinring/state.hpp"

using namespace spinring;

TEST_CASE("zero and product states") {
    const ChainSpec spec(6, 1.0, 0.0);
    const StateVector zero = zero_state(spec);
    CHECK(zero.size() == 64);
    CHECK(zero.norm() == 0.0);

    const StateVector psi = product_state(spec, 0b101010);
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(psi.amplitudes[0b101010] == Amplitude{1.0, 0.0});
    CHECK_THROWS_AS(product_state(spec, 64), DomainError);
}

TEST_CASE("product state in a sector") {
    const ChainSpec spec(6, 1.0, 0.0);
    const auto sector = make_sector(spec, 0.0);
    const StateVector psi = product_state(spec, 0b000111, sector);
    CHECK(psi.size() == sector->size());
    CHECK(psi.amplitudes[0] == Amplitude{1.0, 0.0});  // 000111 is the smallest member
    CHECK_THROWS_AS(product_state(spec, 0b000011, sector), LookupError);
}

TEST_CASE("random states are deterministic and normalized") {
    const ChainSpec spec(8, 1.0, 0.0);
    const StateVector a = random_normalized(spec, 42);
    const StateVector b = random_normalized(spec, 42);
    const StateVector c = random_normalized(spec, 43);
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.amplitudes == b.amplitudes);
    CHECK(a.amplitudes != c.amplitudes);
}

TEST_CASE("embedding and restriction round-trip") {
    const ChainSpec spec(8, 1.0, 0.0);
    const auto sector = make_sector(spec, 0.0);
    const StateVector psi = random_normalized(spec, 7, sector);

    const StateVector full = embed_full(psi);
    CHECK(full.size() == 256);
    CHECK(full.norm() == doctest::Approx(1.0).epsilon(1e-14));

    const StateVector back = restrict_to_sector(full, sector);
    REQUIRE(back.size() == psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        CHECK(back.amplitudes[i] == psi.amplitudes[i]);
    }
}

TEST_CASE("restriction rejects out-of-sector weight") {
    const ChainSpec spec(6, 1.0, 0.0);
    const auto sector = make_sector(spec, 0.0);
    StateVector psi = random_normalized(spec, 3);  // full space, all sectors populated
    CHECK_THROWS_AS(restrict_to_sector(psi, sector), ContractViolation);
}

TEST_CASE("normalization floor yields the zero state") {
    const ChainSpec spec(4, 1.0, 0.0);
    StateVector psi = zero_state(spec);
    psi.amplitudes[3] = Amplitude{1e-320, 0.0};
    psi.normalize();
    CHECK(psi.norm() == 0.0);
}

TEST_CASE("inner products") {
    const ChainSpec spec(6, 1.0, 0.0);
    const StateVector a = product_state(spec, 5);
    const StateVector b = product_state(spec, 9);
    CHECK(inner_product(a, a) == Amplitude{1.0, 0.0});
    CHECK(inner_product(a, b) == Amplitude{0.0, 0.0});

    const StateVector r = random_normalized(spec, 11);
    CHECK(std::abs(inner_product(r, r) - Amplitude{1.0, 0.0}) < 1e-14);

    // sector-tagged against full-space of the same ray
    const auto sector = make_sector(spec, 0.0);
    const StateVector s = random_normalized(spec, 13, sector);
    const Amplitude mixed = inner_product(s, embed_full(s));
    CHECK(std::abs(mixed - Amplitude{1.0, 0.0}) < 1e-14);
}

TEST_CASE("consistency checks catch mismatched sizes") {
    const ChainSpec spec(6, 1.0, 0.0);
    StateVector psi = product_state(spec, 1);
    psi.amplitudes.resize(10);
    CHECK_THROWS_AS(psi.check_consistent(), ContractViolation);
}
