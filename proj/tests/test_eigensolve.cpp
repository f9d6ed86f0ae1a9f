#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracle.hpp"
#include "spinring/eigensolve.hpp"
#include "spinring/observables.hpp"
#include "spinring/statefile.hpp"

using namespace spinring;

TEST_CASE("four-site ground state energy is -2J") {
    const ChainSpec spec(4, 1.0, 0.0);
    const GroundStateResult r = lanczos_ground_state(spec);
    CHECK(r.energy == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r.residual <= 1e-10 * std::max(1.0, std::abs(r.energy)));
    CHECK(std::abs(r.state.norm() - 1.0) <= 1e-12);

    const GroundStateResult dense = dense_ground_state(spec);
    CHECK(dense.energy == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("Lanczos agrees with the independent dense reference") {
    const ChainSpec spec(10, 1.0, 0.0);
    Eigen::SelfAdjointEigenSolver<oracle::Matrix> es(oracle::dense_hamiltonian(spec));
    const GroundStateResult r = lanczos_ground_state(spec);
    CHECK(std::abs(r.energy - es.eigenvalues()(0)) <= 1e-10);
}

TEST_CASE("Lanczos agrees with dense diagonalization across anisotropies") {
    for (const double delta : {-0.1, 0.0, 0.1, 2.0}) {
        const ChainSpec spec(10, 1.0, delta);
        const GroundStateResult fast = lanczos_ground_state(spec);
        const GroundStateResult dense = dense_ground_state(spec);
        CHECK(std::abs(fast.energy - dense.energy) <= 1e-10);

        // states agree up to the shared phase convention
        const StateVector full = embed_full(fast.state);
        double max_diff = 0.0;
        for (std::size_t c = 0; c < full.size(); ++c) {
            max_diff = std::max(max_diff,
                                std::abs(full.amplitudes[c] - dense.state.amplitudes[c]));
        }
        CHECK(max_diff <= 1e-8);
    }
}

TEST_CASE("seed independence up to the phase convention") {
    const ChainSpec spec(8, 1.0, 0.5);
    LanczosConfig a, b;
    a.seed = 1;
    b.seed = 99;
    const GroundStateResult ra = lanczos_ground_state(spec, a);
    const GroundStateResult rb = lanczos_ground_state(spec, b);
    CHECK(std::abs(ra.energy - rb.energy) <= 1e-10);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < ra.state.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(ra.state.amplitudes[i] - rb.state.amplitudes[i]));
    }
    CHECK(max_diff <= 1e-8);
}

TEST_CASE("sector solve matches the full-space solve") {
    const ChainSpec spec(10, 1.0, 0.3);
    LanczosConfig full_cfg;
    full_cfg.use_sz_zero_sector = false;
    const GroundStateResult in_sector = lanczos_ground_state(spec);
    const GroundStateResult in_full = lanczos_ground_state(spec, full_cfg);
    CHECK(in_sector.state.in_sector());
    CHECK_FALSE(in_full.state.in_sector());
    CHECK(std::abs(in_sector.energy - in_full.energy) <= 1e-10);
}

TEST_CASE("variational bound against random states") {
    const ChainSpec spec(8, 1.0, 0.0);
    const GroundStateResult r = lanczos_ground_state(spec);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const StateVector probe = random_normalized(spec, seed);
        CHECK(r.energy <= energy(probe, spec) + 1e-12);
    }
}

TEST_CASE("selective reorthogonalization reaches the same ground state") {
    const ChainSpec spec(12, 1.0, 0.0);
    LanczosConfig cfg;
    cfg.reorthogonalize = Reorthogonalization::selective;
    const GroundStateResult sel = lanczos_ground_state(spec, cfg);
    const GroundStateResult full = lanczos_ground_state(spec);
    CHECK(std::abs(sel.energy - full.energy) <= 1e-10);
    CHECK(sel.residual <= 1e-10 * std::max(1.0, std::abs(sel.energy)));
}

TEST_CASE("isotropic ground state is a singlet with zero magnetization") {
    const ChainSpec spec(10, 1.0, 0.0);
    const GroundStateResult r = lanczos_ground_state(spec);
    CHECK(total_spin_squared(r.state) <= 1e-8);
    for (int site = 1; site <= 10; ++site) {
        for (const Axis axis : {Axis::x, Axis::y, Axis::z}) {
            CHECK(std::abs(magnetization(r.state, site, axis)) <= 1e-10);
        }
    }
}

TEST_CASE("energy per site approaches the Bethe value from below") {
    const double reference = bethe_reference_energy_per_site();
    CHECK(reference == doctest::Approx(0.25 - std::log(2.0)).epsilon(1e-15));
    CHECK(bethe_reference_energy_per_site(2.0) == doctest::Approx(2.0 * (0.25 - std::log(2.0))));

    double prev_deviation = 1e9;
    for (const int n : {10, 12, 14}) {
        const ChainSpec spec(n, 1.0, 0.0);
        const GroundStateResult r = lanczos_ground_state(spec);
        const double per_site = r.energy / n;
        CHECK(per_site < reference);  // finite ring sits below the infinite chain
        const double deviation = reference - per_site;
        CHECK(deviation < prev_deviation);
        prev_deviation = deviation;
    }
}

TEST_CASE("dense diagonalization refuses large chains") {
    CHECK_THROWS_AS(dense_ground_state(ChainSpec(14, 1.0, 0.0)), DomainError);
}

TEST_CASE("invalid solver configuration") {
    const ChainSpec spec(4, 1.0, 0.0);
    LanczosConfig cfg;
    cfg.max_krylov_dim = 1;
    CHECK_THROWS_AS(lanczos_ground_state(spec, cfg), DomainError);
    cfg = LanczosConfig{};
    cfg.energy_tol = 0.0;
    CHECK_THROWS_AS(lanczos_ground_state(spec, cfg), DomainError);
}

TEST_CASE("phase convention pins the global phase") {
    const ChainSpec spec(6, 1.0, 0.0);
    StateVector psi = random_normalized(spec, 123);
    StateVector rotated = psi;
    const Amplitude phase = std::exp(Amplitude{0.0, 1.234});
    for (auto& a : rotated.amplitudes) a *= phase;
    fix_global_phase(psi);
    fix_global_phase(rotated);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(psi.amplitudes[i] - rotated.amplitudes[i]));
    }
    CHECK(max_diff <= 1e-14);
}

TEST_CASE("state files round-trip bit-exactly") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "spinring_state_test.bin";

    SUBCASE("full space") {
        const ChainSpec spec(8, 1.0, -0.25);
        StateVector psi = random_normalized(spec, 5);
        psi.amplitudes[3] = Amplitude{-0.0, 5e-324};  // signed zero and denormal survive
        save_state(psi, path, true);
        StateFileInfo info;
        const StateVector back = load_state(path, &info);
        CHECK(info.phase_fixed);
        CHECK(back.spec.n_sites == 8);
        CHECK(back.spec.exchange_j == 1.0);
        CHECK(back.spec.anisotropy_delta == -0.25);
        CHECK_FALSE(back.in_sector());
        REQUIRE(back.size() == psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) {
            CHECK(std::memcmp(&back.amplitudes[i], &psi.amplitudes[i], sizeof(Amplitude)) == 0);
        }
    }

    SUBCASE("sector tag restored") {
        const ChainSpec spec(8, 0.5, 2.0);
        const auto sector = make_sector(spec, 1.0);
        const StateVector psi = random_normalized(spec, 6, sector);
        save_state(psi, path);
        StateFileInfo info;
        const StateVector back = load_state(path, &info);
        CHECK_FALSE(info.phase_fixed);
        REQUIRE(back.in_sector());
        CHECK(back.sector->twice_total_sz == 2);
        CHECK(back.size() == psi.size());
        CHECK(back.amplitudes == psi.amplitudes);
    }

    SUBCASE("corruption is detected") {
        const ChainSpec spec(4, 1.0, 0.0);
        save_state(product_state(spec, 3), path);

        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();

        std::ofstream truncated(path, std::ios::binary | std::ios::trunc);
        truncated.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        truncated.close();
        CHECK_THROWS_AS(load_state(path), IoError);

        std::ofstream bad(path, std::ios::binary | std::ios::trunc);
        std::string mangled = bytes;
        mangled[0] = 'X';
        bad.write(mangled.data(), static_cast<std::streamsize>(mangled.size()));
        bad.close();
        CHECK_THROWS_AS(load_state(path), IoError);

        std::ofstream trailing(path, std::ios::binary | std::ios::trunc);
        trailing.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        trailing.put('\0');
        trailing.close();
        CHECK_THROWS_AS(load_state(path), IoError);

        CHECK_THROWS_AS(load_state(fs::path("/nonexistent/state.bin")), IoError);
    }

    fs::remove(path);
}
