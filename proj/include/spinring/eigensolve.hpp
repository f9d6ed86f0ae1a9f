#pragma once

#include <cstdint>

#include "spinring/operators.hpp"
#include "spinring/state.hpp"

namespace spinring {

enum class Reorthogonalization { full, selective };

struct LanczosConfig {
    int max_krylov_dim = 300;
    double energy_tol = 1e-12;
    Reorthogonalization reorthogonalize = Reorthogonalization::full;
    std::uint64_t seed = 1;
    int max_restarts = 3;
    // Solve inside the S^z = 0 sector (the ground state lives there for every
    // anisotropy handled here). Disable to solve in the full 2^N space.
    bool use_sz_zero_sector = true;
};

struct GroundStateResult {
    double energy = 0.0;
    StateVector state;
    double residual = 0.0;  // ||H psi - E psi||
    int iterations = 0;
};

// Lowest eigenpair of H. The returned state is sector-tagged when solved in
// the S^z = 0 sector and carries the deterministic phase convention below.
GroundStateResult lanczos_ground_state(const ChainSpec& spec, const LanczosConfig& cfg = {});

// Same operator restricted to an arbitrary sector; used internally and by
// cross-checks. The state keeps the sector tag.
GroundStateResult lanczos_lowest_in_basis(const HamiltonianOp& op, const LanczosConfig& cfg);

// Full dense diagonalization, guarded to N <= 12. Exists to cross-check the
// iterative path at small sizes.
GroundStateResult dense_ground_state(const ChainSpec& spec);

// Bethe-Ansatz ground-state energy per site of the infinite isotropic chain,
// J*(1/4 - ln 2).
double bethe_reference_energy_per_site(double exchange_j = 1.0);

// Multiplies by a global phase so the largest-magnitude amplitude (first
// index on ties) becomes real and positive. No-op on the zero state.
void fix_global_phase(StateVector& psi);

}  // namespace spinring
