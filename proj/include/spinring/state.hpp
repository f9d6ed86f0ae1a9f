#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "spinring/basis.hpp"
#include "spinring/errors.hpp"

namespace spinring {

using Amplitude = std::complex<double>;

// A pure state of the ring. Amplitudes are stored either over the full
// 2^N product basis (sector == nullptr) or over the codes of one total-S^z
// sector (sector != nullptr, amplitudes[r] belongs to sector->member_codes[r]).
struct StateVector {
    ChainSpec spec;
    std::shared_ptr<const SzSector> sector;  // null means full space
    std::vector<Amplitude> amplitudes;

    std::size_t size() const { return amplitudes.size(); }
    bool in_sector() const { return sector != nullptr; }

    double norm() const;
    double norm_squared() const;

    // Scales to unit norm. Norm below `floor` is treated as the zero state.
    void normalize(double floor = 1e-300);

    void check_consistent() const;
};

StateVector zero_state(const ChainSpec& spec,
                       std::shared_ptr<const SzSector> sector = nullptr);

// |code> as a product state. With a sector tag the code must belong to it.
StateVector product_state(const ChainSpec& spec, BasisCode code,
                          std::shared_ptr<const SzSector> sector = nullptr);

// Haar-like random state: iid complex Gaussian amplitudes, normalized.
StateVector random_normalized(const ChainSpec& spec, std::uint64_t seed,
                              std::shared_ptr<const SzSector> sector = nullptr);

// Scatters a sector-tagged state into the full 2^N space. Full-space input
// is returned unchanged.
StateVector embed_full(const StateVector& psi);

// Restricts a full-space state to the given sector. Weight outside the
// sector above `leak_tol` (relative to the norm) is a contract violation.
StateVector restrict_to_sector(const StateVector& psi,
                               std::shared_ptr<const SzSector> sector,
                               double leak_tol = 1e-12);

Amplitude inner_product(const StateVector& a, const StateVector& b);

}  // namespace spinring
