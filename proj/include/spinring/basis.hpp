#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <vector>

#include "spinring/errors.hpp"

namespace spinring {

/// Basis convention used throughout: a product state over N spin-1/2 sites is
/// encoded as an unsigned integer `code` in [0, 2^N). Bit b of `code` holds the
/// spin at site b+1 (sites are 1-based): 1 = up, 0 = down. Total S^z of a code
/// is popcount(code) - N/2.
using BasisCode = std::uint64_t;

/// Physical model parameters: a periodic ring of N spin-1/2 sites with
/// antiferromagnetic exchange J > 0 and an additional S^z S^z anisotropy of
/// strength delta (same units as J). Energies are reported in units of J and
/// times as the dimensionless combination tJ (hbar = 1).
struct ChainSpec {
    int n_sites;
    double exchange_j;
    double anisotropy_delta;

    ChainSpec(int n_sites, double exchange_j, double anisotropy_delta);

    std::uint64_t dimension() const { return std::uint64_t{1} << n_sites; }

    /// Maps a 1-based site label to its bit position.
    int bit_of_site(int site) const;
};

/// Largest ring accepted; 2^30 amplitudes is already 16 GiB of state.
inline constexpr int kMaxSites = 30;

/// All basis codes with a fixed total S^z, in ascending (canonical) order.
/// twice_total_sz keeps the half-integer sector label exact.
struct SzSector {
    int n_sites;
    int twice_total_sz;
    std::vector<BasisCode> member_codes;

    double total_sz() const { return twice_total_sz / 2.0; }
    std::size_t size() const { return member_codes.size(); }

    int n_up() const { return (twice_total_sz + n_sites) / 2; }
};

/// Enumerates the total-S^z sector with the given half-integer label.
/// Throws DomainError if |total_sz| > N/2 or total_sz + N/2 is not an integer.
SzSector enumerate_sector(const ChainSpec& spec, double total_sz);

std::shared_ptr<const SzSector> make_sector(const ChainSpec& spec, double total_sz);

/// Position of `code` within sector.member_codes; inverse of enumeration.
/// Throws LookupError if the code is not a member.
std::size_t sector_rank(const SzSector& sector, BasisCode code);

/// Total S^z of a single basis code, in units of hbar = 1.
inline double code_total_sz(BasisCode code, int n_sites) {
    return std::popcount(code) - n_sites / 2.0;
}

}  // namespace spinring
