#include "spinring/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spinring {

ChainSpec::ChainSpec(int n_sites, double exchange_j, double anisotropy_delta)
    : n_sites(n_sites), exchange_j(exchange_j), anisotropy_delta(anisotropy_delta) {
    if (n_sites < 4 || n_sites % 2 != 0) {
        throw DomainError("n_sites must be an even integer >= 4, got " +
                          std::to_string(n_sites));
    }
    if (n_sites > kMaxSites) {
        throw DomainError("n_sites = " + std::to_string(n_sites) + " exceeds the supported maximum " +
                          std::to_string(kMaxSites));
    }
    if (!(exchange_j > 0.0) || !std::isfinite(exchange_j)) {
        throw DomainError("exchange_j must be a positive finite number");
    }
    if (!std::isfinite(anisotropy_delta)) {
        throw DomainError("anisotropy_delta must be finite");
    }
}

int ChainSpec::bit_of_site(int site) const {
    if (site < 1 || site > n_sites) {
        throw DomainError("site " + std::to_string(site) + " out of range [1, " +
                          std::to_string(n_sites) + "]");
    }
    return site - 1;
}

SzSector enumerate_sector(const ChainSpec& spec, double total_sz) {
    const double twice = 2.0 * total_sz;
    const double rounded = std::nearbyint(twice);
    if (std::abs(twice - rounded) > 1e-9) {
        throw DomainError("total_sz must be a half-integer");
    }
    const int twice_total_sz = static_cast<int>(rounded);
    if ((twice_total_sz + spec.n_sites) % 2 != 0) {
        throw DomainError("total_sz + N/2 must be an integer for this chain length");
    }
    if (std::abs(twice_total_sz) > spec.n_sites) {
        throw DomainError("|total_sz| must not exceed N/2");
    }

    const int n_up = (twice_total_sz + spec.n_sites) / 2;
    SzSector sector{spec.n_sites, twice_total_sz, {}};

    // Gosper's hack walks codes of fixed popcount in ascending order.
    if (n_up == 0) {
        sector.member_codes.push_back(0);
        return sector;
    }
    const BasisCode limit = spec.dimension();
    BasisCode code = (BasisCode{1} << n_up) - 1;
    while (code < limit) {
        sector.member_codes.push_back(code);
        const BasisCode lowest = code & (~code + 1);
        const BasisCode ripple = code + lowest;
        code = ripple | (((code ^ ripple) >> 2) / lowest);
    }
    return sector;
}

std::shared_ptr<const SzSector> make_sector(const ChainSpec& spec, double total_sz) {
    return std::make_shared<const SzSector>(enumerate_sector(spec, total_sz));
}

std::size_t sector_rank(const SzSector& sector, BasisCode code) {
    const auto it =
        std::lower_bound(sector.member_codes.begin(), sector.member_codes.end(), code);
    if (it == sector.member_codes.end() || *it != code) {
        throw LookupError("basis code " + std::to_string(code) + " is not in the S^z = " +
                          std::to_string(sector.total_sz()) + " sector");
    }
    return static_cast<std::size_t>(it - sector.member_codes.begin());
}

}  // namespace spinring
