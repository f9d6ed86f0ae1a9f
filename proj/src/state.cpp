#include "spinring/state.hpp"

#include <cmath>
#include <string>

namespace spinring {

namespace {

// Pairwise summation keeps the error ~O(eps log n) for the 2^N-long sums.
double pairwise_norm_sq(const Amplitude* data, std::size_t n) {
    if (n <= 64) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::norm(data[i]);
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_norm_sq(data, half) + pairwise_norm_sq(data + half, n - half);
}

}  // namespace

double StateVector::norm_squared() const {
    return pairwise_norm_sq(amplitudes.data(), amplitudes.size());
}

double StateVector::norm() const { return std::sqrt(norm_squared()); }

void StateVector::normalize(double floor) {
    const double nrm = norm();
    if (nrm < floor) {
        for (auto& a : amplitudes) a = 0.0;
        return;
    }
    const double inv = 1.0 / nrm;
    for (auto& a : amplitudes) a *= inv;
}

void StateVector::check_consistent() const {
    const std::size_t expect =
        sector ? sector->size() : static_cast<std::size_t>(spec.dimension());
    if (amplitudes.size() != expect) {
        throw ContractViolation("state size " + std::to_string(amplitudes.size()) +
                                " does not match its basis size " + std::to_string(expect));
    }
    if (sector && sector->n_sites != spec.n_sites) {
        throw ContractViolation("sector tag belongs to a different chain length");
    }
}

StateVector zero_state(const ChainSpec& spec, std::shared_ptr<const SzSector> sector) {
    StateVector psi{spec, std::move(sector), {}};
    const std::size_t n =
        psi.sector ? psi.sector->size() : static_cast<std::size_t>(spec.dimension());
    psi.amplitudes.assign(n, Amplitude{0.0, 0.0});
    psi.check_consistent();
    return psi;
}

StateVector product_state(const ChainSpec& spec, BasisCode code,
                          std::shared_ptr<const SzSector> sector) {
    if (code >= spec.dimension()) {
        throw DomainError("basis code " + std::to_string(code) +
                          " out of range for N = " + std::to_string(spec.n_sites));
    }
    StateVector psi = zero_state(spec, std::move(sector));
    const std::size_t idx =
        psi.sector ? sector_rank(*psi.sector, code) : static_cast<std::size_t>(code);
    psi.amplitudes[idx] = Amplitude{1.0, 0.0};
    return psi;
}

StateVector random_normalized(const ChainSpec& spec, std::uint64_t seed,
                              std::shared_ptr<const SzSector> sector) {
    StateVector psi = zero_state(spec, std::move(sector));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& a : psi.amplitudes) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        a = Amplitude{re, im};
    }
    psi.normalize();
    return psi;
}

StateVector embed_full(const StateVector& psi) {
    psi.check_consistent();
    if (!psi.sector) return psi;
    StateVector full = zero_state(psi.spec, nullptr);
    for (std::size_t r = 0; r < psi.sector->size(); ++r) {
        full.amplitudes[static_cast<std::size_t>(psi.sector->member_codes[r])] =
            psi.amplitudes[r];
    }
    return full;
}

StateVector restrict_to_sector(const StateVector& psi,
                               std::shared_ptr<const SzSector> sector,
                               double leak_tol) {
    psi.check_consistent();
    if (!sector) throw ContractViolation("restrict_to_sector needs a sector");
    if (psi.sector) {
        if (psi.sector->twice_total_sz != sector->twice_total_sz) {
            throw ContractViolation("state is tagged with a different sector");
        }
        StateVector out = psi;
        out.sector = std::move(sector);
        return out;
    }
    StateVector out = zero_state(psi.spec, sector);
    for (std::size_t r = 0; r < sector->size(); ++r) {
        out.amplitudes[r] =
            psi.amplitudes[static_cast<std::size_t>(sector->member_codes[r])];
    }
    const double total = psi.norm_squared();
    const double kept = out.norm_squared();
    if (total > 0.0 && total - kept > leak_tol * total) {
        throw ContractViolation("state has weight outside the requested sector");
    }
    return out;
}

Amplitude inner_product(const StateVector& a, const StateVector& b) {
    a.check_consistent();
    b.check_consistent();
    const bool same_basis =
        (a.sector == b.sector) ||
        (a.sector && b.sector && a.sector->twice_total_sz == b.sector->twice_total_sz);
    if (a.spec.n_sites != b.spec.n_sites || (!same_basis && (a.sector || b.sector))) {
        // Differently-tagged states still have a well-defined overlap in the
        // full space; fall back to embedding.
        if (a.spec.n_sites != b.spec.n_sites) {
            throw ContractViolation("inner product between different chain lengths");
        }
        const StateVector fa = embed_full(a);
        const StateVector fb = embed_full(b);
        return inner_product(fa, fb);
    }
    Amplitude acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
        acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    }
    return acc;
}

}  // namespace spinring
