#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "spinring/basis.hpp"
#include "spinring/state.hpp"

namespace spinring {

enum class Axis { x, y, z };
enum class Sign { plus, minus };

char axis_label(Axis axis);
Axis parse_axis(std::string_view text);
char sign_label(Sign sign);
Sign parse_sign(std::string_view text);

// One-site spin operator S^alpha_m, sites numbered 1..N around the ring.
struct LocalSpinOp {
    int site;
    Axis axis;
};

// Matrix-free nearest-neighbour Hamiltonian
//   H = J sum_<i,j> S_i . S_j  +  Delta sum_<i,j> S^z_i S^z_j
// over the N ring bonds (i, i+1 mod N), each counted once. Acts either on
// the full 2^N space or restricted to one total-S^z sector (H conserves
// total S^z, so the restriction is exact).
class HamiltonianOp {
  public:
    static HamiltonianOp full_space(const ChainSpec& spec);
    // cache_budget_bytes bounds the optional compressed-row adjacency cache;
    // pass 0 to force the on-the-fly kernel.
    static HamiltonianOp sector_restricted(const ChainSpec& spec,
                                           std::shared_ptr<const SzSector> sector,
                                           std::size_t cache_budget_bytes = kDefaultCacheBudget);

    static constexpr std::size_t kDefaultCacheBudget = 1'500'000'000;

    const ChainSpec& spec() const { return spec_; }
    const std::shared_ptr<const SzSector>& sector() const { return sector_; }
    std::size_t dimension() const;
    bool cached() const { return !row_ptr_.empty(); }

    // out = a*(H in) + b*in. Arrays must have dimension() elements.
    void apply(const double* in, double* out, double a = 1.0, double b = 0.0) const;
    void apply(const Amplitude* in, Amplitude* out, double a = 1.0, double b = 0.0) const;
    void apply(const std::vector<double>& in, std::vector<double>& out, double a = 1.0,
               double b = 0.0) const;
    void apply(const std::vector<Amplitude>& in, std::vector<Amplitude>& out, double a = 1.0,
               double b = 0.0) const;

    // H|psi>, unnormalized; the state's basis must match the operator's.
    StateVector apply_to_state(const StateVector& psi) const;

    // Triangle-inequality cap N*(3|J|/4 + |Delta|/4) on the spectral radius.
    double certified_norm_bound() const;

  private:
    HamiltonianOp(const ChainSpec& spec, std::shared_ptr<const SzSector> sector);
    void build_cache(std::size_t budget_bytes);
    template <class Scalar>
    void apply_impl(const Scalar* in, Scalar* out, double a, double b) const;

    ChainSpec spec_;
    std::shared_ptr<const SzSector> sector_;
    std::vector<BasisCode> bond_masks_;
    double diag_unit_;  // (J + Delta)/4 per bond
    double half_j_;     // transverse hop amplitude J/2

    // sector adjacency cache; all off-diagonal entries equal half_j_ so only
    // the structure is stored
    std::vector<double> diag_;
    std::vector<std::uint64_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
};

// Single-shot spec-level entry points. They construct the matching operator
// per call; hot paths should hold a HamiltonianOp instead.
StateVector apply_hamiltonian(const ChainSpec& spec, const StateVector& psi);

// S^alpha_m |psi>, unnormalized. z keeps a sector tag; x and y mix sectors,
// so sector-tagged input is embedded and the result is full-space.
StateVector apply_local_spin(const LocalSpinOp& op, const StateVector& psi);

// Bounds containing the full spectrum of H: Lanczos extremal estimates
// padded by 1% of the half-width, clamped to the certified triangle bound.
// Above kBoundsLanczosMaxDim the certified bound is returned directly.
std::pair<double, double> spectral_bounds(const ChainSpec& spec);

inline constexpr std::uint64_t kBoundsLanczosMaxDim = std::uint64_t{1} << 24;

// Rank of `code` within the ascending fixed-popcount enumeration that
// enumerate_sector produces (combinatorial number system). The code's
// popcount must match the sector's; membership is not rechecked.
std::size_t combinadic_rank(BasisCode code);

}  // namespace spinring
