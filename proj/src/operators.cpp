#include "spinring/operators.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <tuple>

namespace spinring {

char axis_label(Axis axis) {
    switch (axis) {
        case Axis::x: return 'x';
        case Axis::y: return 'y';
        case Axis::z: return 'z';
    }
    throw ContractViolation("invalid axis enum value");
}

Axis parse_axis(std::string_view text) {
    if (text == "x" || text == "X") return Axis::x;
    if (text == "y" || text == "Y") return Axis::y;
    if (text == "z" || text == "Z") return Axis::z;
    throw DomainError("axis must be one of x, y, z; got '" + std::string(text) + "'");
}

char sign_label(Sign sign) { return sign == Sign::plus ? '+' : '-'; }

Sign parse_sign(std::string_view text) {
    if (text == "+" || text == "plus" || text == "up") return Sign::plus;
    if (text == "-" || text == "minus" || text == "down") return Sign::minus;
    throw DomainError("sign must be +/plus/up or -/minus/down; got '" + std::string(text) + "'");
}

namespace {

struct BinomTable {
    std::uint64_t c[kMaxSites + 1][kMaxSites + 1] = {};
    BinomTable() {
        for (int n = 0; n <= kMaxSites; ++n) {
            c[n][0] = 1;
            for (int k = 1; k <= n; ++k) {
                c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
            }
        }
    }
};

const BinomTable& binom() {
    static const BinomTable table;
    return table;
}

inline BasisCode rotl_ring(BasisCode c, int n, BasisCode mask) {
    return ((c << 1) | (c >> (n - 1))) & mask;
}

}  // namespace

std::size_t combinadic_rank(BasisCode code) {
    const auto& t = binom();
    std::size_t rank = 0;
    int j = 1;
    while (code != 0) {
        const int p = std::countr_zero(code);
        code &= code - 1;
        rank += t.c[p][j];  // C(p, j) is zero when p < j
        ++j;
    }
    return rank;
}

HamiltonianOp::HamiltonianOp(const ChainSpec& spec, std::shared_ptr<const SzSector> sector)
    : spec_(spec),
      sector_(std::move(sector)),
      diag_unit_((spec.exchange_j + spec.anisotropy_delta) / 4.0),
      half_j_(spec.exchange_j / 2.0) {
    // bond_masks_[k] covers the pair (k-1 mod N, k); with d = c ^ rotl(c),
    // bit k of d is set exactly when that bond's spins differ.
    bond_masks_.resize(spec.n_sites);
    for (int k = 0; k < spec.n_sites; ++k) {
        const int prev = (k + spec.n_sites - 1) % spec.n_sites;
        bond_masks_[k] = (BasisCode{1} << k) | (BasisCode{1} << prev);
    }
    if (sector_ && sector_->n_sites != spec.n_sites) {
        throw ContractViolation("sector belongs to a different chain length");
    }
}

HamiltonianOp HamiltonianOp::full_space(const ChainSpec& spec) {
    return HamiltonianOp(spec, nullptr);
}

HamiltonianOp HamiltonianOp::sector_restricted(const ChainSpec& spec,
                                               std::shared_ptr<const SzSector> sector,
                                               std::size_t cache_budget_bytes) {
    if (!sector) throw ContractViolation("sector_restricted needs a sector");
    HamiltonianOp h(spec, std::move(sector));
    h.build_cache(cache_budget_bytes);
    return h;
}

std::size_t HamiltonianOp::dimension() const {
    return sector_ ? sector_->size() : static_cast<std::size_t>(spec_.dimension());
}

double HamiltonianOp::certified_norm_bound() const {
    return spec_.n_sites *
           (3.0 * std::abs(spec_.exchange_j) / 4.0 + std::abs(spec_.anisotropy_delta) / 4.0);
}

void HamiltonianOp::build_cache(std::size_t budget_bytes) {
    const int n = spec_.n_sites;
    const BasisCode mask = spec_.dimension() - 1;
    const auto& codes = sector_->member_codes;
    const std::size_t size = codes.size();

    std::uint64_t nnz = 0;
    for (std::size_t r = 0; r < size; ++r) {
        nnz += std::popcount(codes[r] ^ rotl_ring(codes[r], n, mask));
    }
    const std::uint64_t bytes =
        nnz * sizeof(std::uint32_t) + (size + 1) * sizeof(std::uint64_t) + size * sizeof(double);
    if (bytes > budget_bytes) return;  // fall back to the on-the-fly kernel

    diag_.resize(size);
    row_ptr_.resize(size + 1);
    cols_.reserve(nnz);
    row_ptr_[0] = 0;
    for (std::size_t r = 0; r < size; ++r) {
        const BasisCode c = codes[r];
        const BasisCode d = c ^ rotl_ring(c, n, mask);
        diag_[r] = diag_unit_ * (n - 2 * std::popcount(d));
        BasisCode dd = d;
        while (dd != 0) {
            const int k = std::countr_zero(dd);
            dd &= dd - 1;
            cols_.push_back(static_cast<std::uint32_t>(combinadic_rank(c ^ bond_masks_[k])));
        }
        row_ptr_[r + 1] = cols_.size();
    }
}

template <class Scalar>
void HamiltonianOp::apply_impl(const Scalar* in, Scalar* out, double a, double b) const {
    if (in == out) throw ContractViolation("apply requires distinct in/out arrays");
    const int n = spec_.n_sites;
    const BasisCode mask = spec_.dimension() - 1;
    const std::int64_t dim = static_cast<std::int64_t>(dimension());

    if (!sector_) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < dim; ++i) {
            const BasisCode c = static_cast<BasisCode>(i);
            const BasisCode d = c ^ rotl_ring(c, n, mask);
            Scalar hop{};
            BasisCode dd = d;
            while (dd != 0) {
                const int k = std::countr_zero(dd);
                dd &= dd - 1;
                hop += in[c ^ bond_masks_[k]];
            }
            const double diag = diag_unit_ * (n - 2 * std::popcount(d));
            out[i] = a * (diag * in[i] + half_j_ * hop) + b * in[i];
        }
        return;
    }

    if (cached()) {
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < dim; ++r) {
            Scalar hop{};
            for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                hop += in[cols_[k]];
            }
            out[r] = a * (diag_[r] * in[r] + half_j_ * hop) + b * in[r];
        }
        return;
    }

    const auto& codes = sector_->member_codes;
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < dim; ++r) {
        const BasisCode c = codes[r];
        const BasisCode d = c ^ rotl_ring(c, n, mask);
        Scalar hop{};
        BasisCode dd = d;
        while (dd != 0) {
            const int k = std::countr_zero(dd);
            dd &= dd - 1;
            hop += in[combinadic_rank(c ^ bond_masks_[k])];
        }
        const double diag = diag_unit_ * (n - 2 * std::popcount(d));
        out[r] = a * (diag * in[r] + half_j_ * hop) + b * in[r];
    }
}

void HamiltonianOp::apply(const double* in, double* out, double a, double b) const {
    apply_impl(in, out, a, b);
}

void HamiltonianOp::apply(const Amplitude* in, Amplitude* out, double a, double b) const {
    apply_impl(in, out, a, b);
}

void HamiltonianOp::apply(const std::vector<double>& in, std::vector<double>& out, double a,
                          double b) const {
    if (in.size() != dimension()) throw ContractViolation("input vector size mismatch");
    if (&in == &out) {
        const std::vector<double> tmp = in;
        out.resize(dimension());
        apply_impl(tmp.data(), out.data(), a, b);
        return;
    }
    out.resize(dimension());
    apply_impl(in.data(), out.data(), a, b);
}

void HamiltonianOp::apply(const std::vector<Amplitude>& in, std::vector<Amplitude>& out, double a,
                          double b) const {
    if (in.size() != dimension()) throw ContractViolation("input vector size mismatch");
    if (&in == &out) {
        const std::vector<Amplitude> tmp = in;
        out.resize(dimension());
        apply_impl(tmp.data(), out.data(), a, b);
        return;
    }
    out.resize(dimension());
    apply_impl(in.data(), out.data(), a, b);
}

StateVector HamiltonianOp::apply_to_state(const StateVector& psi) const {
    psi.check_consistent();
    if (psi.spec.n_sites != spec_.n_sites) {
        throw ContractViolation("state dimension does not match the operator");
    }
    const bool both_full = !psi.sector && !sector_;
    const bool both_sector =
        psi.sector && sector_ && psi.sector->twice_total_sz == sector_->twice_total_sz;
    if (!both_full && !both_sector) {
        throw ContractViolation("state basis does not match the operator basis");
    }
    StateVector out = psi;
    apply(psi.amplitudes, out.amplitudes, 1.0, 0.0);
    return out;
}

StateVector apply_hamiltonian(const ChainSpec& spec, const StateVector& psi) {
    if (spec.n_sites != psi.spec.n_sites) {
        throw ContractViolation("state dimension does not match the chain spec");
    }
    if (psi.sector) {
        // single-shot path: skip the adjacency cache
        return HamiltonianOp::sector_restricted(spec, psi.sector, 0).apply_to_state(psi);
    }
    return HamiltonianOp::full_space(spec).apply_to_state(psi);
}

StateVector apply_local_spin(const LocalSpinOp& op, const StateVector& psi) {
    psi.check_consistent();
    const int bit = psi.spec.bit_of_site(op.site);

    if (op.axis == Axis::z) {
        StateVector out = psi;
        if (psi.sector) {
            const auto& codes = psi.sector->member_codes;
            for (std::size_t r = 0; r < codes.size(); ++r) {
                out.amplitudes[r] = (((codes[r] >> bit) & 1) ? 0.5 : -0.5) * psi.amplitudes[r];
            }
        } else {
            for (std::size_t c = 0; c < psi.amplitudes.size(); ++c) {
                out.amplitudes[c] = (((c >> bit) & 1) ? 0.5 : -0.5) * psi.amplitudes[c];
            }
        }
        return out;
    }

    // S^x and S^y change total S^z, so the result lives in the full space.
    const StateVector full = psi.sector ? embed_full(psi) : psi;
    StateVector out = zero_state(psi.spec, nullptr);
    const BasisCode mask = BasisCode{1} << bit;
    const std::size_t dim = out.amplitudes.size();
    if (op.axis == Axis::x) {
        for (std::size_t c = 0; c < dim; ++c) {
            out.amplitudes[c] = 0.5 * full.amplitudes[c ^ mask];
        }
    } else {
        // S^y |up> = +i/2 |down>, S^y |down> = -i/2 |up>
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t src = c ^ mask;
            const double im = ((src >> bit) & 1) ? 0.5 : -0.5;
            out.amplitudes[c] = Amplitude{0.0, im} * full.amplitudes[src];
        }
    }
    return out;
}

namespace {

std::pair<double, double> lanczos_extremes(const HamiltonianOp& h, int max_iter) {
    const std::size_t dim = h.dimension();
    std::mt19937_64 rng(0x5eed0b0bULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dim), v_prev(dim, 0.0), w(dim);
    for (auto& x : v) x = gauss(rng);
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (auto& x : v) x /= nrm;

    std::vector<double> alpha, beta;
    double beta_prev = 0.0;
    const double tiny = 1e-10 * std::max(1.0, h.certified_norm_bound());
    for (int k = 0; k < max_iter; ++k) {
        h.apply(v.data(), w.data());
        double a = 0.0;
        for (std::size_t i = 0; i < dim; ++i) a += v[i] * w[i];
        alpha.push_back(a);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= a * v[i] + beta_prev * v_prev[i];
        double b = 0.0;
        for (double x : w) b += x * x;
        b = std::sqrt(b);
        if (b < tiny || k + 1 == max_iter) break;
        beta.push_back(b);
        beta_prev = b;
        std::swap(v_prev, v);
        for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / b;
    }

    const int k = static_cast<int>(alpha.size());
    Eigen::VectorXd diag(k), sub(std::max(k - 1, 0));
    for (int i = 0; i < k; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < k; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(k - 1)};
}

}  // namespace

std::pair<double, double> spectral_bounds(const ChainSpec& spec) {
    using Key = std::tuple<int, double, double>;
    static std::map<Key, std::pair<double, double>> cache;
    static std::mutex cache_mutex;
    const Key key{spec.n_sites, spec.exchange_j, spec.anisotropy_delta};
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    const HamiltonianOp h = HamiltonianOp::full_space(spec);
    const double cap = h.certified_norm_bound();
    std::pair<double, double> bounds{-cap, cap};
    if (spec.dimension() <= kBoundsLanczosMaxDim) {
        const int max_iter = static_cast<int>(
            std::min<std::uint64_t>(spec.dimension(), 100));
        const auto [lo, hi] = lanczos_extremes(h, max_iter);
        const double center = 0.5 * (lo + hi);
        const double half_width = 0.5 * (hi - lo);
        if (half_width > 0.0) {
            bounds.first = std::max(center - 1.01 * half_width, -cap);
            bounds.second = std::min(center + 1.01 * half_width, cap);
        }
    }

    std::lock_guard<std::mutex> lock(cache_mutex);
    cache.emplace(key, bounds);
    return bounds;
}

}  // namespace spinring
