#include "spinring/propagate.hpp"

#include <cmath>
#include <string>

namespace spinring {

namespace {

constexpr double kRescaleGuard = 1e250;

// Downward (Miller) recurrence normalized with J_0 + 2*sum J_2k = 1. The
// start index sits well above both n_max and the turning point x so the
// minimal solution is purified before any returned order is reached.
std::vector<double> miller_sequence(int n_max, double x) {
    std::vector<double> bes(n_max + 1, 0.0);
    if (x == 0.0) {
        bes[0] = 1.0;
        return bes;
    }
    const int base = std::max(n_max, static_cast<int>(std::ceil(x)));
    const int start = base + 10 + static_cast<int>(std::sqrt(40.0 * (base + 2)) + 0.5);

    double j_above = 0.0;   // J~_{k+1}
    double j_cur = 1e-30;   // J~_k, seeded arbitrarily small at k = start
    double even_acc = 0.0;  // sum of J~ at even indices >= 2, same scale
    for (int k = start; k >= 1; --k) {
        const double j_below = (2.0 * k / x) * j_cur - j_above;
        j_above = j_cur;
        j_cur = j_below;  // J~_{k-1}
        const int idx = k - 1;
        if (idx <= n_max) bes[idx] = j_cur;
        if (idx >= 2 && idx % 2 == 0) even_acc += j_cur;
        if (std::abs(j_cur) > kRescaleGuard) {
            const double inv = 1.0 / kRescaleGuard;
            j_above *= inv;
            j_cur *= inv;
            even_acc *= inv;
            for (int i = idx; i <= n_max; ++i) bes[i] *= inv;
        }
    }
    const double norm = j_cur + 2.0 * even_acc;  // j_cur holds J~_0
    const double inv_norm = 1.0 / norm;
    for (auto& b : bes) b *= inv_norm;
    return bes;
}

}  // namespace

std::vector<double> bessel_j_sequence(int n, double x) {
    if (n < 0) throw DomainError("bessel_j_sequence needs n >= 0");
    if (x < 0.0) throw DomainError("bessel_j_sequence needs x >= 0");
    return miller_sequence(n, x);
}

std::vector<Amplitude> chebyshev_coefficients(double tau, bool forward, double cutoff,
                                              int max_order) {
    if (!(cutoff > 0.0) || cutoff > 1e-8) {
        throw DomainError("coefficient cutoff must lie in (0, 1e-8]");
    }
    if (tau < 0.0) throw DomainError("tau must be nonnegative");
    const int cap = max_order > 0 ? max_order : static_cast<int>(10.0 * (tau + 50.0));

    // Find the first order at or past tau where |2 J_n| < cutoff. The scan
    // starts in the decay region to avoid mistaking an oscillatory zero of
    // J_n for convergence.
    int guess = static_cast<int>(std::ceil(tau + 12.0 + 10.0 * std::cbrt(tau + 1.0)));
    std::vector<double> bes;
    int truncation = -1;
    while (true) {
        const int n_max = std::min(guess, cap);
        bes = miller_sequence(n_max, tau);
        for (int n = static_cast<int>(tau); n <= n_max; ++n) {
            if (n >= 1 && 2.0 * std::abs(bes[n]) < cutoff) {
                truncation = n;
                break;
            }
        }
        if (truncation >= 0) break;
        if (n_max == cap) {
            throw PrecisionError(
                "Chebyshev expansion hit the order cap " + std::to_string(cap) +
                    " before reaching the coefficient cutoff",
                2.0 * std::abs(bes[cap]));
        }
        guess *= 2;
    }

    std::vector<Amplitude> coeff(truncation);
    for (int n = 0; n < truncation; ++n) {
        const double scale = (n == 0 ? 1.0 : 2.0) * bes[n];
        // (-i)^n cycles 1, -i, -1, +i; backward evolution conjugates
        Amplitude phase;
        switch (n % 4) {
            case 0: phase = Amplitude{1.0, 0.0}; break;
            case 1: phase = Amplitude{0.0, -1.0}; break;
            case 2: phase = Amplitude{-1.0, 0.0}; break;
            default: phase = Amplitude{0.0, 1.0}; break;
        }
        if (!forward) phase = std::conj(phase);
        coeff[n] = scale * phase;
    }
    return coeff;
}

PropagatorConfig default_propagator_config(const ChainSpec& spec) {
    PropagatorConfig cfg;
    cfg.bounds = spectral_bounds(spec);
    return cfg;
}

std::vector<double> TimeGrid::sample_times() const {
    const long long n_steps = std::llround((t_end - t_start) / dt);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n_steps) + 1);
    for (long long k = 0; k <= n_steps; ++k) {
        times.push_back(t_start + static_cast<double>(k) * dt);
    }
    return times;
}

TimeGrid make_time_grid(double t_start, double t_end, double dt) {
    if (!(dt > 0.0)) throw DomainError("time grid needs dt > 0");
    if (t_end < t_start) throw DomainError("time grid needs t_end >= t_start");
    if (!std::isfinite(t_start) || !std::isfinite(t_end)) {
        throw DomainError("time grid endpoints must be finite");
    }
    return TimeGrid{t_start, t_end, dt};
}

ChebyshevPropagator::ChebyshevPropagator(HamiltonianOp op, PropagatorConfig cfg)
    : op_(std::move(op)), cfg_(cfg) {
    if (!(cfg_.coefficient_cutoff > 0.0) || cfg_.coefficient_cutoff > 1e-8) {
        throw DomainError("coefficient cutoff must lie in (0, 1e-8]");
    }
    if (!(cfg_.bounds.first < cfg_.bounds.second)) {
        throw DomainError("propagator bounds must satisfy e_min < e_max");
    }
}

void ChebyshevPropagator::advance(StateVector& psi, double delta_t) {
    psi.check_consistent();
    if (psi.amplitudes.size() != op_.dimension() ||
        psi.spec.n_sites != op_.spec().n_sites ||
        (psi.sector != nullptr) != (op_.sector() != nullptr)) {
        throw ContractViolation("state basis does not match the propagator's operator");
    }
    if (delta_t == 0.0) {
        last_order_ = 0;
        return;
    }

    const double center = 0.5 * (cfg_.bounds.first + cfg_.bounds.second);
    const double half_width = 0.5 * (cfg_.bounds.second - cfg_.bounds.first);
    const double tau = half_width * std::abs(delta_t);
    const bool forward = delta_t > 0.0;
    const std::vector<Amplitude> coeff =
        chebyshev_coefficients(tau, forward, cfg_.coefficient_cutoff, cfg_.max_order);
    last_order_ = static_cast<int>(coeff.size()) - 1;

    const std::size_t dim = op_.dimension();
    const double inv_hw = 1.0 / half_width;
    const double shift = -center * inv_hw;
    t_prev_.assign(psi.amplitudes.begin(), psi.amplitudes.end());
    t_cur_.resize(dim);
    t_next_.resize(dim);
    acc_.resize(dim);

    for (std::size_t i = 0; i < dim; ++i) acc_[i] = coeff[0] * t_prev_[i];
    if (coeff.size() > 1) {
        op_.apply(t_prev_.data(), t_cur_.data(), inv_hw, shift);  // T_1 = Htilde psi
        const Amplitude c1 = coeff[1];
        for (std::size_t i = 0; i < dim; ++i) acc_[i] += c1 * t_cur_[i];
    }
    for (std::size_t n = 2; n < coeff.size(); ++n) {
        op_.apply(t_cur_.data(), t_next_.data(), 2.0 * inv_hw, 2.0 * shift);
        const Amplitude cn = coeff[n];
        for (std::size_t i = 0; i < dim; ++i) {
            t_next_[i] -= t_prev_[i];
            acc_[i] += cn * t_next_[i];
        }
        std::swap(t_prev_, t_cur_);
        std::swap(t_cur_, t_next_);
    }

    const Amplitude global_phase = std::exp(Amplitude{0.0, -center * delta_t});
    for (std::size_t i = 0; i < dim; ++i) psi.amplitudes[i] = global_phase * acc_[i];
}

StateVector ChebyshevPropagator::evolve(const StateVector& psi, double delta_t) {
    StateVector out = psi;
    advance(out, delta_t);
    return out;
}

StateVector evolve(const StateVector& psi, const ChainSpec& spec, double delta_t,
                   const PropagatorConfig& cfg) {
    if (spec.n_sites != psi.spec.n_sites) {
        throw ContractViolation("state dimension does not match the chain spec");
    }
    HamiltonianOp op = psi.sector ? HamiltonianOp::sector_restricted(spec, psi.sector, 0)
                                  : HamiltonianOp::full_space(spec);
    ChebyshevPropagator prop(std::move(op), cfg);
    return prop.evolve(psi, delta_t);
}

void evolve_through_grid(StateVector& psi, const TimeGrid& grid, ChebyshevPropagator& prop,
                         const std::function<void(double, const StateVector&)>& sampler) {
    const std::vector<double> times = grid.sample_times();
    if (times.empty()) return;
    sampler(times[0], psi);
    for (std::size_t k = 1; k < times.size(); ++k) {
        prop.advance(psi, grid.dt);
        sampler(times[k], psi);
    }
}

}  // namespace spinring
