#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "spinring/operators.hpp"
#include "spinring/state.hpp"

namespace spinring {

struct PropagatorConfig {
    // expansion terms with coefficient magnitude below this are dropped;
    // must lie in (0, 1e-8]
    double coefficient_cutoff = 1e-16;
    // (e_min, e_max) containing the full spectrum, from spectral_bounds
    std::pair<double, double> bounds{0.0, 0.0};
    // safety cap on the expansion order; 0 selects 10*(tau + 50) where
    // tau = half_bandwidth * |delta_t|
    int max_order = 0;
};

PropagatorConfig default_propagator_config(const ChainSpec& spec);

struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    double dt = 0.1;

    // t_start + k*dt, ascending, inclusive of both endpoints within dt/2
    std::vector<double> sample_times() const;
};

TimeGrid make_time_grid(double t_start, double t_end, double dt);

// exp(-i H delta_t) via the Chebyshev expansion of the rescaled operator
// Htilde = (2H - (e_max+e_min))/(e_max - e_min), with Bessel-function
// coefficients computed per step. Each instance owns scratch buffers, so
// share instances across calls but not across threads.
class ChebyshevPropagator {
  public:
    ChebyshevPropagator(HamiltonianOp op, PropagatorConfig cfg);

    // psi <- exp(-i H delta_t) psi; negative delta_t evolves backwards
    void advance(StateVector& psi, double delta_t);
    StateVector evolve(const StateVector& psi, double delta_t);

    const HamiltonianOp& op() const { return op_; }
    const PropagatorConfig& config() const { return cfg_; }
    // highest Chebyshev order summed by the most recent advance
    int last_order() const { return last_order_; }

  private:
    HamiltonianOp op_;
    PropagatorConfig cfg_;
    int last_order_ = 0;
    std::vector<Amplitude> t_prev_, t_cur_, t_next_, acc_;
};

// Pure single-shot form; builds the operator matching psi's basis per call.
StateVector evolve(const StateVector& psi, const ChainSpec& spec, double delta_t,
                   const PropagatorConfig& cfg);

// Advances psi across the grid, invoking the sampler at every sample time
// (including t_start before any evolution).
void evolve_through_grid(StateVector& psi, const TimeGrid& grid, ChebyshevPropagator& prop,
                         const std::function<void(double, const StateVector&)>& sampler);

// Coefficients (2 - delta_n0) (-i)^n J_n(tau) for exp(-i tau x), truncated at
// the first order at or past tau whose magnitude falls below cutoff. Exposed
// for the propagator and its tests; J_n values come from Miller's downward
// recurrence with sum normalization.
std::vector<Amplitude> chebyshev_coefficients(double tau, bool forward, double cutoff,
                                              int max_order);

// J_0..J_n at x >= 0 by the same recurrence (test hook).
std::vector<double> bessel_j_sequence(int n, double x);

}  // namespace spinring
