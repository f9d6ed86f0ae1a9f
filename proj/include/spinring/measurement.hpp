#pragma once

#include <vector>

#include "spinring/operators.hpp"
#include "spinring/propagate.hpp"
#include "spinring/state.hpp"

namespace spinring {

// P^{+-alpha}_m = (1 +- 2 S^alpha_m)/2 on site m.
struct ProjectorSpec {
    int site;
    Axis axis;
    Sign sign;
};

struct MeasurementOutcome {
    StateVector state;   // normalized branch, or all-zero marker (see below)
    double probability;  // squared norm of the unnormalized projection
    ProjectorSpec projector;
};

// Outcomes with probability below this are physically absent; selecting one
// is an error, and nonselective measurements mark the branch with an all-zero
// state instead of dividing by ~0.
inline constexpr double kProbabilityFloor = 1e-14;

// Selective measurement: project, record the probability, renormalize.
// z-projections keep a sector tag; x/y results live in the full space.
MeasurementOutcome project(const StateVector& psi, const ProjectorSpec& p);

// Both outcomes of measuring S^alpha at `site`; probabilities sum to one.
std::vector<MeasurementOutcome> measure_nonselective(const StateVector& psi, int site,
                                                     Axis axis);

// Repeated identical measurement: evolve to each time in `times` (strictly
// increasing, from t = 0) and project selectively with `p`. Entry k of the
// result holds the state right after event k and that event's probability.
std::vector<MeasurementOutcome> zeno_sequence(const StateVector& psi0, const ChainSpec& spec,
                                              const ProjectorSpec& p,
                                              const std::vector<double>& times,
                                              const PropagatorConfig& cfg);

}  // namespace spinring
