#include "spinring/measurement.hpp"

#include <cmath>
#include <string>

namespace spinring {

namespace {

void require_normalized(const StateVector& psi) {
    psi.check_consistent();
    // tolerance sits above the norm drift a long Chebyshev run accumulates
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
        throw ContractViolation("measurement requires a normalized state");
    }
}

std::string projector_text(const ProjectorSpec& p) {
    return std::string("P[site ") + std::to_string(p.site) + ", " + axis_label(p.axis) +
           sign_label(p.sign) + "]";
}

// Unnormalized (1 +- 2 S^alpha_m)/2 psi.
StateVector apply_projector(const StateVector& psi, const ProjectorSpec& p) {
    const int bit = psi.spec.bit_of_site(p.site);
    const bool keep_up = p.sign == Sign::plus;

    if (p.axis == Axis::z) {
        // diagonal: keeps the component with the selected spin at the site
        StateVector out = psi;
        if (psi.sector) {
            const auto& codes = psi.sector->member_codes;
            for (std::size_t r = 0; r < codes.size(); ++r) {
                if ((((codes[r] >> bit) & 1) != 0) != keep_up) out.amplitudes[r] = 0.0;
            }
        } else {
            for (std::size_t c = 0; c < psi.amplitudes.size(); ++c) {
                if ((((c >> bit) & 1) != 0) != keep_up) out.amplitudes[c] = 0.0;
            }
        }
        return out;
    }

    const StateVector spun = apply_local_spin({p.site, p.axis}, psi);  // full space
    const StateVector full = psi.sector ? embed_full(psi) : psi;
    StateVector out = spun;
    const double s = keep_up ? 1.0 : -1.0;
    for (std::size_t c = 0; c < out.amplitudes.size(); ++c) {
        out.amplitudes[c] = 0.5 * full.amplitudes[c] + s * spun.amplitudes[c];
    }
    return out;
}

}  // namespace

MeasurementOutcome project(const StateVector& psi, const ProjectorSpec& p) {
    require_normalized(psi);
    StateVector branch = apply_projector(psi, p);
    const double probability = branch.norm_squared();
    if (probability < kProbabilityFloor) {
        throw ImpossibleOutcomeError(
            projector_text(p) + " has probability " + std::to_string(probability) +
                " below the floor",
            probability);
    }
    branch.normalize();
    return MeasurementOutcome{std::move(branch), probability, p};
}

std::vector<MeasurementOutcome> measure_nonselective(const StateVector& psi, int site,
                                                     Axis axis) {
    require_normalized(psi);
    std::vector<MeasurementOutcome> outcomes;
    outcomes.reserve(2);
    for (const Sign sign : {Sign::plus, Sign::minus}) {
        const ProjectorSpec p{site, axis, sign};
        StateVector branch = apply_projector(psi, p);
        const double probability = branch.norm_squared();
        if (probability < kProbabilityFloor) {
            // zero-state marker instead of dividing by ~0
            for (auto& a : branch.amplitudes) a = 0.0;
        } else {
            branch.normalize();
        }
        outcomes.push_back(MeasurementOutcome{std::move(branch), probability, p});
    }
    return outcomes;
}

std::vector<MeasurementOutcome> zeno_sequence(const StateVector& psi0, const ChainSpec& spec,
                                              const ProjectorSpec& p,
                                              const std::vector<double>& times,
                                              const PropagatorConfig& cfg) {
    require_normalized(psi0);
    if (times.empty()) throw DomainError("zeno_sequence needs at least one event time");
    if (times.front() < 0.0) throw DomainError("event times start from t = 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw DomainError("event times must be strictly increasing");
        }
    }

    // x/y projections leave any S^z sector, so those sequences run in the
    // full space from the start.
    StateVector psi = (p.axis == Axis::z || !psi0.sector) ? psi0 : embed_full(psi0);
    HamiltonianOp op = psi.sector ? HamiltonianOp::sector_restricted(spec, psi.sector)
                                  : HamiltonianOp::full_space(spec);
    ChebyshevPropagator prop(std::move(op), cfg);

    std::vector<MeasurementOutcome> trajectory;
    trajectory.reserve(times.size());
    double t_now = 0.0;
    for (const double t_event : times) {
        prop.advance(psi, t_event - t_now);
        t_now = t_event;
        MeasurementOutcome outcome = project(psi, p);
        psi = outcome.state;
        trajectory.push_back(std::move(outcome));
    }
    return trajectory;
}

}  // namespace spinring
