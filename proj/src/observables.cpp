#include "spinring/observables.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace spinring {

namespace {

void require_normalized(const StateVector& psi) {
    psi.check_consistent();
    // tolerance sits above the norm drift a long Chebyshev run accumulates
    // (about 1e-12 per 10^4 steps) while still catching genuine errors
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
        throw ContractViolation("observable requires a normalized state");
    }
}

double real_checked(Amplitude value, const char* what) {
    if (std::abs(value.imag()) > 1e-12) {
        throw ContractViolation(std::string(what) + " produced a non-real expectation");
    }
    return value.real();
}

// <psi| S^+_a S^-_b + S^-_a S^+_b |psi>/4 within one S^z sector; equals both
// the xx and the yy correlator there because the sector-changing terms of
// S^x_a S^x_b and S^y_a S^y_b cannot contribute.
double transverse_correlation_in_sector(const StateVector& psi, int bit_a, int bit_b) {
    const auto& codes = psi.sector->member_codes;
    const BasisCode mask = (BasisCode{1} << bit_a) | (BasisCode{1} << bit_b);
    Amplitude acc{0.0, 0.0};
    for (std::size_t r = 0; r < codes.size(); ++r) {
        const BasisCode c = codes[r];
        const int ba = static_cast<int>((c >> bit_a) & 1);
        const int bb = static_cast<int>((c >> bit_b) & 1);
        if (ba == bb) continue;
        const std::size_t partner = combinadic_rank(c ^ mask);
        acc += std::conj(psi.amplitudes[partner]) * psi.amplitudes[r];
    }
    return real_checked(acc, "transverse correlation") / 4.0;
}

}  // namespace

double magnetization(const StateVector& psi, int site, Axis axis) {
    require_normalized(psi);
    const int bit = psi.spec.bit_of_site(site);

    if (axis == Axis::z) {
        double acc = 0.0;
        if (psi.sector) {
            const auto& codes = psi.sector->member_codes;
            for (std::size_t r = 0; r < codes.size(); ++r) {
                const double w = std::norm(psi.amplitudes[r]);
                acc += (((codes[r] >> bit) & 1) ? 0.5 : -0.5) * w;
            }
        } else {
            for (std::size_t c = 0; c < psi.amplitudes.size(); ++c) {
                const double w = std::norm(psi.amplitudes[c]);
                acc += (((c >> bit) & 1) ? 0.5 : -0.5) * w;
            }
        }
        return acc;
    }

    // S^x and S^y map a fixed-S^z state into orthogonal sectors
    if (psi.sector) return 0.0;

    const StateVector spun = apply_local_spin({site, axis}, psi);
    return real_checked(inner_product(psi, spun), "magnetization");
}

double correlation(const StateVector& psi, int site_a, int site_b, Axis axis) {
    require_normalized(psi);
    if (site_b < site_a) std::swap(site_a, site_b);  // exact (a,b) symmetry
    const int bit_a = psi.spec.bit_of_site(site_a);
    const int bit_b = psi.spec.bit_of_site(site_b);
    if (site_a == site_b) return 0.25;

    if (axis == Axis::z) {
        double acc = 0.0;
        if (psi.sector) {
            const auto& codes = psi.sector->member_codes;
            for (std::size_t r = 0; r < codes.size(); ++r) {
                const BasisCode c = codes[r];
                const bool equal = (((c >> bit_a) ^ (c >> bit_b)) & 1) == 0;
                acc += (equal ? 0.25 : -0.25) * std::norm(psi.amplitudes[r]);
            }
        } else {
            for (std::size_t c = 0; c < psi.amplitudes.size(); ++c) {
                const bool equal = (((c >> bit_a) ^ (c >> bit_b)) & 1) == 0;
                acc += (equal ? 0.25 : -0.25) * std::norm(psi.amplitudes[c]);
            }
        }
        return acc;
    }

    if (psi.sector) return transverse_correlation_in_sector(psi, bit_a, bit_b);

    const StateVector inner = apply_local_spin({site_b, axis}, psi);
    const StateVector outer = apply_local_spin({site_a, axis}, inner);
    return real_checked(inner_product(psi, outer), "correlation");
}

double energy(const StateVector& psi, const ChainSpec& spec) {
    require_normalized(psi);
    return real_checked(inner_product(psi, apply_hamiltonian(spec, psi)), "energy");
}

double energy(const StateVector& psi, const HamiltonianOp& op) {
    require_normalized(psi);
    return real_checked(inner_product(psi, op.apply_to_state(psi)), "energy");
}

double staggered_magnetization(const StateVector& psi) {
    require_normalized(psi);
    const int n = psi.spec.n_sites;
    // odd sites (1,3,...) sit on even bits and enter with +1
    const BasisCode dim_mask = psi.spec.dimension() - 1;
    const BasisCode even_bits = BasisCode{0x5555555555555555ULL} & dim_mask;
    const BasisCode odd_bits = BasisCode{0xAAAAAAAAAAAAAAAAULL} & dim_mask;

    double acc = 0.0;
    auto per_code = [&](BasisCode c, double w) {
        const int diff = std::popcount(c & even_bits) - std::popcount(c & odd_bits);
        acc += w * diff;
    };
    if (psi.sector) {
        const auto& codes = psi.sector->member_codes;
        for (std::size_t r = 0; r < codes.size(); ++r) {
            per_code(codes[r], std::norm(psi.amplitudes[r]));
        }
    } else {
        for (std::size_t c = 0; c < psi.amplitudes.size(); ++c) {
            per_code(c, std::norm(psi.amplitudes[c]));
        }
    }
    return acc / n;
}

double total_sz_expectation(const StateVector& psi) {
    require_normalized(psi);
    if (psi.sector) return psi.sector->total_sz();
    const double half_n = psi.spec.n_sites / 2.0;
    double acc = 0.0;
    for (std::size_t c = 0; c < psi.amplitudes.size(); ++c) {
        acc += (std::popcount(c) - half_n) * std::norm(psi.amplitudes[c]);
    }
    return acc;
}

double total_spin_squared(const StateVector& psi) {
    require_normalized(psi);
    const StateVector full = psi.sector ? embed_full(psi) : psi;
    const int n = full.spec.n_sites;
    const std::size_t dim = full.amplitudes.size();
    const double half_n = n / 2.0;

    // z: diagonal
    double acc = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        const double sz = std::popcount(c) - half_n;
        acc += sz * sz * std::norm(full.amplitudes[c]);
    }

    // x: (S^x_tot psi)[c] = (1/2) sum_m psi[c ^ bit_m]
    double xx = 0.0, yy = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        Amplitude sx{0.0, 0.0};
        Amplitude sy{0.0, 0.0};
        for (int m = 0; m < n; ++m) {
            const Amplitude src = full.amplitudes[c ^ (std::size_t{1} << m)];
            sx += src;
            // the source code has the complement of c's bit at m; an up
            // source contributes +i/2, a down source -i/2
            if ((c >> m) & 1) {
                sy -= Amplitude{0.0, 1.0} * src;
            } else {
                sy += Amplitude{0.0, 1.0} * src;
            }
        }
        xx += 0.25 * std::norm(sx);
        yy += 0.25 * std::norm(sy);
    }
    return acc + xx + yy;
}

Spectrum fourier_spectrum(const TimeSeriesRecord& series, SpectrumWindow window,
                          bool detrend) {
    const std::size_t n = series.values.size();
    if (series.times.size() != n) {
        throw ContractViolation("time series lengths differ");
    }
    if (n < 2) throw DomainError("spectrum needs at least two samples");
    const double dt = series.times[1] - series.times[0];
    if (!(dt > 0.0)) throw ContractViolation("time series must be ascending");
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double step = series.times[k + 1] - series.times[k];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(series.times[k + 1]))) {
            throw ContractViolation("spectrum requires a uniform time grid");
        }
    }

    std::vector<double> in(series.values);
    if (detrend) {
        double mean = 0.0;
        for (double v : in) mean += v;
        mean /= static_cast<double>(n);
        for (double& v : in) v -= mean;
    }
    if (window == SpectrumWindow::hann) {
        for (std::size_t k = 0; k < n; ++k) {
            in[k] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                           static_cast<double>(n - 1)));
        }
    }

    std::vector<std::complex<double>> out(n / 2 + 1);
    {
        static std::mutex plan_mutex;  // FFTW planning is not thread-safe
        std::unique_lock<std::mutex> lock(plan_mutex);
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()),
                                              FFTW_ESTIMATE);
        lock.unlock();
        fftw_execute(plan);
        lock.lock();
        fftw_destroy_plan(plan);
    }

    Spectrum spectrum;
    spectrum.window = window;
    spectrum.detrended = detrend;
    spectrum.omegas.reserve(out.size());
    spectrum.magnitudes.reserve(out.size());
    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    for (std::size_t k = 0; k < out.size(); ++k) {
        spectrum.omegas.push_back(d_omega * static_cast<double>(k));
        spectrum.magnitudes.push_back(std::abs(out[k]));
    }
    return spectrum;
}

double dominant_frequency(const Spectrum& spectrum) {
    if (spectrum.omegas.size() < 2) {
        throw DomainError("spectrum has no positive-frequency bins");
    }
    double best_mag = -1.0;
    double best_omega = 0.0;
    for (std::size_t k = 1; k < spectrum.omegas.size(); ++k) {
        if (spectrum.magnitudes[k] > best_mag + 1e-12) {
            best_mag = spectrum.magnitudes[k];
            best_omega = spectrum.omegas[k];
        }
    }
    return best_omega;
}

}  // namespace spinring
