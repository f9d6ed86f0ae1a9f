#pragma once

#include <string>
#include <vector>

#include "spinring/operators.hpp"
#include "spinring/state.hpp"

namespace spinring {

// <psi|S^alpha_m|psi>. Sector-tagged states give exact zeros for x and y
// (those operators leave the sector) without touching the full space.
double magnetization(const StateVector& psi, int site, Axis axis);

// <psi|S^alpha_a S^alpha_b|psi>; symmetric in (a, b) exactly; a == b gives
// the spin-1/2 identity 1/4.
double correlation(const StateVector& psi, int site_a, int site_b, Axis axis);

double energy(const StateVector& psi, const ChainSpec& spec);
double energy(const StateVector& psi, const HamiltonianOp& op);

// (1/N) sum_m (-1)^(m-1) <S^z_m>: +1/2 on |up down up down ...>.
double staggered_magnetization(const StateVector& psi);

// sum_m <S^z_m>
double total_sz_expectation(const StateVector& psi);

// <S_tot^2> = sum_alpha ||S^alpha_tot psi||^2; zero on a singlet.
double total_spin_squared(const StateVector& psi);

struct TimeSeriesRecord {
    std::string id;
    std::vector<double> times;
    std::vector<double> values;
};

enum class SpectrumWindow { rectangular, hann };

struct Spectrum {
    std::vector<double> omegas;      // angular frequency in units of J, ascending
    std::vector<double> magnitudes;  // |DFT| of the (windowed) series
    SpectrumWindow window = SpectrumWindow::rectangular;
    bool detrended = true;
};

// Half-spectrum of a uniformly sampled series; omega_k = 2 pi k / (n dt).
Spectrum fourier_spectrum(const TimeSeriesRecord& series,
                          SpectrumWindow window = SpectrumWindow::rectangular,
                          bool detrend = true);

// Argmax magnitude over omega > 0; ties within 1e-12 resolve to the
// smallest omega.
double dominant_frequency(const Spectrum& spectrum);

}  // namespace spinring
