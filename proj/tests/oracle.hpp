#pragma once

// Dense reference implementations used only by the test suite. Everything
// here is built from explicit two-site Kronecker blocks and dense linear
// algebra, deliberately sharing no kernel code with the library's
// matrix-free fast paths.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "spinring/basis.hpp"
#include "spinring/operators.hpp"
#include "spinring/state.hpp"

namespace oracle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Full 2^N Hamiltonian J sum S_i.S_j + Delta sum S^z_i S^z_j over ring bonds.
Matrix dense_hamiltonian(const spinring::ChainSpec& spec);

Matrix dense_local_spin(const spinring::ChainSpec& spec, int site, spinring::Axis axis);

// (1 +/- 2 S^alpha_m)/2
Matrix dense_projector(const spinring::ChainSpec& spec, int site, spinring::Axis axis,
                       spinring::Sign sign);

// exp(-i H t) v via dense eigendecomposition of the Hermitian matrix H.
Vector dense_evolve(const Matrix& hamiltonian, double t, const Vector& v);

// Nonselective measurement of S^alpha_m on the pure state psi, evaluated
// literally on the density matrix: rho' = sum_s P_s rho P_s, returning
// Tr[S^beta_l rho'].
double mixture_expectation(const spinring::ChainSpec& spec, const Vector& psi, int m_site,
                           spinring::Axis m_axis, int l_site, spinring::Axis l_axis);

// Conversions between library states (full space) and dense vectors.
Vector to_dense(const spinring::StateVector& psi);
spinring::StateVector from_dense(const spinring::ChainSpec& spec, const Vector& v);

Vector random_vector(std::uint64_t dim, std::uint64_t seed);

}  // namespace oracle
