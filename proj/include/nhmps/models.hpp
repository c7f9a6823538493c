#pragma once

#include "nhmps/mpo.hpp"

namespace nhmps {

enum class Boundary { OBC, PBC };

// Non-Hermitian SSH chain with N two-site unit cells (a_j, b_j):
//
//   H = sum_j [ (t + gamma/2) a_j^dag b_j + (t - gamma/2) b_j^dag a_j ]
//     + sum_j [ a_{j+1}^dag b_j + b_j^dag a_{j+1} ]
//     + u * sum_j [ n^a_j n^b_j + n^b_j n^a_{j+1} ]
//     - mu * sum_m n_m
//
// The asymmetric intra-cell hopping makes H non-Hermitian for gamma != 0;
// |t| = |gamma/2| is an exceptional line of the single-particle problem.
// With periodic boundaries the j+1 sums wrap around.
struct ModelSpec {
  std::size_t n_cells = 1;
  double t = 1.0;
  double gamma = 0.0;
  double u = 0.0;
  double mu = 0.0;
  Boundary boundary = Boundary::OBC;

  std::size_t n_sites() const { return 2 * n_cells; }
};

// MPO over 2N spin-1/2 sites ordered a_1, b_1, a_2, b_2, ... via the
// Jordan-Wigner mapping c_m = (prod_{k<m} Z_k) sigma^-_m, with basis
// |0> = empty, |1> = occupied on every site. Periodic-boundary terms carry
// the Z string between the edges explicitly, so the MPO is exact.
Mpo build_nhssh(const ModelSpec& spec);

// Single-site operators in the occupation basis (|0>, |1>).
Tensor identity2();
Tensor pauli_z();        // diag(1, -1)
Tensor sigma_plus();     // |1><0|
Tensor sigma_minus();    // |0><1|
Tensor number_op();      // diag(0, 1)

}  // namespace nhmps
