#pragma once

#include "nhmps/linalg.hpp"
#include "nhmps/models.hpp"

namespace nhmps {

// Single-particle (quadratic) solution of the free model: H = c^dag M c with
// M the 2N x 2N hopping matrix. Right modes are the columns of s; the
// biorthogonal left modes are the rows of s_inv. Eigenvalues are sorted by
// (Re, Im), so the p-particle smallest-real-part eigenstate fills the first
// p modes.
struct SingleParticleSolution {
  std::size_t n_cells = 0;
  Tensor m;
  std::vector<cplx> lambdas;
  Tensor s;
  Tensor s_inv;       // empty when defective
  double condition = 0.0;
  bool defective = false;
};

// Requires spec.u == 0.
SingleParticleSolution solve_single_particle(const ModelSpec& spec);

// Sum of the p smallest-(Re, Im) eigenvalues: the smallest-real-part
// many-body eigenvalue in the p-particle sector.
cplx many_body_energy(const SingleParticleSolution& sol, std::size_t p);

struct DistributionResult {
  std::size_t p = 0;
  std::vector<double> n_site;  // <n_m> on the right eigenstate, 2N entries
  std::vector<double> n_cell;  // per unit cell, n_site[2j] + n_site[2j+1]
};

// Particle distribution of the p-particle smallest-real-part right
// eigenstate, evaluated from determinant ratios of the mode overlap matrix:
// with A the first p columns of s and G = A^dag A,
//
//   <n_m> = sum_{i,j} (-1)^{i+j} conj(A_mi) A_mj det(minor_ij(G - a_m^dag a_m))
//           / det(G),
//
// where a_m is row m of A. Determinants are carried as (log magnitude,
// phase) through LU so that the huge dynamic range of non-normalized
// biorthogonal modes never overflows. Refuses defective mode matrices.
DistributionResult particle_distribution(const SingleParticleSolution& sol, std::size_t p);

// Same distribution summed the slow way over all C(2N, p) occupation
// patterns, |det(rows of A)|^2 weights. Exponential cost; limited to 12
// sites. Exists as an independent cross-check of particle_distribution.
DistributionResult particle_distribution_brute(const SingleParticleSolution& sol,
                                               std::size_t p);

// Max deviation over cells of the particle-hole/reflection relation
// n_cell[i] at filling p  ==  2 - n_cell[N-1-i] at filling 2N-p.
double distribution_symmetry_check(const SingleParticleSolution& sol, std::size_t p);

// Normalized left-right overlap of the p-particle smallest-real-part
// eigenstate: |<l|r>| / sqrt(<l|l><r|r>) = 1 / sqrt(det(A^dag A) det(C^dag C))
// with A the filled right modes and C the matching biorthogonal left modes.
double biorthogonal_overlap(const SingleParticleSolution& sol, std::size_t p);

// Chemical potential that pins the smallest-real-part ground state at
// exactly p particles: the midpoint between the p-th and (p+1)-th mode
// energies (real parts) of a mu = 0 solution.
double pinning_mu(const SingleParticleSolution& sol, std::size_t p);

}  // namespace nhmps
