#pragma once

#include "nhmps/linalg.hpp"
#include "nhmps/models.hpp"
#include "nhmps/mps.hpp"

namespace nhmps {

// Which extremal eigenstate of a non-Hermitian spectrum is meant: smallest
// real part or smallest imaginary part (ties broken by the other component).
enum class Which { SR, SI };

// Dense many-body Hamiltonian on the full Fock space. Basis state b encodes
// occupations by bits, site m = bit m (site 0 least significant), matching
// dense_amplitudes and mpo_dense. Jordan-Wigner signs are applied relative
// to the site ordering a_1, b_1, a_2, b_2, ...
struct FockMatrix {
  std::size_t n_sites = 0;
  Tensor matrix;  // (2^n, 2^n)
};

// Builds the many-body matrix for the model directly from fermionic rules
// (independent of the MPO construction). Capped at 14 sites.
FockMatrix build_dense(const ModelSpec& spec);

// Full eigendecomposition. The model conserves particle number, so the
// matrix splits into occupation-number sectors which are solved densely one
// at a time; values from all sectors are merged and sorted by (Re, Im).
struct EdSpectrum {
  struct Sector {
    std::size_t n_particles = 0;
    std::vector<std::size_t> basis;  // Fock indices spanning the sector
    DenseEig eig;
  };
  struct Entry {
    cplx value;
    std::size_t sector = 0;  // index into sectors
    std::size_t column = 0;  // eigenvector column within the sector
  };

  std::size_t n_sites = 0;
  std::vector<Sector> sectors;
  std::vector<Entry> entries;  // sorted by (Re, Im)
  double max_condition = 0.0;
  bool defective = false;  // some sector's eigenbasis has condition > 1e12

  std::vector<cplx> values() const;
  std::vector<cplx> right_vector(std::size_t entry) const;  // full Fock space
  // Left eigenvector as a ket: H^dag |l> = conj(lambda) |l>. Throws when the
  // entry's sector is defective (no trustworthy biorthogonal partners).
  std::vector<cplx> left_vector(std::size_t entry) const;
};

EdSpectrum full_spectrum(const FockMatrix& fm);

// Indices of the spectrum entries degenerate with the extremal one, and that
// extremal eigenvalue. Degeneracy tolerance is 1e-9 * max(1, spectral radius).
struct GroundSelection {
  cplx value;
  std::vector<std::size_t> entries;
};
GroundSelection select_ground(const EdSpectrum& spectrum, Which which);

// Energy distance and state infidelity of an MPS against the extremal
// eigenstate. The energy is the normalized quadratic form <psi|H|psi>;
// the infidelity compares against the full degenerate eigenspace,
//   I = | 1 - sum_i |<q_i|psi>|^2 |
// with {q_i} an orthonormal basis of that eigenspace, which reduces to
// |1 - |<phi|psi>|^2| when the level is simple.
struct CompareResult {
  double delta_e = 0.0;
  double infidelity = 0.0;
  cplx e_mps;
  cplx e_ed;
};

CompareResult compare(const Mps& state, const FockMatrix& fm, const EdSpectrum& spectrum,
                      Which which);
CompareResult compare(const Mps& state, const FockMatrix& fm, Which which);

}  // namespace nhmps
