#pragma once

#include <functional>
#include <optional>

#include "nhmps/tensor.hpp"

namespace nhmps {

// --- Isometric splits -------------------------------------------------------
//
// qr_split groups the first `left_axes` axes into rows and the rest into
// columns, computes a thin QR, and returns (Q, R) with
//   Q: left dims + (k,)      left-isometric:  Q^dag Q = 1_k
//   R: (k,) + right dims
// where k = min(row_size, col_size). lq_split is the mirror image: it groups
// the last `right_axes` axes into columns and returns (L, Q) with Q
// right-isometric (Q Q^dag = 1_k over the grouped right axes).

std::pair<Tensor, Tensor> qr_split(const Tensor& t, std::size_t left_axes);
std::pair<Tensor, Tensor> lq_split(const Tensor& t, std::size_t right_axes);

struct SvdResult {
  Tensor u;                 // left dims + (k,)
  std::vector<double> s;    // descending, k entries
  Tensor vh;                // (k,) + right dims
};

// Thin SVD with the first `left_axes` axes grouped as rows.
// Optionally truncated to at most max_rank singular values; values below
// rank_tol * s[0] are dropped as numerical rank deficiency.
SvdResult svd(const Tensor& t, std::size_t left_axes,
              std::size_t max_rank = 0, double rank_tol = 1e-14);

// --- Hermitian extremal eigensolver -----------------------------------------

struct EigResult {
  std::vector<double> values;    // ascending
  std::vector<Tensor> vectors;   // rank-1, unit norm
  bool converged = true;
  std::size_t iterations = 0;
};

using Matvec = std::function<Tensor(const Tensor&)>;

// Lanczos with full reorthogonalization for the k algebraically smallest
// eigenpairs of a Hermitian operator given as a matvec over rank-1 tensors of
// dimension `dim`. The start vector (if given) is the first Krylov vector, so
// the smallest Ritz value can never exceed its Rayleigh quotient: warm starts
// are monotone by construction. On Krylov breakdown the basis is extended
// with a fresh random direction so the iteration can continue past an
// invariant subspace (degenerate copies are only guaranteed when a breakdown
// forces such a restart, as for any Lanczos iteration).
EigResult lanczos_smallest(const Matvec& apply, std::size_t dim, std::size_t k,
                           const std::optional<Tensor>& guess, double tol,
                           std::size_t max_iter = 200, std::uint64_t seed = 1);

// Smallest-k eigenpairs of a dense Hermitian matrix. The input is symmetrized
// internally; it must be Hermitian to 1e-10 (relative) or this throws. Dense
// solve for dim <= 4096, Lanczos above. Throws if Lanczos exhausts its
// iteration cap without reaching tol.
EigResult eigh_smallest(const Tensor& m, std::size_t k,
                        const std::optional<Tensor>& guess = std::nullopt,
                        double tol = 1e-12);

// --- General dense eigendecomposition ---------------------------------------

struct DenseEig {
  std::vector<cplx> values;   // sorted by (Re, Im)
  Tensor right;               // columns follow the sorted order
  Tensor left;                // left eigenvectors (rows act as <l_i|), matched
  double condition = 0.0;     // 1-norm condition of the right eigenvector matrix
  bool defective = false;     // condition > 1e12: eigenbasis unreliable
};

// Full non-Hermitian eigendecomposition of a dense square matrix. Left
// eigenvectors are the rows of the inverse of the right eigenvector matrix,
// so they are exactly biorthogonal to the right columns and matched by
// construction ("l_i^dag r_i = 1" normalization, not unit norm). When the
// right basis is numerically defective no trustworthy inverse exists and
// `left` is left empty, mirroring SingleParticleSolution::s_inv.
DenseEig dense_eig(const Tensor& m);

// --- Determinants in the log domain -----------------------------------------

// log(det) of a square matrix via partially pivoted LU, kept as
// (log magnitude, unit phase) so that products and ratios of determinants
// with huge dynamic range never overflow.
struct LogDet {
  double log_abs = 0.0;       // -inf for a singular matrix
  cplx phase = 1.0;           // unit modulus (0 for a singular matrix)
  cplx value() const;
};

LogDet logdet_lu(const Tensor& m);

// Matrix inverse (square, dense). Throws on (numerically) singular input.
Tensor inverse(const Tensor& m);

}  // namespace nhmps
