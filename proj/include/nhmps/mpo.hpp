#pragma once

#include "nhmps/mps.hpp"
#include "nhmps/tensor.hpp"

namespace nhmps {

// Matrix product operator. Site tensors have axes
//   (left bond, physical out, physical in, right bond)
// and the edge bonds have dimension 1.
//
// Every operator built here is kept in finite-state-machine form with two
// distinguished bond states: index 0 ("idle") propagates the identity in from
// the left edge, and the last index ("done") propagates the identity out to
// the right edge. Each term of the operator leaves idle exactly once, at the
// leftmost site of its support. All functions in this header preserve that
// structure, which is what makes mpo_shift_site exact: subtracting eps from
// the idle-row/done-column entry of any single site shifts the whole operator
// by -eps * identity.
struct Mpo {
  std::vector<Tensor> sites;

  std::size_t n_sites() const { return sites.size(); }
  std::size_t phys_dim(std::size_t i) const { return sites[i].dim(1); }
  std::size_t bond_dim(std::size_t i) const { return sites[i].dim(3); }
  std::size_t max_bond_dim() const;
};

Mpo identity_mpo(std::size_t n_sites, std::size_t phys_dim);

// Element-wise Hermitian conjugate: swaps the physical axes and conjugates.
Mpo mpo_adjoint(const Mpo& op);

// op - eps * identity, realized by modifying only the tensor at `site`.
Mpo mpo_shift(const Mpo& op, cplx eps, std::size_t site = 0);

// In-place single-site version of mpo_shift for hot loops.
void mpo_shift_site(Tensor& w, cplx eps);

// Operator product a * b (b acts first). Bond dimensions multiply.
Mpo mpo_compose(const Mpo& a, const Mpo& b);

// Tensor-train rounding: drops per-bond singular values below
// rank_tol * s_max, removing the exact rank redundancy that mpo_compose and
// mpo_add leave behind. The result represents the same operator (to roundoff
// at the default tolerance) but is no longer in finite-state-machine form, so
// structural edits like mpo_shift_site must happen before compressing.
Mpo mpo_compress(const Mpo& op, double rank_tol = 1e-12);

// Site tensor of the composition, for composing one site at a time.
Tensor mpo_compose_site(const Tensor& wa, const Tensor& wb);

// ca * a + cb * b, merging the idle and done states so the result is again in
// finite-state-machine form.
Mpo mpo_add(const Mpo& a, const Mpo& b, cplx ca, cplx cb);

// Uniform rescaling op -> c * op (applied to the idle-exit transitions at
// every site, preserving the finite-state-machine structure).
Mpo mpo_scale(const Mpo& op, cplx c);

// (op + op^dag) / 2 and (op - op^dag) / (2i); both results are Hermitian, and
// op = hermitian_part + i * antihermitian_part.
Mpo hermitian_part(const Mpo& op);
Mpo antihermitian_part(const Mpo& op);

// op -> exp(i * (theta - pi)) * op. theta = pi is the identity; theta = pi/2
// maps op to -i * op, turning smallest-imaginary-part eigenstates of op into
// smallest-real-part eigenstates of the result.
Mpo spectral_rotation(const Mpo& op, double theta);

// Dense matrix (rank 2) of the operator; basis index sum_m q_m d^m (site 0
// varies fastest). Guarded to dimension <= 2^13.
Tensor mpo_dense(const Mpo& op);

// <bra| op |ket>, unnormalized.
cplx expectation(const Mps& bra, const Mpo& op, const Mps& ket);

// <state| op |state> / <state|state>.
cplx expectation(const Mps& state, const Mpo& op);

}  // namespace nhmps
