#pragma once

#include <optional>
#include <string>

#include "nhmps/tensor.hpp"

namespace nhmps {

// Matrix product state. Site tensors have axes (left bond, physical, right
// bond); the first and last bonds are dimension 1. `center` is the canonical
// center if the state is in mixed canonical form.
struct Mps {
  std::vector<Tensor> sites;
  std::optional<std::size_t> center;

  std::size_t n_sites() const { return sites.size(); }
  std::size_t phys_dim(std::size_t i) const { return sites[i].dim(1); }
  // Bond between sites i and i+1.
  std::size_t bond_dim(std::size_t i) const { return sites[i].dim(2); }
  std::size_t max_bond_dim() const;
};

// Random state (Gaussian entries), brought to canonical form with center at
// site 0 and normalized. Bond dimensions are capped both by `bond_dim` and by
// the exactly representable d^k growth from either edge.
Mps random_mps(std::size_t n_sites, std::size_t phys_dim, std::size_t bond_dim,
               std::uint64_t seed);

// Mixed canonical form with the given center site: strictly left of the
// center every site is a left isometry, strictly right a right isometry.
// The represented state (including its norm) is unchanged.
Mps canonicalize(const Mps& state, std::size_t center);

double norm(const Mps& state);
Mps normalized(const Mps& state);

// <a|b> (a enters conjugated).
cplx overlap(const Mps& a, const Mps& b);

// <psi| op_site |psi> / <psi|psi> for a single-site operator (d x d matrix).
cplx single_site_expectation(const Mps& state, std::size_t site, const Tensor& op);

struct EntropyProfile {
  std::vector<double> cut_entropies;  // one per bond cut, left to right
  double max_entropy = 0.0;
};

// Von Neumann entanglement entropy (natural log) across every cut, from one
// left-to-right sweep of Schmidt decompositions. Squared Schmidt values below
// 1e-14 are dropped. Requires a normalized state (|<psi|psi> - 1| <= 1e-8).
EntropyProfile entropy_profile(const Mps& state);

// Spatial reflection: site i of the result is site n-1-i of the input with
// its bond axes swapped. For states of fixed particle number this equals the
// reflected fermionic state up to a global phase.
Mps apply_parity_reflection(const Mps& state);

// Dense amplitude vector; basis index sum_m q_m d^m (site 0 varies fastest).
// Guarded to at most 2^20 amplitudes.
std::vector<cplx> dense_amplitudes(const Mps& state);

// Binary serialization with a format/version tag; load rejects other tags.
void save_mps(const Mps& state, const std::string& path);
Mps load_mps(const std::string& path);

}  // namespace nhmps
