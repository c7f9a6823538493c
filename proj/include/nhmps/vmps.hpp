#pragma once

#include <optional>

#include "nhmps/linalg.hpp"
#include "nhmps/mpo.hpp"
#include "nhmps/mps.hpp"

namespace nhmps {

struct SweepConfig {
  std::size_t bond_dim = 32;
  double tol = 1e-10;        // sweep-to-sweep energy convergence
  std::size_t max_sweeps = 500;
  double eig_tol = 1e-12;    // local eigensolver relative residual
  std::uint64_t seed = 0;
  std::size_t krylov_cap = 200;
};

struct SweepReport {
  double energy = 0.0;                // backward-half average of the last sweep
  std::vector<double> energy_trace;   // one entry per sweep (backward average)
  bool converged = false;
  std::size_t sweeps = 0;
};

// Environments of <state| op |state> around each site: left[i] contracts
// sites [0, i), right[i] contracts sites [i, n). The effective operator at
// site i is built from left[i], op site i, and right[i+1]. Environment
// tensors have axes (bra bond, mpo bond, ket bond).
struct EnvironmentCache {
  std::vector<Tensor> left;   // n + 1 entries
  std::vector<Tensor> right;  // n + 1 entries
};

Tensor transfer_left(const Tensor& env, const Tensor& w, const Tensor& site);
Tensor transfer_right(const Tensor& env, const Tensor& w, const Tensor& site);

EnvironmentCache build_environments(const Mpo& op, const Mps& state);

// One-site effective operator L - W - R acting on site tensors (dl, d, dr).
struct LocalOp {
  const Tensor* l;
  const Tensor* w;
  const Tensor* r;

  std::size_t dim() const;
  Tensor apply(const Tensor& x) const;   // accepts (dl, d, dr) or flat
  Tensor dense() const;                  // rank-2, for small dims / tests
};

LocalOp local_effective_op(const EnvironmentCache& cache, const Tensor& op_site,
                           std::size_t site);

// Variational ground state search for a Hermitian operator: single-site
// sweeps, each local problem solved by warm-started Lanczos, so the energy
// trace is non-increasing. Converges when the forward and backward half-sweep
// energy averages agree to cfg.tol. The bond dimension is fixed by the
// initial state (capped at cfg.bond_dim for the random default).
std::pair<Mps, SweepReport> ground_state(const Mpo& op, const SweepConfig& cfg,
                                         const std::optional<Mps>& init = std::nullopt);

}  // namespace nhmps
