#pragma once

#include "nhmps/ed.hpp"
#include "nhmps/vmps.hpp"

namespace nhmps {

// Right eigenstates of a non-Hermitian operator H are found variationally
// through the companion Hermitian operator
//
//   G(H, eps) = (H^dag - eps*)(H - eps),
//
// whose ground energy eta equals the squared smallest singular value of
// H - eps: eta is zero exactly when eps is in the spectrum of H, and the
// ground state of G is then the corresponding right eigenstate. hvmps solves
// G at a known eps; gvmps additionally descends eps toward an eigenvalue
// starting from the lower bound tau = min eig (H + H^dag)/2, which can never
// exceed the real part of any eigenvalue.

struct GvmpsState {
  cplx epsilon;
  double alpha = 1.0;
  cplx g_prev = 0.0;
};

struct SolverReport {
  cplx epsilon;                      // final eigenvalue estimate
  // Ground energy of G at the final epsilon. Mathematically non-negative;
  // reported raw, so values at the working precision floor may be slightly
  // negative.
  double eta = 0.0;
  std::vector<cplx> epsilon_trace;   // per sweep
  std::vector<double> alpha_trace;   // per sweep
  std::vector<double> eta_trace;     // per sweep (backward-half average)
  std::vector<cplx> e_trace;         // per sweep backward-half <H> average
  bool converged = false;
  bool degenerate = false;           // see solve_si_ground
  std::size_t sweeps = 0;
};

// Dense helpers on explicit matrices (h rank 2, x rank 1). e(x) is the
// Rayleigh quotient <x|H|x>/<x|x>. residual_norm is the quadratic form
// <x|G(H, e(x))|x>, i.e. the squared residual |H x - e x|^2 for unit x; its
// exact conjugate-coordinate gradient is residual_gradient, with no extra
// projection terms because <x|(H - e(x))|x> vanishes identically.
cplx rayleigh_quotient(const Tensor& h, const Tensor& x);
double residual_norm(const Tensor& h, const Tensor& x);
Tensor residual_gradient(const Tensor& h, const Tensor& x);

// Conjugate-coordinate gradients of Re e(x) and Im e(x):
//   [(H + H^dag)/2 - Re e] x / <x|x>   and   [(H - H^dag)/2i - Im e] x / <x|x>.
Tensor energy_re_gradient(const Tensor& h, const Tensor& x);
Tensor energy_im_gradient(const Tensor& h, const Tensor& x);

// Lower bound tau <= min Re(spectrum of h): the variational ground energy of
// the Hermitian part. The MPO overload solves it with ground_state; the dense
// overload diagonalizes exactly.
double tau_lower_bound(const Mpo& h, const SweepConfig& cfg);
double tau_lower_bound(const Tensor& h);

// Ground state of G(H, eps) at fixed eps. Environments are built once from
// the eps-independent composition H^dag H; the shift enters only through the
// local site tensor, so moving the center never invalidates the caches.
std::pair<Mps, SolverReport> hvmps(const Mpo& h, cplx epsilon, const SweepConfig& cfg,
                                   const std::optional<Mps>& init = std::nullopt);

// Joint search for the smallest-real-part eigenpair: sweeps on G alternate
// with damped updates eps -= alpha * (eps - e_b), where e_b is the
// backward-half average of the local <H> estimates. alpha halves when the
// real part of the gradient flips sign and grows by 1.1 otherwise; updates
// are gated on the half-sweep averages agreeing to 10 * cfg.tol, and the
// search stops when |eps - e_b| < cfg.tol.
std::pair<Mps, SolverReport> gvmps(const Mpo& h, const SweepConfig& cfg,
                                   const std::optional<Mps>& init = std::nullopt);

// Smallest-imaginary-part eigenpair of h, obtained by running gvmps on the
// rotated operator -i h (spectral_rotation with theta = pi/2) and mapping the
// eigenvalue estimates back through multiplication by i. Sets `degenerate`
// when the real spectral spread of -i h (bounded via tau both ways) is below
// 1e-8, i.e. when every eigenvalue of h has the same imaginary part and the
// target is not unique -- as for a Hermitian h.
std::pair<Mps, SolverReport> solve_si_ground(const Mpo& h, const SweepConfig& cfg);

}  // namespace nhmps
