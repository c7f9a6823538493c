#include "nhmps/free_fermion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace nhmps {

namespace {

using ColMat = Eigen::MatrixXcd;

ColMat to_eigen(const Tensor& t) {
  const std::size_t r = t.dim(0), c = t.dim(1);
  ColMat m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = t({i, j});
  return m;
}

LogDet logdet_eigen(const ColMat& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t({(std::size_t)i, (std::size_t)j}) = m(i, j);
  return logdet_lu(t);
}

void check_filling(const SingleParticleSolution& sol, std::size_t p, const char* who) {
  if (p == 0 || p > sol.lambdas.size())
    throw std::invalid_argument(std::string(who) + ": filling out of range");
}

void check_regular(const SingleParticleSolution& sol, const char* who) {
  if (sol.defective)
    throw std::runtime_error(std::string(who) +
                             ": mode matrix is numerically defective (condition " +
                             std::to_string(sol.condition) +
                             "); biorthogonal modes are not available");
}

// Filled right modes: first p columns of s.
ColMat filled_modes(const SingleParticleSolution& sol, std::size_t p) {
  ColMat s = to_eigen(sol.s);
  return s.leftCols(p);
}

}  // namespace

SingleParticleSolution solve_single_particle(const ModelSpec& spec) {
  if (spec.u != 0.0)
    throw std::invalid_argument("solve_single_particle: model is interacting (u != 0)");
  const bool pbc = spec.boundary == Boundary::PBC;
  if (pbc && spec.n_cells < 2)
    throw std::invalid_argument(
        "solve_single_particle: periodic boundaries need at least two cells");
  const std::size_t n = spec.n_sites();

  Tensor m({n, n});
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double fwd = k % 2 == 0 ? spec.t + spec.gamma / 2 : 1.0;
    const double bwd = k % 2 == 0 ? spec.t - spec.gamma / 2 : 1.0;
    m({k, k + 1}) += fwd;
    m({k + 1, k}) += bwd;
  }
  if (pbc) {
    m({0, n - 1}) += 1.0;
    m({n - 1, 0}) += 1.0;
  }
  for (std::size_t k = 0; k < n; ++k) m({k, k}) -= spec.mu;

  DenseEig eig = dense_eig(m);
  SingleParticleSolution sol;
  sol.n_cells = spec.n_cells;
  sol.m = std::move(m);
  sol.lambdas = eig.values;
  sol.s = eig.right;
  sol.condition = eig.condition;
  sol.defective = eig.defective;
  if (!sol.defective) sol.s_inv = inverse(sol.s);
  return sol;
}

cplx many_body_energy(const SingleParticleSolution& sol, std::size_t p) {
  // p = 0 is the vacuum; only determinant-based quantities need p >= 1.
  if (p > sol.lambdas.size())
    throw std::invalid_argument("many_body_energy: filling out of range");
  cplx e = 0.0;
  for (std::size_t k = 0; k < p; ++k) e += sol.lambdas[k];
  return e;
}

DistributionResult particle_distribution(const SingleParticleSolution& sol, std::size_t p) {
  check_filling(sol, p, "particle_distribution");
  check_regular(sol, "particle_distribution");
  const std::size_t n = sol.lambdas.size();
  ColMat a = filled_modes(sol, p);
  const ColMat g = a.adjoint() * a;
  const LogDet det_g = logdet_eigen(g);
  if (!std::isfinite(det_g.log_abs))
    throw std::runtime_error("particle_distribution: filled modes are linearly dependent");

  DistributionResult out;
  out.p = p;
  out.n_site.resize(n);

  for (std::size_t m = 0; m < n; ++m) {
    const Eigen::RowVectorXcd row = a.row(m);
    ColMat b = g - row.adjoint() * row;  // overlap matrix with site m removed

    // Cofactor sum: sum_{ij} conj(row_i) C_ij(b) row_j. When b is regular,
    // C(b) = det(b) b^{-T}, so the double sum collapses to one linear solve.
    Eigen::PartialPivLU<ColMat> lu(b);
    double min_pivot = std::numeric_limits<double>::infinity(), max_pivot = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      const double piv = std::abs(lu.matrixLU()(k, k));
      min_pivot = std::min(min_pivot, piv);
      max_pivot = std::max(max_pivot, piv);
    }

    cplx value;
    if (min_pivot > 1e-10 * std::max(1.0, max_pivot)) {
      const LogDet det_b = logdet_eigen(b);
      const Eigen::VectorXcd z = lu.solve(row.adjoint());  // b z = conj(row)^T
      const cplx q = (row * z)(0);  // sum_ij row_j b^{-1}_{ji} conj(row_i)
      value = std::exp(det_b.log_abs - det_g.log_abs) * det_b.phase / det_g.phase * q;
    } else {
      // Rare singular downdate: fall back to the explicit minors.
      value = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
          if (row(i) == cplx(0.0) || row(j) == cplx(0.0)) continue;
          ColMat minor(p - 1, p - 1);
          for (std::size_t r = 0, rr = 0; r < p; ++r) {
            if (r == i) continue;
            for (std::size_t c = 0, cc = 0; c < p; ++c) {
              if (c == j) continue;
              minor(rr, cc) = b(r, c);
              ++cc;
            }
            ++rr;
          }
          const LogDet det_m = p == 1 ? LogDet{0.0, 1.0} : logdet_eigen(minor);
          if (!std::isfinite(det_m.log_abs)) continue;
          const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
          value += sign * std::conj(row(i)) * row(j) *
                   std::exp(det_m.log_abs - det_g.log_abs) * det_m.phase / det_g.phase;
        }
      }
    }
    out.n_site[m] = value.real();
  }

  out.n_cell.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j)
    out.n_cell[j] = out.n_site[2 * j] + out.n_site[2 * j + 1];
  return out;
}

DistributionResult particle_distribution_brute(const SingleParticleSolution& sol,
                                               std::size_t p) {
  check_filling(sol, p, "particle_distribution_brute");
  check_regular(sol, "particle_distribution_brute");
  const std::size_t n = sol.lambdas.size();
  if (n > 12) throw std::invalid_argument("particle_distribution_brute: capped at 12 sites");
  ColMat a = filled_modes(sol, p);

  // Log-domain weights |det(A rows q)|^2 over all occupation patterns q.
  std::vector<double> log_w;
  std::vector<std::size_t> patterns;
  double log_max = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < (std::size_t{1} << n); ++q) {
    if (static_cast<std::size_t>(std::popcount(q)) != p) continue;
    ColMat sub(p, p);
    std::size_t r = 0;
    for (std::size_t m = 0; m < n; ++m)
      if (q >> m & 1) sub.row(r++) = a.row(m);
    const LogDet det = logdet_eigen(sub);
    patterns.push_back(q);
    log_w.push_back(2.0 * det.log_abs);
    log_max = std::max(log_max, log_w.back());
  }

  double total = 0.0;
  std::vector<double> site_sum(n, 0.0);
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    const double w = std::exp(log_w[k] - log_max);
    total += w;
    for (std::size_t m = 0; m < n; ++m)
      if (patterns[k] >> m & 1) site_sum[m] += w;
  }

  DistributionResult out;
  out.p = p;
  out.n_site.resize(n);
  for (std::size_t m = 0; m < n; ++m) out.n_site[m] = site_sum[m] / total;
  out.n_cell.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j)
    out.n_cell[j] = out.n_site[2 * j] + out.n_site[2 * j + 1];
  return out;
}

double distribution_symmetry_check(const SingleParticleSolution& sol, std::size_t p) {
  const std::size_t n = sol.lambdas.size();
  check_filling(sol, p, "distribution_symmetry_check");
  if (n - p == 0)
    throw std::invalid_argument("distribution_symmetry_check: complement filling is empty");
  DistributionResult low = particle_distribution(sol, p);
  DistributionResult high = particle_distribution(sol, n - p);
  const std::size_t cells = sol.n_cells;
  double dev = 0.0;
  for (std::size_t j = 0; j < cells; ++j)
    dev = std::max(dev, std::abs(low.n_cell[j] - (2.0 - high.n_cell[cells - 1 - j])));
  return dev;
}

double biorthogonal_overlap(const SingleParticleSolution& sol, std::size_t p) {
  check_filling(sol, p, "biorthogonal_overlap");
  check_regular(sol, "biorthogonal_overlap");
  ColMat a = filled_modes(sol, p);
  ColMat s_inv = to_eigen(sol.s_inv);
  // Left modes biorthonormal to the filled right modes: rows of s_inv.
  ColMat c = s_inv.topRows(p).adjoint();
  const LogDet det_r = logdet_eigen(a.adjoint() * a);
  const LogDet det_l = logdet_eigen(c.adjoint() * c);
  return std::exp(-0.5 * (det_r.log_abs + det_l.log_abs));
}

double pinning_mu(const SingleParticleSolution& sol, std::size_t p) {
  const std::size_t n = sol.lambdas.size();
  if (p > n) throw std::invalid_argument("pinning_mu: filling out of range");
  if (p == 0) return sol.lambdas.front().real() - 1.0;
  if (p == n) return sol.lambdas.back().real() + 1.0;
  const double below = sol.lambdas[p - 1].real();
  const double above = sol.lambdas[p].real();
  if (above - below < 1e-9)
    throw std::runtime_error("pinning_mu: no spectral gap at the requested filling");
  return 0.5 * (below + above);
}

}  // namespace nhmps
