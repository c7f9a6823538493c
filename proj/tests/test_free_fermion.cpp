#include "nhmps/free_fermion.hpp"

#include <gtest/gtest.h>

#include <bit>

#include "nhmps/ed.hpp"

using namespace nhmps;

namespace {

ModelSpec make_spec(std::size_t cells, double t, double gamma, double mu = 0.0,
                    Boundary bc = Boundary::OBC) {
  ModelSpec spec;
  spec.n_cells = cells;
  spec.t = t;
  spec.gamma = gamma;
  spec.mu = mu;
  spec.boundary = bc;
  return spec;
}

// Dense many-body oracle for the site densities of the p-particle
// smallest-real-part right eigenstate: diagonalize the Fock matrix, pick the
// minimal entry of the p-particle sector, read the densities off the vector.
std::vector<double> dense_densities(const ModelSpec& spec, std::size_t p) {
  EdSpectrum sp = full_spectrum(build_dense(spec));
  std::size_t best = sp.entries.size();
  for (std::size_t k = 0; k < sp.entries.size(); ++k) {
    if (sp.sectors[sp.entries[k].sector].n_particles != p) continue;
    if (best == sp.entries.size()) best = k;  // entries sorted by (Re, Im)
  }
  EXPECT_LT(best, sp.entries.size());
  std::vector<cplx> r = sp.right_vector(best);
  double nrm = 0.0;
  for (const cplx& a : r) nrm += std::norm(a);
  std::vector<double> n(spec.n_sites(), 0.0);
  for (std::size_t b = 0; b < r.size(); ++b)
    for (std::size_t m = 0; m < spec.n_sites(); ++m)
      if ((b >> m) & 1) n[m] += std::norm(r[b]) / nrm;
  return n;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

TEST(FreeFermion, RejectsInteractingModels) {
  ModelSpec spec = make_spec(2, 1.0, 0.5);
  spec.u = 0.4;
  EXPECT_THROW(solve_single_particle(spec), std::invalid_argument);
}

TEST(FreeFermion, SpectrumHasChiralPairsAtZeroMu) {
  // The hopping graph is bipartite, so the mu = 0 single-particle spectrum is
  // symmetric under negation.
  for (Boundary bc : {Boundary::OBC, Boundary::PBC}) {
    SingleParticleSolution sol = solve_single_particle(make_spec(4, 0.8, 1.1, 0.0, bc));
    std::vector<bool> used(sol.lambdas.size(), false);
    for (const cplx& l : sol.lambdas) {
      double best = 1e300;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < sol.lambdas.size(); ++j) {
        if (used[j]) continue;
        const double d = std::abs(sol.lambdas[j] + l);
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      EXPECT_LT(best, 1e-10);
      used[arg] = true;
    }
  }
}

TEST(FreeFermion, ManyBodyEnergyMatchesEd) {
  ModelSpec spec = make_spec(3, 0.9, 0.5, 0.3);
  SingleParticleSolution sol = solve_single_particle(spec);
  EdSpectrum sp = full_spectrum(build_dense(spec));
  for (std::size_t p = 0; p <= 6; ++p) {
    cplx want;
    bool found = false;
    for (std::size_t k = 0; k < sp.entries.size() && !found; ++k)
      if (sp.sectors[sp.entries[k].sector].n_particles == p) {
        want = sp.entries[k].value;
        found = true;
      }
    ASSERT_TRUE(found);
    EXPECT_LT(std::abs(many_body_energy(sol, p) - want), 1e-9) << "p=" << p;
  }
}

TEST(FreeFermion, DistributionMatchesBruteForce) {
  struct Case {
    ModelSpec spec;
    std::size_t p;
  };
  const std::vector<Case> cases = {
      {make_spec(3, 1.0, 0.5), 2},
      {make_spec(3, 1.0, 0.5), 3},
      {make_spec(3, 0.4, 1.6), 3},              // gamma-dominated phase
      {make_spec(4, 1.0, 0.5), 3},
      {make_spec(4, 0.7, 1.2, 0.25), 5},
      {make_spec(3, 1.0, 0.8, 0.0, Boundary::PBC), 3},
      {make_spec(4, 0.9, 1.3, -0.2, Boundary::PBC), 4},
  };
  for (const auto& [spec, p] : cases) {
    SingleParticleSolution sol = solve_single_particle(spec);
    DistributionResult fast = particle_distribution(sol, p);
    DistributionResult brute = particle_distribution_brute(sol, p);
    expect_close(fast.n_site, brute.n_site, 1e-9);
    expect_close(fast.n_cell, brute.n_cell, 1e-9);
    // Densities sum to the particle number.
    double total = 0.0;
    for (double nm : fast.n_site) total += nm;
    EXPECT_NEAR(total, double(p), 1e-9);
  }
}

TEST(FreeFermion, DistributionMatchesDenseEigenstate) {
  struct Case {
    ModelSpec spec;
    std::size_t p;
  };
  const std::vector<Case> cases = {
      {make_spec(3, 1.0, 0.5, 0.1), 3},
      {make_spec(3, 0.4, 1.6), 2},
      {make_spec(2, 0.9, 0.6, 0.0, Boundary::PBC), 2},
  };
  for (const auto& [spec, p] : cases) {
    DistributionResult fast = particle_distribution(solve_single_particle(spec), p);
    expect_close(fast.n_site, dense_densities(spec, p), 1e-8);
  }
}

TEST(FreeFermion, DistributionIsMuInvariant) {
  // A chemical potential shifts all mode energies uniformly: same modes, same
  // filling order, same distribution.
  ModelSpec spec = make_spec(4, 1.0, 0.6);
  DistributionResult base = particle_distribution(solve_single_particle(spec), 3);
  spec.mu = 0.77;
  DistributionResult shifted = particle_distribution(solve_single_particle(spec), 3);
  expect_close(base.n_site, shifted.n_site, 1e-10);
}

TEST(FreeFermion, DistributionSymmetryRelation) {
  for (std::size_t p : {1u, 2u, 3u}) {
    SingleParticleSolution sol = solve_single_particle(make_spec(3, 1.0, 0.5));
    EXPECT_LT(distribution_symmetry_check(sol, p), 1e-9) << "p=" << p;
  }
  SingleParticleSolution sol = solve_single_particle(make_spec(4, 0.6, 1.4));
  EXPECT_LT(distribution_symmetry_check(sol, 3), 1e-9);
}

TEST(FreeFermion, RefusesDefectiveModeMatrix) {
  // t = gamma/2: the intra-cell block is a Jordan cell, modes are not a basis.
  SingleParticleSolution sol = solve_single_particle(make_spec(2, 0.5, 1.0));
  EXPECT_TRUE(sol.defective);
  EXPECT_THROW(particle_distribution(sol, 2), std::runtime_error);
  EXPECT_THROW(biorthogonal_overlap(sol, 2), std::runtime_error);
}

TEST(FreeFermion, BiorthogonalOverlapMatchesDenseFock) {
  struct Case {
    ModelSpec spec;
    std::size_t p;
  };
  const std::vector<Case> cases = {
      {make_spec(2, 1.0, 0.5), 2},
      {make_spec(3, 0.8, 1.1), 3},
      {make_spec(3, 1.2, 0.9, 0.0, Boundary::PBC), 3},
  };
  for (const auto& [spec, p] : cases) {
    SingleParticleSolution sol = solve_single_particle(spec);
    const double got = biorthogonal_overlap(sol, p);

    EdSpectrum sp = full_spectrum(build_dense(spec));
    std::size_t best = sp.entries.size();
    for (std::size_t k = 0; k < sp.entries.size(); ++k)
      if (sp.sectors[sp.entries[k].sector].n_particles == p) {
        best = k;
        break;
      }
    ASSERT_LT(best, sp.entries.size());
    std::vector<cplx> r = sp.right_vector(best);
    std::vector<cplx> l = sp.left_vector(best);
    cplx lr = 0.0;
    double ll = 0.0, rr = 0.0;
    for (std::size_t b = 0; b < r.size(); ++b) {
      lr += std::conj(l[b]) * r[b];
      ll += std::norm(l[b]);
      rr += std::norm(r[b]);
    }
    const double want = std::abs(lr) / std::sqrt(ll * rr);
    EXPECT_NEAR(got, want, 1e-8);
    EXPECT_LE(got, 1.0 + 1e-12);
  }
}

TEST(FreeFermion, OverlapIsUnityForHermitianModel) {
  SingleParticleSolution sol = solve_single_particle(make_spec(3, 1.0, 0.0));
  EXPECT_NEAR(biorthogonal_overlap(sol, 3), 1.0, 1e-10);
}

TEST(FreeFermion, PinningMuSelectsFilling) {
  SingleParticleSolution sol = solve_single_particle(make_spec(4, 1.0, 0.6));
  for (std::size_t p : {1u, 3u, 4u, 6u}) {
    const double mu = pinning_mu(sol, p);
    ModelSpec pinned = make_spec(4, 1.0, 0.6, mu);
    SingleParticleSolution shifted = solve_single_particle(pinned);
    // Exactly p modes sit below zero: the global smallest-real-part
    // eigenstate has p particles.
    std::size_t negatives = 0;
    for (const cplx& l : shifted.lambdas)
      if (l.real() < 0.0) ++negatives;
    EXPECT_EQ(negatives, p);
  }
  // Degenerate real parts at the target filling are refused: the 4-site ring
  // at gamma = 0 has modes 2cos(k) = {-2, 0, 0, 2}, so p = 2 has no gap.
  EXPECT_THROW(pinning_mu(solve_single_particle(make_spec(2, 1.0, 0.0, 0.0, Boundary::PBC)), 2),
               std::runtime_error);
}

TEST(FreeFermion, RequiresTwoCellsForPbc) {
  EXPECT_THROW(solve_single_particle(make_spec(1, 1.0, 0.5, 0.0, Boundary::PBC)),
               std::invalid_argument);
}

}  // namespace
