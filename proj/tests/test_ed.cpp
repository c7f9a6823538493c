#include "nhmps/ed.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "nhmps/free_fermion.hpp"

using namespace nhmps;

namespace {

std::vector<cplx> sorted_re_im(std::vector<cplx> v) {
  std::stable_sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

// For a quadratic Hamiltonian H = c^dag M c the many-body spectrum is exactly
// the set of subset sums of the single-particle eigenvalues: an oracle for
// full_spectrum that never touches the Fock matrix.
std::vector<cplx> subset_sums(const std::vector<cplx>& lambdas) {
  std::vector<cplx> sums;
  const std::size_t n = lambdas.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    cplx s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if ((mask >> k) & 1) s += lambdas[k];
    sums.push_back(s);
  }
  return sorted_re_im(sums);
}

// Multiset comparison by greedy nearest matching: lexicographic sorting of
// complex values is not stable under roundoff when real parts tie.
void expect_same_multiset(const std::vector<cplx>& got, const std::vector<cplx>& want,
                          double tol) {
  ASSERT_EQ(got.size(), want.size());
  std::vector<bool> used(got.size(), false);
  for (std::size_t i = 0; i < want.size(); ++i) {
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < got.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(got[j] - want[i]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    EXPECT_LT(best, tol) << "oracle entry " << i;
    used[arg] = true;
  }
}

void expect_spectrum_matches_subset_sums(const ModelSpec& spec, double tol) {
  EdSpectrum sp = full_spectrum(build_dense(spec));
  expect_same_multiset(sp.values(), subset_sums(solve_single_particle(spec).lambdas), tol);
}

TEST(Ed, FreeSpectrumIsSubsetSumsObc) {
  ModelSpec spec;
  spec.n_cells = 2;
  spec.t = 0.9;
  spec.gamma = 0.7;
  spec.mu = 0.2;
  expect_spectrum_matches_subset_sums(spec, 1e-10);
}

TEST(Ed, FreeSpectrumIsSubsetSumsPbc) {
  ModelSpec spec;
  spec.n_cells = 3;
  spec.t = 1.1;
  spec.gamma = 0.4;
  spec.boundary = Boundary::PBC;
  expect_spectrum_matches_subset_sums(spec, 1e-9);
}

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

TEST(Ed, EigenvectorResidualsAndBiorthogonality) {
  ModelSpec spec;
  spec.n_cells = 2;
  spec.t = 0.8;
  spec.gamma = 0.9;
  spec.u = 0.6;
  FockMatrix fm = build_dense(spec);
  EdSpectrum sp = full_spectrum(fm);
  ASSERT_FALSE(sp.defective);
  const std::size_t dim = 16;
  auto apply = [&](const std::vector<cplx>& v, bool adjoint) {
    std::vector<cplx> out(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        out[i] += adjoint ? std::conj(fm.matrix({j, i})) * v[j] : fm.matrix({i, j}) * v[j];
    return out;
  };
  for (std::size_t k = 0; k < sp.entries.size(); ++k) {
    std::vector<cplx> r = sp.right_vector(k);
    std::vector<cplx> hr = apply(r, false);
    double res = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      res = std::max(res, std::abs(hr[i] - sp.entries[k].value * r[i]));
    EXPECT_LT(res, 1e-9);

    std::vector<cplx> l = sp.left_vector(k);
    std::vector<cplx> hl = apply(l, true);
    double lres = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      lres = std::max(lres, std::abs(hl[i] - std::conj(sp.entries[k].value) * l[i]));
    EXPECT_LT(lres, 1e-9);
  }
  // <l_i|r_j> vanishes across distinct eigenvalues.
  for (std::size_t i = 0; i < sp.entries.size(); ++i)
    for (std::size_t j = 0; j < sp.entries.size(); ++j) {
      if (std::abs(sp.entries[i].value - sp.entries[j].value) < 1e-6) continue;
      EXPECT_LT(std::abs(dot(sp.left_vector(i), sp.right_vector(j))), 1e-8)
          << i << "," << j;
    }
}

TEST(Ed, SelectGroundPicksSmallestRealOrImaginary) {
  ModelSpec spec;
  spec.n_cells = 2;
  spec.t = 0.9;
  spec.gamma = 0.7;
  spec.boundary = Boundary::PBC;  // complex single-particle spectrum
  EdSpectrum sp = full_spectrum(build_dense(spec));
  // Oracle: scan every subset sum for the lexicographic minimum. Summing the
  // negative-real-part modes alone would miss the tie-breaks on Re = 0 modes.
  const std::vector<cplx> sums = subset_sums(solve_single_particle(spec).lambdas);
  cplx want_sr = sums[0], want_si = sums[0];
  for (const cplx& s : sums) {
    if (s.real() < want_sr.real() - 1e-12 ||
        (std::abs(s.real() - want_sr.real()) <= 1e-12 && s.imag() < want_sr.imag()))
      want_sr = s;
    if (s.imag() < want_si.imag() - 1e-12 ||
        (std::abs(s.imag() - want_si.imag()) <= 1e-12 && s.real() < want_si.real()))
      want_si = s;
  }
  EXPECT_LT(std::abs(select_ground(sp, Which::SR).value - want_sr), 1e-9);
  EXPECT_LT(std::abs(select_ground(sp, Which::SI).value - want_si), 1e-9);
}

TEST(Ed, ExceptionalPointIsFlaggedDefective) {
  // t = gamma/2 collapses the cell hopping to a Jordan block.
  ModelSpec spec;
  spec.n_cells = 1;
  spec.t = 0.5;
  spec.gamma = 1.0;
  EdSpectrum sp = full_spectrum(build_dense(spec));
  EXPECT_TRUE(sp.defective);
  // All four many-body values collapse to zero and are mutually degenerate.
  GroundSelection sel = select_ground(sp, Which::SR);
  EXPECT_LT(std::abs(sel.value), 1e-9);
  EXPECT_EQ(sel.entries.size(), 4u);
}

TEST(Ed, CompareReportsEnergyAndInfidelity) {
  ModelSpec spec;
  spec.n_cells = 2;
  spec.t = 1.0;
  spec.gamma = 0.0;  // Hermitian: ED ground is an honest minimum
  spec.mu = 0.4;
  FockMatrix fm = build_dense(spec);
  EdSpectrum sp = full_spectrum(fm);

  Mps psi = random_mps(4, 2, 8, 17);
  CompareResult c = compare(psi, fm, sp, Which::SR);
  cplx e_direct = expectation(psi, build_nhssh(spec));
  EXPECT_LT(std::abs(c.e_mps - e_direct), 1e-10);
  EXPECT_NEAR(c.delta_e, std::abs(c.e_mps - c.e_ed), 1e-14);
  EXPECT_GE(c.infidelity, 0.0);
  EXPECT_LE(c.infidelity, 1.0 + 1e-12);
  // A random state can't beat the Hermitian ground energy.
  EXPECT_GE(c.e_mps.real(), c.e_ed.real() - 1e-10);
}

TEST(Ed, BuildDenseRejectsOversizedSystems) {
  ModelSpec spec;
  spec.n_cells = 8;  // 16 sites
  EXPECT_THROW(build_dense(spec), std::invalid_argument);
}

}  // namespace
