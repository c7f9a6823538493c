#include "nhmps/ed.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

namespace nhmps {

namespace {

// Jordan-Wigner sign for removing/adding a particle at site m of bitstring b:
// parity of the occupied sites below m.
int jw_sign(std::size_t b, std::size_t m) {
  const std::size_t below = b & ((std::size_t{1} << m) - 1);
  return std::popcount(below) % 2 == 0 ? 1 : -1;
}

}  // namespace

FockMatrix build_dense(const ModelSpec& spec) {
  const std::size_t n = spec.n_sites();
  if (n > 14) throw std::invalid_argument("build_dense: capped at 14 sites");
  const bool pbc = spec.boundary == Boundary::PBC;
  if (pbc && spec.n_cells < 2)
    throw std::invalid_argument("build_dense: periodic boundaries need at least two cells");
  const std::size_t dim = std::size_t{1} << n;

  FockMatrix fm;
  fm.n_sites = n;
  fm.matrix = Tensor({dim, dim});
  Tensor& h = fm.matrix;

  // h += c * c^dag_i c_j applied to every basis state.
  auto add_hop = [&](std::size_t i, std::size_t j, double c) {
    if (c == 0.0) return;
    for (std::size_t b = 0; b < dim; ++b) {
      if (!(b >> j & 1)) continue;
      const std::size_t b1 = b ^ (std::size_t{1} << j);
      const int s1 = jw_sign(b, j);
      if (i == j) {
        h({b, b}) += c;  // number operator
        continue;
      }
      if (b1 >> i & 1) continue;
      const std::size_t b2 = b1 | (std::size_t{1} << i);
      const int s2 = jw_sign(b1, i);
      h({b2, b}) += c * s1 * s2;
    }
  };
  auto add_density_pair = [&](std::size_t i, std::size_t j, double c) {
    if (c == 0.0) return;
    for (std::size_t b = 0; b < dim; ++b)
      if ((b >> i & 1) && (b >> j & 1)) h({b, b}) += c;
  };

  for (std::size_t m = 0; m + 1 < n; ++m) {
    const double fwd = m % 2 == 0 ? spec.t + spec.gamma / 2 : 1.0;
    const double bwd = m % 2 == 0 ? spec.t - spec.gamma / 2 : 1.0;
    add_hop(m, m + 1, fwd);
    add_hop(m + 1, m, bwd);
    add_density_pair(m, m + 1, spec.u);
  }
  if (pbc) {
    add_hop(0, n - 1, 1.0);  // a_1^dag b_N
    add_hop(n - 1, 0, 1.0);  // b_N^dag a_1
    add_density_pair(n - 1, 0, spec.u);
  }
  for (std::size_t m = 0; m < n; ++m) add_hop(m, m, -spec.mu);
  return fm;
}

std::vector<cplx> EdSpectrum::values() const {
  std::vector<cplx> v;
  v.reserve(entries.size());
  for (const Entry& e : entries) v.push_back(e.value);
  return v;
}

namespace {

std::vector<cplx> embed_sector(const EdSpectrum& sp, std::size_t entry,
                               const std::function<cplx(std::size_t)>& component) {
  const EdSpectrum::Entry& e = sp.entries.at(entry);
  const EdSpectrum::Sector& sec = sp.sectors[e.sector];
  std::vector<cplx> out(std::size_t{1} << sp.n_sites, cplx(0.0));
  for (std::size_t r = 0; r < sec.basis.size(); ++r) out[sec.basis[r]] = component(r);
  return out;
}

}  // namespace

std::vector<cplx> EdSpectrum::right_vector(std::size_t entry) const {
  const Entry& e = entries.at(entry);
  const Tensor& right = sectors[e.sector].eig.right;
  return embed_sector(*this, entry, [&](std::size_t r) { return right({r, e.column}); });
}

std::vector<cplx> EdSpectrum::left_vector(std::size_t entry) const {
  // DenseEig stores <l_i| as rows; return the ket |l>, H^dag |l> = conj(lambda) |l>.
  const Entry& e = entries.at(entry);
  const Tensor& left = sectors[e.sector].eig.left;
  if (left.size() == 0)
    throw std::runtime_error("left_vector: sector eigenbasis is defective, no left vectors");
  return embed_sector(*this, entry, [&](std::size_t r) { return std::conj(left({e.column, r})); });
}

EdSpectrum full_spectrum(const FockMatrix& fm) {
  const std::size_t n = fm.n_sites;
  const std::size_t dim = std::size_t{1} << n;
  if (fm.matrix.rank() != 2 || fm.matrix.dim(0) != dim || fm.matrix.dim(1) != dim)
    throw std::invalid_argument("full_spectrum: matrix/site count mismatch");

  // The models here conserve particle number; verify rather than assume, and
  // fall back to one dense block if a matrix element crosses sectors.
  bool conserving = true;
  for (std::size_t b = 0; b < dim && conserving; ++b)
    for (std::size_t b2 = 0; b2 < dim; ++b2)
      if (fm.matrix({b2, b}) != cplx(0.0) && std::popcount(b2) != std::popcount(b)) {
        conserving = false;
        break;
      }

  std::vector<std::vector<std::size_t>> blocks;
  if (conserving) {
    blocks.resize(n + 1);
    for (std::size_t b = 0; b < dim; ++b) blocks[std::popcount(b)].push_back(b);
  } else {
    if (dim > 4096)
      throw std::invalid_argument("full_spectrum: non-conserving matrix too large");
    blocks.emplace_back(dim);
    for (std::size_t b = 0; b < dim; ++b) blocks.back()[b] = b;
  }

  EdSpectrum sp;
  sp.n_sites = n;
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const auto& basis = blocks[p];
    if (basis.empty()) continue;
    const std::size_t sdim = basis.size();
    Tensor sub({sdim, sdim});
    for (std::size_t r = 0; r < sdim; ++r)
      for (std::size_t c = 0; c < sdim; ++c) sub({r, c}) = fm.matrix({basis[r], basis[c]});
    EdSpectrum::Sector sec;
    sec.n_particles = conserving ? p : 0;
    sec.basis = basis;
    sec.eig = dense_eig(sub);
    sp.max_condition = std::max(sp.max_condition, sec.eig.condition);
    sp.defective = sp.defective || sec.eig.defective;
    for (std::size_t c = 0; c < sdim; ++c)
      sp.entries.push_back({sec.eig.values[c], sp.sectors.size(), c});
    sp.sectors.push_back(std::move(sec));
  }
  std::stable_sort(sp.entries.begin(), sp.entries.end(),
                   [](const EdSpectrum::Entry& a, const EdSpectrum::Entry& b) {
                     if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
                     return a.value.imag() < b.value.imag();
                   });
  return sp;
}

GroundSelection select_ground(const EdSpectrum& spectrum, Which which) {
  if (spectrum.entries.empty()) throw std::invalid_argument("select_ground: empty spectrum");
  double radius = 0.0;
  for (const auto& e : spectrum.entries) radius = std::max(radius, std::abs(e.value));
  const double tol = 1e-9 * std::max(1.0, radius);

  // Lexicographic with a tolerance window on the primary component, so a
  // roundoff-level difference in Re cannot defeat the Im tie-break.
  auto better = [&](const cplx& a, const cplx& b) {
    const double pa = which == Which::SR ? a.real() : a.imag();
    const double pb = which == Which::SR ? b.real() : b.imag();
    if (pa < pb - tol) return true;
    if (pa > pb + tol) return false;
    return (which == Which::SR ? a.imag() : a.real()) <
           (which == Which::SR ? b.imag() : b.real());
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < spectrum.entries.size(); ++k)
    if (better(spectrum.entries[k].value, spectrum.entries[best].value)) best = k;

  GroundSelection sel;
  sel.value = spectrum.entries[best].value;
  for (std::size_t k = 0; k < spectrum.entries.size(); ++k)
    if (std::abs(spectrum.entries[k].value - sel.value) <= tol) sel.entries.push_back(k);
  return sel;
}

CompareResult compare(const Mps& state, const FockMatrix& fm, const EdSpectrum& spectrum,
                      Which which) {
  const std::size_t dim = std::size_t{1} << fm.n_sites;
  std::vector<cplx> amp = dense_amplitudes(state);
  if (amp.size() != dim) throw std::invalid_argument("compare: state/matrix size mismatch");

  Eigen::Map<const Eigen::VectorXcd> psi_raw(amp.data(), dim);
  Eigen::VectorXcd psi = psi_raw / psi_raw.norm();
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> h(
      fm.matrix.data(), dim, dim);

  CompareResult r;
  r.e_mps = psi.dot(h * psi);  // dot conjugates psi

  GroundSelection sel = select_ground(spectrum, which);
  r.e_ed = sel.value;
  r.delta_e = std::abs(r.e_mps - r.e_ed);

  Eigen::MatrixXcd basis(dim, sel.entries.size());
  for (std::size_t k = 0; k < sel.entries.size(); ++k) {
    std::vector<cplx> v = spectrum.right_vector(sel.entries[k]);
    basis.col(k) = Eigen::Map<const Eigen::VectorXcd>(v.data(), dim);
  }
  // Orthonormalize the (possibly ill-conditioned) degenerate eigenvectors.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(basis);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, sel.entries.size());
  const double proj = (q.adjoint() * psi).squaredNorm();
  r.infidelity = std::abs(1.0 - proj);
  return r;
}

CompareResult compare(const Mps& state, const FockMatrix& fm, Which which) {
  return compare(state, fm, full_spectrum(fm), which);
}

}  // namespace nhmps
