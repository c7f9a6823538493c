#include "nhmps/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nhmps/linalg.hpp"

namespace nhmps {

namespace {

void check_valid(const Mps& state, const char* who) {
  if (state.sites.empty()) throw std::invalid_argument(std::string(who) + ": empty state");
  if (state.sites.front().dim(0) != 1 || state.sites.back().dim(2) != 1)
    throw std::invalid_argument(std::string(who) + ": edge bonds must have dimension 1");
  for (std::size_t i = 0; i + 1 < state.n_sites(); ++i)
    if (state.sites[i].dim(2) != state.sites[i + 1].dim(0))
      throw std::invalid_argument(std::string(who) + ": bond dimension mismatch");
}

}  // namespace

std::size_t Mps::max_bond_dim() const {
  std::size_t m = 1;
  for (const Tensor& s : sites) m = std::max(m, s.dim(2));
  return m;
}

Mps random_mps(std::size_t n_sites, std::size_t phys_dim, std::size_t bond_dim,
               std::uint64_t seed) {
  if (n_sites == 0 || phys_dim == 0 || bond_dim == 0)
    throw std::invalid_argument("random_mps: zero size");
  Rng rng(seed);
  // Cap bonds by the exactly representable growth from both edges.
  auto bond = [&](std::size_t cut) {  // bond between sites cut-1 and cut
    double from_left = std::pow(static_cast<double>(phys_dim), static_cast<double>(cut));
    double from_right =
        std::pow(static_cast<double>(phys_dim), static_cast<double>(n_sites - cut));
    double cap = std::min({from_left, from_right, static_cast<double>(bond_dim)});
    return static_cast<std::size_t>(cap);
  };
  Mps state;
  for (std::size_t i = 0; i < n_sites; ++i) {
    const std::size_t dl = i == 0 ? 1 : bond(i);
    const std::size_t dr = i + 1 == n_sites ? 1 : bond(i + 1);
    Tensor t({dl, phys_dim, dr});
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = rng.gaussian_cplx();
    state.sites.push_back(std::move(t));
  }
  return normalized(canonicalize(state, 0));
}

Mps canonicalize(const Mps& state, std::size_t center) {
  check_valid(state, "canonicalize");
  if (center >= state.n_sites()) throw std::invalid_argument("canonicalize: bad center");
  Mps out = state;
  // Left-to-right QR up to the center...
  for (std::size_t i = 0; i < center; ++i) {
    auto [q, r] = qr_split(out.sites[i], 2);
    out.sites[i] = std::move(q);
    out.sites[i + 1] = contract(r, out.sites[i + 1], {{1, 0}});
  }
  // ...and right-to-left LQ down to it.
  for (std::size_t i = state.n_sites() - 1; i > center; --i) {
    auto [l, q] = lq_split(out.sites[i], 2);
    out.sites[i] = std::move(q);
    out.sites[i - 1] = contract(out.sites[i - 1], l, {{2, 0}});
  }
  out.center = center;
  return out;
}

double norm(const Mps& state) {
  return std::sqrt(std::abs(overlap(state, state).real()));
}

Mps normalized(const Mps& state) {
  // The true norm, not the center-site norm: callers may hand in states whose
  // canonical structure has been perturbed (e.g. a rescaled center).
  const double n = norm(state);
  if (!(n > 0.0) || !std::isfinite(n)) throw std::runtime_error("normalized: zero-norm state");
  Mps out = state;
  out.sites[out.center.value_or(0)] *= cplx(1.0 / n);
  return out;
}

cplx overlap(const Mps& a, const Mps& b) {
  check_valid(a, "overlap");
  check_valid(b, "overlap");
  if (a.n_sites() != b.n_sites()) throw std::invalid_argument("overlap: size mismatch");
  // env has axes (bra bond, ket bond)
  Tensor env({1, 1});
  env[0] = 1.0;
  for (std::size_t i = 0; i < a.n_sites(); ++i) {
    Tensor tmp = contract(env, a.sites[i].conjugated(), {{0, 0}});  // (ket, phys, bra')
    env = contract(tmp, b.sites[i], {{0, 0}, {1, 1}});              // (bra', ket')
  }
  return scalar_value(env);
}

cplx single_site_expectation(const Mps& state, std::size_t site, const Tensor& op) {
  check_valid(state, "single_site_expectation");
  if (site >= state.n_sites()) throw std::invalid_argument("single_site_expectation: bad site");
  if (op.rank() != 2 || op.dim(0) != state.phys_dim(site) || op.dim(1) != state.phys_dim(site))
    throw std::invalid_argument("single_site_expectation: operator shape mismatch");
  Mps canon = state.center && *state.center == site ? state : canonicalize(state, site);
  const Tensor& c = canon.sites[site];
  const double n2 = c.norm() * c.norm();
  // op axes: (out physical, in physical); <c| op |c> contracts bonds directly.
  Tensor oc = contract(op, c, {{1, 1}});                      // (out, dl, dr)
  Tensor val = contract(c.conjugated(), oc, {{0, 1}, {1, 0}, {2, 2}});
  return scalar_value(val) / n2;
}

EntropyProfile entropy_profile(const Mps& state) {
  check_valid(state, "entropy_profile");
  const double n = norm(state);
  if (std::abs(n - 1.0) > 1e-8)
    throw std::invalid_argument("entropy_profile: state must be normalized");
  EntropyProfile profile;
  if (state.n_sites() == 1) return profile;

  Mps work = canonicalize(state, 0);
  for (std::size_t i = 0; i + 1 < work.n_sites(); ++i) {
    SvdResult dec = svd(work.sites[i], 2);
    double entropy = 0.0;
    for (double s : dec.s) {
      const double lambda = s * s;
      if (lambda > 1e-14) entropy -= lambda * std::log(lambda);
    }
    profile.cut_entropies.push_back(entropy);
    // Absorb s * vh into the next site to move the center one step right.
    Tensor sv = dec.vh;
    for (std::size_t r = 0; r < dec.s.size(); ++r)
      for (std::size_t cdim = 0; cdim < sv.dim(1); ++cdim)
        sv({r, cdim}) *= dec.s[r];
    work.sites[i] = std::move(dec.u);
    work.sites[i + 1] = contract(sv, work.sites[i + 1], {{1, 0}});
  }
  profile.max_entropy =
      *std::max_element(profile.cut_entropies.begin(), profile.cut_entropies.end());
  return profile;
}

Mps apply_parity_reflection(const Mps& state) {
  check_valid(state, "apply_parity_reflection");
  Mps out;
  const std::size_t n = state.n_sites();
  for (std::size_t i = 0; i < n; ++i)
    out.sites.push_back(state.sites[n - 1 - i].permuted({2, 1, 0}));
  if (state.center) out.center = n - 1 - *state.center;
  return out;
}

std::vector<cplx> dense_amplitudes(const Mps& state) {
  check_valid(state, "dense_amplitudes");
  double total = 1.0;
  for (std::size_t i = 0; i < state.n_sites(); ++i)
    total *= static_cast<double>(state.phys_dim(i));
  if (total > static_cast<double>(1 << 20))
    throw std::invalid_argument("dense_amplitudes: state too large to densify");

  // amp has axes (prefix, bond); prefix index is sum_{m<i} q_m d^m.
  Tensor amp({1, 1});
  amp[0] = 1.0;
  for (std::size_t i = 0; i < state.n_sites(); ++i) {
    Tensor t = contract(amp, state.sites[i], {{1, 0}});  // (prefix, phys, bond)
    const std::size_t p = t.dim(0), d = t.dim(1), b = t.dim(2);
    amp = t.permuted({1, 0, 2}).reshaped({d * p, b});     // index q*P + prefix
  }
  const std::size_t dim = amp.dim(0);
  std::vector<cplx> v(dim);
  for (std::size_t k = 0; k < dim; ++k) v[k] = amp[k];
  return v;
}

namespace {
constexpr char kMagic[8] = {'N', 'H', 'M', 'P', 'S', '0', '0', '1'};

void write_u64(std::ofstream& f, std::uint64_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& f) {
  std::uint64_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
}  // namespace

void save_mps(const Mps& state, const std::string& path) {
  check_valid(state, "save_mps");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_mps: cannot open " + path);
  f.write(kMagic, sizeof kMagic);
  write_u64(f, state.n_sites());
  write_u64(f, state.center ? *state.center + 1 : 0);
  for (const Tensor& t : state.sites) {
    write_u64(f, t.rank());
    for (std::size_t k = 0; k < t.rank(); ++k) write_u64(f, t.dim(k));
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(cplx)));
  }
  if (!f) throw std::runtime_error("save_mps: write failed for " + path);
}

Mps load_mps(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_mps: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("load_mps: unrecognized format tag in " + path);
  const std::uint64_t n = read_u64(f);
  const std::uint64_t center_tag = read_u64(f);
  if (n == 0 || n > (1u << 20)) throw std::runtime_error("load_mps: corrupt header");
  Mps state;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t rank = read_u64(f);
    if (rank != 3) throw std::runtime_error("load_mps: unexpected site tensor rank");
    std::vector<std::size_t> shape(rank);
    std::size_t sz = 1;
    for (auto& d : shape) {
      d = read_u64(f);
      sz *= d;
    }
    if (!f || sz == 0 || sz > (1u << 28)) throw std::runtime_error("load_mps: corrupt shape");
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(sz * sizeof(cplx)));
    state.sites.push_back(std::move(t));
  }
  if (!f) throw std::runtime_error("load_mps: truncated file " + path);
  if (center_tag > 0) state.center = center_tag - 1;
  check_valid(state, "load_mps");
  return state;
}

}  // namespace nhmps
