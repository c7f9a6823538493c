#include "nhmps/mpo.hpp"

#include <cmath>

#include "nhmps/linalg.hpp"

namespace nhmps {

namespace {

void check_valid(const Mpo& op, const char* who) {
  if (op.sites.empty()) throw std::invalid_argument(std::string(who) + ": empty operator");
  if (op.sites.front().dim(0) != 1 || op.sites.back().dim(3) != 1)
    throw std::invalid_argument(std::string(who) + ": edge bonds must have dimension 1");
  for (const Tensor& w : op.sites)
    if (w.rank() != 4 || w.dim(1) != w.dim(2))
      throw std::invalid_argument(std::string(who) + ": bad site tensor shape");
  for (std::size_t i = 0; i + 1 < op.n_sites(); ++i)
    if (op.sites[i].dim(3) != op.sites[i + 1].dim(0))
      throw std::invalid_argument(std::string(who) + ": bond dimension mismatch");
}

// Scales all idle-exit transitions of one site tensor by c. At the last site
// the single column already is the done state, so the whole idle row scales.
void scale_idle_exits(Tensor& w, cplx c, bool is_last) {
  const std::size_t d = w.dim(1), wr = w.dim(3);
  const std::size_t first_col = is_last ? 0 : 1;
  for (std::size_t q = 0; q < d; ++q)
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t v = first_col; v < wr; ++v) w({0, q, p, v}) *= c;
}

}  // namespace

std::size_t Mpo::max_bond_dim() const {
  std::size_t m = 1;
  for (const Tensor& s : sites) m = std::max(m, s.dim(3));
  return m;
}

Mpo identity_mpo(std::size_t n_sites, std::size_t phys_dim) {
  if (n_sites == 0 || phys_dim == 0) throw std::invalid_argument("identity_mpo: zero size");
  Mpo op;
  Tensor w({1, phys_dim, phys_dim, 1});
  for (std::size_t q = 0; q < phys_dim; ++q) w({0, q, q, 0}) = 1.0;
  op.sites.assign(n_sites, w);
  return op;
}

Mpo mpo_adjoint(const Mpo& op) {
  check_valid(op, "mpo_adjoint");
  Mpo out;
  for (const Tensor& w : op.sites) out.sites.push_back(w.permuted({0, 2, 1, 3}).conjugated());
  return out;
}

void mpo_shift_site(Tensor& w, cplx eps) {
  const std::size_t d = w.dim(1), wr = w.dim(3);
  for (std::size_t q = 0; q < d; ++q) w({0, q, q, wr - 1}) -= eps;
}

Mpo mpo_shift(const Mpo& op, cplx eps, std::size_t site) {
  check_valid(op, "mpo_shift");
  if (site >= op.n_sites()) throw std::invalid_argument("mpo_shift: bad site");
  Mpo out = op;
  mpo_shift_site(out.sites[site], eps);
  return out;
}

Tensor mpo_compose_site(const Tensor& wa, const Tensor& wb) {
  // (ul, q, s, vl) x (ur, s, p, vr) -> (ul, q, vl, ur, p, vr), then group the
  // bond pairs a-major so idle stays at 0 and done at the end.
  Tensor t = contract(wa, wb, {{2, 1}});
  t = t.permuted({0, 3, 1, 4, 2, 5});
  const std::size_t ua = t.dim(0), ub = t.dim(1), q = t.dim(2), p = t.dim(3),
                    va = t.dim(4), vb = t.dim(5);
  return t.reshaped({ua * ub, q, p, va * vb});
}

Mpo mpo_compose(const Mpo& a, const Mpo& b) {
  check_valid(a, "mpo_compose");
  check_valid(b, "mpo_compose");
  if (a.n_sites() != b.n_sites()) throw std::invalid_argument("mpo_compose: size mismatch");
  Mpo out;
  for (std::size_t i = 0; i < a.n_sites(); ++i)
    out.sites.push_back(mpo_compose_site(a.sites[i], b.sites[i]));
  return out;
}

Mpo mpo_compress(const Mpo& op, double rank_tol) {
  check_valid(op, "mpo_compress");
  Mpo out = op;
  const std::size_t n = out.n_sites();
  if (n == 1) return out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto [q, r] = qr_split(out.sites[i], 3);
    out.sites[i] = std::move(q);
    out.sites[i + 1] = contract(r, out.sites[i + 1], {{1, 0}});
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    SvdResult r = svd(out.sites[i], 1, 0, rank_tol);
    out.sites[i] = std::move(r.vh);
    Tensor us = std::move(r.u);  // (wl, k); fold the weights into the carry
    for (std::size_t a = 0; a < us.dim(0); ++a)
      for (std::size_t b = 0; b < us.dim(1); ++b) us({a, b}) *= r.s[b];
    out.sites[i - 1] = contract(out.sites[i - 1], us, {{3, 0}});
  }
  return out;
}

Mpo mpo_scale(const Mpo& op, cplx c) {
  check_valid(op, "mpo_scale");
  Mpo out = op;
  for (std::size_t i = 0; i < out.n_sites(); ++i)
    scale_idle_exits(out.sites[i], c, i + 1 == out.n_sites());
  return out;
}

Mpo mpo_add(const Mpo& a, const Mpo& b, cplx ca, cplx cb) {
  check_valid(a, "mpo_add");
  check_valid(b, "mpo_add");
  const std::size_t n = a.n_sites();
  if (b.n_sites() != n) throw std::invalid_argument("mpo_add: size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (a.phys_dim(i) != b.phys_dim(i))
      throw std::invalid_argument("mpo_add: physical dimension mismatch");

  if (n == 1) {
    Mpo out = a;
    Tensor w = a.sites[0];
    w *= ca;
    Tensor wb = b.sites[0];
    wb *= cb;
    w += wb;
    out.sites[0] = std::move(w);
    return out;
  }

  for (std::size_t i = 0; i + 1 < n; ++i)
    if (a.bond_dim(i) < 2 || b.bond_dim(i) < 2)
      throw std::invalid_argument("mpo_add: operands must have idle and done bond states");

  Mpo as = mpo_scale(a, ca);
  Mpo bs = mpo_scale(b, cb);

  Mpo out;
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor& wa = as.sites[i];
    const Tensor& wb = bs.sites[i];
    const bool first = i == 0, last = i + 1 == n;
    const std::size_t d = wa.dim(1);
    const std::size_t ua = wa.dim(0), va = wa.dim(3);
    const std::size_t ub = wb.dim(0), vb = wb.dim(3);
    // Merged bond layout: [idle, a middle states, b middle states, done].
    const std::size_t mu = first ? 1 : ua + ub - 2;
    const std::size_t mv = last ? 1 : va + vb - 2;

    Tensor w({mu, d, d, mv});
    auto add_block = [&](const Tensor& src, std::size_t mid_row_off,
                         std::size_t mid_col_off, bool skip_shared_identities) {
      const std::size_t rows = src.dim(0), cols = src.dim(3);
      for (std::size_t u = 0; u < rows; ++u) {
        for (std::size_t v = 0; v < cols; ++v) {
          // Both blocks carry idle->idle and done->done identity entries;
          // write them once (block a) and skip them for block b.
          if (skip_shared_identities) {
            if (!last && u == 0 && v == 0) continue;              // idle->idle
            if (!first && u == rows - 1 && v == cols - 1) continue;  // done->done
          }
          const std::size_t mr =
              first ? 0 : (u == 0 ? 0 : (u == rows - 1 ? mu - 1 : mid_row_off + u - 1));
          const std::size_t mc =
              last ? 0 : (v == 0 ? 0 : (v == cols - 1 ? mv - 1 : mid_col_off + v - 1));
          for (std::size_t q = 0; q < d; ++q)
            for (std::size_t p = 0; p < d; ++p)
              w({mr, q, p, mc}) += src({u, q, p, v});
        }
      }
    };
    add_block(wa, 1, 1, false);
    add_block(wb, ua - 1, va - 1, true);
    out.sites.push_back(std::move(w));
  }
  return out;
}

Mpo hermitian_part(const Mpo& op) {
  return mpo_add(op, mpo_adjoint(op), 0.5, 0.5);
}

Mpo antihermitian_part(const Mpo& op) {
  const cplx half_over_i(0.0, -0.5);  // 1 / (2i)
  return mpo_add(op, mpo_adjoint(op), half_over_i, -half_over_i);
}

Mpo spectral_rotation(const Mpo& op, double theta) {
  return mpo_scale(op, std::exp(cplx(0.0, theta - M_PI)));
}

Tensor mpo_dense(const Mpo& op) {
  check_valid(op, "mpo_dense");
  double total = 1.0;
  for (std::size_t i = 0; i < op.n_sites(); ++i) total *= static_cast<double>(op.phys_dim(i));
  if (total > 8192.0) throw std::invalid_argument("mpo_dense: operator too large to densify");

  // acc has axes (out prefix, in prefix, bond).
  Tensor acc({1, 1, 1});
  acc[0] = 1.0;
  for (const Tensor& w : op.sites) {
    Tensor t = contract(acc, w, {{2, 0}});            // (po, pi, q, p, wr)
    const std::size_t po = t.dim(0), pi = t.dim(1), q = t.dim(2), p = t.dim(3), wr = t.dim(4);
    acc = t.permuted({2, 0, 3, 1, 4}).reshaped({q * po, p * pi, wr});
  }
  const std::size_t dim = acc.dim(0);
  return acc.reshaped({dim, dim});
}

cplx expectation(const Mps& bra, const Mpo& op, const Mps& ket) {
  check_valid(op, "expectation");
  if (bra.n_sites() != op.n_sites() || ket.n_sites() != op.n_sites())
    throw std::invalid_argument("expectation: size mismatch");
  // env axes: (bra bond, mpo bond, ket bond)
  Tensor env({1, 1, 1});
  env[0] = 1.0;
  for (std::size_t i = 0; i < op.n_sites(); ++i) {
    Tensor t = contract(env, bra.sites[i].conjugated(), {{0, 0}});  // (w, k, q, b')
    t = contract(t, op.sites[i], {{0, 0}, {2, 1}});                 // (k, b', p, w')
    env = contract(t, ket.sites[i], {{0, 0}, {2, 1}});              // (b', w', k')
  }
  return scalar_value(env);
}

cplx expectation(const Mps& state, const Mpo& op) {
  const cplx n2 = overlap(state, state);
  return expectation(state, op, state) / n2;
}

}  // namespace nhmps
