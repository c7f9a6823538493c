#include "nhmps/vmps.hpp"

#include <cmath>
#include <numeric>

namespace nhmps {

Tensor transfer_left(const Tensor& env, const Tensor& w, const Tensor& site) {
  // env (b, m, k), bra site conj (b, q, b'), mpo (m, q, p, m'), ket (k, p, k')
  Tensor t = contract(env, site.conjugated(), {{0, 0}});  // (m, k, q, b')
  t = contract(t, w, {{0, 0}, {2, 1}});                   // (k, b', p, m')
  return contract(t, site, {{0, 0}, {2, 1}});             // (b', m', k')
}

Tensor transfer_right(const Tensor& env, const Tensor& w, const Tensor& site) {
  // env (b, m, k) holds the bonds to the right of the site
  Tensor t = contract(site, env, {{2, 2}});               // (k', p, b, m)
  t = contract(w, t, {{2, 1}, {3, 3}});                   // (m', q, k', b)
  return contract(site.conjugated(), t, {{1, 1}, {2, 3}});  // (b', m', k')
}

EnvironmentCache build_environments(const Mpo& op, const Mps& state) {
  const std::size_t n = op.n_sites();
  if (state.n_sites() != n) throw std::invalid_argument("build_environments: size mismatch");
  EnvironmentCache cache;
  cache.left.resize(n + 1);
  cache.right.resize(n + 1);
  Tensor edge({1, 1, 1});
  edge[0] = 1.0;
  cache.left[0] = edge;
  cache.right[n] = edge;
  for (std::size_t i = 0; i < n; ++i)
    cache.left[i + 1] = transfer_left(cache.left[i], op.sites[i], state.sites[i]);
  for (std::size_t i = n; i-- > 0;)
    cache.right[i] = transfer_right(cache.right[i + 1], op.sites[i], state.sites[i]);
  return cache;
}

std::size_t LocalOp::dim() const {
  return l->dim(2) * w->dim(2) * r->dim(2);
}

Tensor LocalOp::apply(const Tensor& x) const {
  const std::size_t dl = l->dim(2), d = w->dim(2), dr = r->dim(2);
  Tensor xs = x.rank() == 3 ? x : x.reshaped({dl, d, dr});
  Tensor t = contract(*l, xs, {{2, 0}});        // (b', m, p, k)
  t = contract(t, *w, {{1, 0}, {2, 2}});        // (b', k, q, m')
  t = contract(t, *r, {{1, 2}, {3, 1}});        // (b', q, b'')
  if (x.rank() != 3) return t.reshaped({t.size()});
  return t;
}

Tensor LocalOp::dense() const {
  const std::size_t n = dim();
  if (n > 4096) throw std::invalid_argument("LocalOp::dense: too large");
  Tensor m({n, n});
  for (std::size_t j = 0; j < n; ++j) {
    Tensor e({n});
    e[j] = 1.0;
    Tensor col = apply(e);
    for (std::size_t i = 0; i < n; ++i) m({i, j}) = col[i];
  }
  return m;
}

LocalOp local_effective_op(const EnvironmentCache& cache, const Tensor& op_site,
                           std::size_t site) {
  return LocalOp{&cache.left[site], &op_site, &cache.right[site + 1]};
}

std::pair<Mps, SweepReport> ground_state(const Mpo& op, const SweepConfig& cfg,
                                         const std::optional<Mps>& init) {
  const std::size_t n = op.n_sites();
  Mps state = init ? canonicalize(*init, 0)
                   : random_mps(n, op.phys_dim(0), cfg.bond_dim, cfg.seed);
  state = normalized(state);

  EnvironmentCache cache = build_environments(op, state);
  SweepReport report;

  auto solve_site = [&](std::size_t i) {
    LocalOp hef = local_effective_op(cache, op.sites[i], i);
    Matvec apply = [&hef](const Tensor& x) { return hef.apply(x); };
    Tensor guess = state.sites[i].reshaped({state.sites[i].size()});
    EigResult eig = lanczos_smallest(apply, hef.dim(), 1, guess, cfg.eig_tol,
                                     cfg.krylov_cap, cfg.seed + 7 * i + 13);
    state.sites[i] = eig.vectors[0].reshaped(
        {state.sites[i].dim(0), state.sites[i].dim(1), state.sites[i].dim(2)});
    return eig.values[0];
  };
  auto move_right = [&](std::size_t i) {
    auto [q, r] = qr_split(state.sites[i], 2);
    state.sites[i] = std::move(q);
    state.sites[i + 1] = contract(r, state.sites[i + 1], {{1, 0}});
    cache.left[i + 1] = transfer_left(cache.left[i], op.sites[i], state.sites[i]);
  };
  auto move_left = [&](std::size_t i) {
    auto [lfac, q] = lq_split(state.sites[i], 2);
    state.sites[i] = std::move(q);
    state.sites[i - 1] = contract(state.sites[i - 1], lfac, {{2, 0}});
    cache.right[i] = transfer_right(cache.right[i + 1], op.sites[i], state.sites[i]);
  };

  for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    std::vector<double> forward, backward;
    if (n == 1) {
      forward.push_back(solve_site(0));
      backward = forward;
    } else {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        forward.push_back(solve_site(i));
        move_right(i);
      }
      for (std::size_t i = n - 1; i > 0; --i) {
        backward.push_back(solve_site(i));
        move_left(i);
      }
    }
    const double ef = std::accumulate(forward.begin(), forward.end(), 0.0) / forward.size();
    const double eb = std::accumulate(backward.begin(), backward.end(), 0.0) / backward.size();
    report.energy_trace.push_back(eb);
    report.energy = eb;
    report.sweeps = sweep;
    if (std::abs(ef - eb) < cfg.tol) {
      report.converged = true;
      break;
    }
  }

  state.center = 0;
  state = normalized(state);
  return {std::move(state), std::move(report)};
}

}  // namespace nhmps
