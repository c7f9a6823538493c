#include "nhmps/models.hpp"

namespace nhmps {

Tensor identity2() { return Tensor::eye(2); }

Tensor pauli_z() {
  Tensor z({2, 2});
  z({0, 0}) = 1.0;
  z({1, 1}) = -1.0;
  return z;
}

Tensor sigma_plus() {
  Tensor s({2, 2});
  s({1, 0}) = 1.0;
  return s;
}

Tensor sigma_minus() {
  Tensor s({2, 2});
  s({0, 1}) = 1.0;
  return s;
}

Tensor number_op() {
  Tensor n({2, 2});
  n({1, 1}) = 1.0;
  return n;
}

Mpo build_nhssh(const ModelSpec& spec) {
  if (spec.n_cells == 0) throw std::invalid_argument("build_nhssh: need at least one cell");
  const bool pbc = spec.boundary == Boundary::PBC;
  if (pbc && spec.n_cells < 2)
    throw std::invalid_argument("build_nhssh: periodic boundaries need at least two cells");
  const std::size_t n = spec.n_sites();
  const bool interacting = spec.u != 0.0;

  // Finite-state machine over the MPO bond. State 0 is idle, the last state
  // is done; the middle states wait for the partner of a two-site term:
  //   1: sigma^+ emitted at the previous site (next site closes with sigma^-)
  //   2: sigma^- emitted                       (closes with sigma^+)
  //   3: n emitted (only if interacting)       (closes with n)
  // Periodic boundaries add channels that open at site 0 and close at the
  // last site, carrying the Jordan-Wigner Z string (or identity for n n):
  //   sp_string: sigma^+_0 Z ... Z sigma^-_{n-1}
  //   sm_string: sigma^-_0 Z ... Z sigma^+_{n-1}
  //   nn_string: u n_0 I ... I n_{n-1}
  std::size_t next = 3;
  const std::size_t nwait = interacting ? next++ : 0;
  const std::size_t sp_string = pbc ? next++ : 0;
  const std::size_t sm_string = pbc ? next++ : 0;
  const std::size_t nn_string = (pbc && interacting) ? next++ : 0;
  const std::size_t done = next;
  const std::size_t dw = next + 1;

  const Tensor id = identity2(), z = pauli_z(), sp = sigma_plus(), sm = sigma_minus(),
               nop = number_op();

  // Hop amplitudes for the bond starting at site m: even m is the intra-cell
  // bond (a_j, b_j), odd m the unit-strength inter-cell bond (b_j, a_{j+1}).
  auto forward_amp = [&](std::size_t m) { return m % 2 == 0 ? spec.t + spec.gamma / 2 : 1.0; };
  auto backward_amp = [&](std::size_t m) { return m % 2 == 0 ? spec.t - spec.gamma / 2 : 1.0; };

  Mpo op;
  for (std::size_t m = 0; m < n; ++m) {
    const bool first = m == 0, last = m + 1 == n;
    const std::size_t rows = first ? 1 : dw;
    const std::size_t cols = last ? 1 : dw;
    // Column/row index helpers collapse to 0 on the edge tensors.
    auto col = [&](std::size_t state) { return last ? 0 : state; };
    auto row = [&](std::size_t state) { return first ? 0 : state; };
    const std::size_t cdone = col(done);

    Tensor w({rows, 2, 2, cols});
    auto put = [&](std::size_t u, std::size_t v, const Tensor& o, double c = 1.0) {
      for (std::size_t q = 0; q < 2; ++q)
        for (std::size_t p = 0; p < 2; ++p) w({u, q, p, v}) += c * o({q, p});
    };

    if (!last) put(row(0), col(0), id);    // idle -> idle
    if (!first) put(row(done), cdone, id);  // done -> done

    put(row(0), cdone, nop, -spec.mu);  // on-site chemical potential

    if (!last) {  // open a nearest-neighbour pair ending at site m+1
      put(row(0), col(1), sp, forward_amp(m));
      put(row(0), col(2), sm, backward_amp(m));
      if (interacting) put(row(0), col(nwait), nop, spec.u);
    }
    if (!first) {  // close a pair opened at site m-1
      put(row(1), cdone, sm);
      put(row(2), cdone, sp);
      if (interacting) put(row(nwait), cdone, nop);
    }

    if (pbc) {
      if (first) {
        put(0, sp_string, sp);
        put(0, sm_string, sm);
        if (interacting) put(0, nn_string, nop, spec.u);
      } else if (last) {
        put(sp_string, 0, sm);
        put(sm_string, 0, sp);
        if (interacting) put(nn_string, 0, nop);
      } else {
        put(sp_string, sp_string, z);
        put(sm_string, sm_string, z);
        if (interacting) put(nn_string, nn_string, id);
      }
    }

    op.sites.push_back(std::move(w));
  }
  return op;
}

}  // namespace nhmps
