#include "nhmps/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nhmps {

namespace {

using MatrixXc = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXcd;
using ConstMapMat = Eigen::Map<const MatrixXc>;
using MapMat = Eigen::Map<MatrixXc>;

// Row/column sizes when the first `left_axes` axes are grouped as rows.
std::pair<std::size_t, std::size_t> grouped_dims(const Tensor& t, std::size_t left_axes) {
  if (left_axes == 0 || left_axes >= t.rank())
    throw std::invalid_argument("axis grouping must leave at least one axis on each side");
  std::size_t rows = 1, cols = 1;
  for (std::size_t k = 0; k < t.rank(); ++k)
    (k < left_axes ? rows : cols) *= t.dim(k);
  return {rows, cols};
}

std::vector<std::size_t> left_shape_with(const Tensor& t, std::size_t left_axes, std::size_t k) {
  std::vector<std::size_t> s(t.shape().begin(), t.shape().begin() + left_axes);
  s.push_back(k);
  return s;
}

std::vector<std::size_t> right_shape_with(const Tensor& t, std::size_t left_axes, std::size_t k) {
  std::vector<std::size_t> s{k};
  s.insert(s.end(), t.shape().begin() + left_axes, t.shape().end());
  return s;
}

ColMat to_eigen(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMapMat(t.data(), rows, cols);
}

Tensor from_eigen(const ColMat& m, std::vector<std::size_t> shape) {
  Tensor t(std::move(shape));
  MapMat(t.data(), m.rows(), m.cols()) = m;
  return t;
}

Tensor densify(const Matvec& apply, std::size_t dim) {
  Tensor m({dim, dim});
  for (std::size_t j = 0; j < dim; ++j) {
    Tensor e({dim});
    e[j] = 1.0;
    Tensor col = apply(e);
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + j] = col[i];
  }
  return m;
}

EigResult dense_eigh_smallest(const ColMat& h, std::size_t k) {
  Eigen::SelfAdjointEigenSolver<ColMat> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigh_smallest: dense eigensolver failed");
  EigResult r;
  const std::size_t dim = static_cast<std::size_t>(h.rows());
  for (std::size_t i = 0; i < k; ++i) {
    r.values.push_back(es.eigenvalues()(i));
    Tensor v({dim});
    Eigen::Map<Eigen::VectorXcd>(v.data(), dim) = es.eigenvectors().col(i);
    r.vectors.push_back(std::move(v));
  }
  r.converged = true;
  return r;
}

}  // namespace

std::pair<Tensor, Tensor> qr_split(const Tensor& t, std::size_t left_axes) {
  ensure_finite(t, "qr_split input");
  auto [rows, cols] = grouped_dims(t, left_axes);
  const std::size_t k = std::min(rows, cols);
  ColMat a = to_eigen(t, rows, cols);
  Eigen::HouseholderQR<ColMat> qr(a);
  ColMat q = qr.householderQ() * ColMat::Identity(rows, k);
  ColMat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return {from_eigen(q, left_shape_with(t, left_axes, k)),
          from_eigen(r, right_shape_with(t, left_axes, k))};
}

std::pair<Tensor, Tensor> lq_split(const Tensor& t, std::size_t right_axes) {
  ensure_finite(t, "lq_split input");
  const std::size_t left_axes = t.rank() - right_axes;
  auto [rows, cols] = grouped_dims(t, left_axes);
  const std::size_t k = std::min(rows, cols);
  // LQ of A from the QR of A^dag: A = (Q R)^dag with A^dag = Q R.
  ColMat ad = to_eigen(t, rows, cols).adjoint();
  Eigen::HouseholderQR<ColMat> qr(ad);
  ColMat qt = qr.householderQ() * ColMat::Identity(cols, k);
  ColMat rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  ColMat l = rt.adjoint();   // rows x k
  ColMat q = qt.adjoint();   // k x cols, right-isometric
  return {from_eigen(l, left_shape_with(t, left_axes, k)),
          from_eigen(q, right_shape_with(t, left_axes, k))};
}

SvdResult svd(const Tensor& t, std::size_t left_axes, std::size_t max_rank, double rank_tol) {
  ensure_finite(t, "svd input");
  auto [rows, cols] = grouped_dims(t, left_axes);
  ColMat a = to_eigen(t, rows, cols);
  // JacobiSVD, not BDCSVD: Eigen 3.4's BDCSVD silently returns a wrong
  // factorization (orthonormal U, V but U S V^H != A) for some wide complex
  // matrices with repeated or zero singular values, which MPO compositions
  // produce routinely. Matrices here are small, so the speed gap is moot.
  Eigen::JacobiSVD<ColMat> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = solver.singularValues();
  std::size_t k = static_cast<std::size_t>(sv.size());
  if (max_rank > 0) k = std::min(k, max_rank);
  // Numerical rank: drop values below rank_tol * s_max, but keep at least one.
  const double cutoff = sv.size() > 0 ? rank_tol * sv(0) : 0.0;
  while (k > 1 && sv(k - 1) < cutoff) --k;

  SvdResult r;
  r.u = from_eigen(solver.matrixU().leftCols(k), left_shape_with(t, left_axes, k));
  r.s.assign(sv.data(), sv.data() + k);
  r.vh = from_eigen(solver.matrixV().leftCols(k).adjoint(),
                    right_shape_with(t, left_axes, k));
  return r;
}

EigResult lanczos_smallest(const Matvec& apply, std::size_t dim, std::size_t k,
                           const std::optional<Tensor>& guess, double tol,
                           std::size_t max_iter, std::uint64_t seed) {
  if (k == 0 || dim == 0) throw std::invalid_argument("lanczos_smallest: empty problem");
  if (k > dim) throw std::invalid_argument("lanczos_smallest: k exceeds dimension");

  // Tiny problems: densify through the matvec and solve directly.
  if (dim <= std::max<std::size_t>(2 * k + 2, 8)) {
    Tensor m = densify(apply, dim);
    ColMat h = to_eigen(m, dim, dim);
    h = ((h + h.adjoint()) * 0.5).eval();
    EigResult r = dense_eigh_smallest(h, k);
    r.iterations = dim;
    return r;
  }

  Rng rng(seed);
  const std::size_t cap = std::min(max_iter + k, dim);

  ColMat basis(dim, cap);
  std::vector<double> alpha, beta;  // beta[j] couples basis j and j+1

  Eigen::VectorXcd v(dim);
  if (guess) {
    if (guess->size() != dim) throw std::invalid_argument("lanczos_smallest: bad guess size");
    v = Eigen::Map<const Eigen::VectorXcd>(guess->data(), dim);
  } else {
    for (std::size_t i = 0; i < dim; ++i) v(i) = rng.gaussian_cplx();
  }
  double nv = v.norm();
  if (!(nv > 0.0) || !std::isfinite(nv))
    throw std::invalid_argument("lanczos_smallest: invalid start vector");
  v /= nv;
  basis.col(0) = v;

  auto apply_vec = [&](const Eigen::VectorXcd& x) {
    Tensor tx({dim});
    Eigen::Map<Eigen::VectorXcd>(tx.data(), dim) = x;
    Tensor ty = apply(tx);
    if (ty.size() != dim) throw std::runtime_error("lanczos_smallest: matvec size mismatch");
    return Eigen::VectorXcd(Eigen::Map<const Eigen::VectorXcd>(ty.data(), dim));
  };

  EigResult result;
  double scale = 1e-300;
  std::size_t m = 1;  // current basis size
  Eigen::MatrixXd ritz_vecs;
  Eigen::VectorXd ritz_vals;

  auto tridiag_eig = [&]() {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    ritz_vals = es.eigenvalues();
    ritz_vecs = es.eigenvectors();
  };

  bool converged = false;
  while (m <= cap) {
    Eigen::VectorXcd w = apply_vec(basis.col(m - 1));
    alpha.push_back(basis.col(m - 1).dot(w).real());  // dot conjugates its left argument
    // Full reorthogonalization (twice) keeps the basis numerically orthonormal.
    w -= basis.leftCols(m) * (basis.leftCols(m).adjoint() * w).eval();
    w -= basis.leftCols(m) * (basis.leftCols(m).adjoint() * w).eval();
    double b = w.norm();

    tridiag_eig();
    for (std::size_t i = 0; i < m; ++i)
      scale = std::max(scale, std::abs(ritz_vals(i)));

    if (m >= k) {
      // Residual bound for Ritz pair i is |beta_m * (last component)|.
      bool all_ok = true;
      for (std::size_t i = 0; i < k; ++i)
        if (b * std::abs(ritz_vecs(m - 1, i)) > tol * scale) { all_ok = false; break; }
      if (all_ok) { converged = true; break; }
    }

    if (m == cap) break;

    if (b <= 1e-14 * scale) {
      // Invariant subspace found. If it already contains k pairs we are done;
      // otherwise continue in the orthogonal complement (beta = 0 keeps the
      // projected matrix block tridiagonal, so the Ritz data stays exact).
      if (m >= k) { converged = true; break; }
      Eigen::VectorXcd f(dim);
      for (std::size_t i = 0; i < dim; ++i) f(i) = rng.gaussian_cplx();
      f -= basis.leftCols(m) * (basis.leftCols(m).adjoint() * f).eval();
      f -= basis.leftCols(m) * (basis.leftCols(m).adjoint() * f).eval();
      const double nf = f.norm();
      if (!(nf > 1e-12)) break;
      basis.col(m) = f / nf;
      beta.push_back(0.0);
    } else {
      basis.col(m) = w / b;
      beta.push_back(b);
    }
    ++m;
  }

  tridiag_eig();
  const std::size_t n_out = std::min<std::size_t>(k, m);
  for (std::size_t i = 0; i < n_out; ++i) {
    result.values.push_back(ritz_vals(i));
    Eigen::VectorXcd x = basis.leftCols(m) * ritz_vecs.col(i).cast<cplx>();
    x /= x.norm();
    Tensor t({dim});
    Eigen::Map<Eigen::VectorXcd>(t.data(), dim) = x;
    result.vectors.push_back(std::move(t));
  }
  result.converged = converged && n_out == k;
  result.iterations = m;
  return result;
}

EigResult eigh_smallest(const Tensor& m, std::size_t k,
                        const std::optional<Tensor>& guess, double tol) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::invalid_argument("eigh_smallest: matrix must be square rank 2");
  ensure_finite(m, "eigh_smallest input");
  const std::size_t dim = m.dim(0);
  if (k == 0 || k > dim) throw std::invalid_argument("eigh_smallest: bad k");

  ColMat a = to_eigen(m, dim, dim);
  const double herm_dev = (a - a.adjoint()).norm();
  if (herm_dev > 1e-10 * std::max(1.0, a.norm()))
    throw std::invalid_argument("eigh_smallest: matrix is not Hermitian");
  ColMat h = ((a + a.adjoint()) * 0.5).eval();

  if (dim <= 4096) {
    EigResult r = dense_eigh_smallest(h, k);
    r.iterations = 1;
    return r;
  }

  Matvec apply = [&h, dim](const Tensor& x) {
    Tensor y({dim});
    Eigen::Map<Eigen::VectorXcd>(y.data(), dim) =
        h * Eigen::Map<const Eigen::VectorXcd>(x.data(), dim);
    return y;
  };
  EigResult r = lanczos_smallest(apply, dim, k, guess, tol);
  if (!r.converged)
    throw std::runtime_error("eigh_smallest: Lanczos iteration cap exceeded");
  return r;
}

DenseEig dense_eig(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::invalid_argument("dense_eig: matrix must be square rank 2");
  ensure_finite(m, "dense_eig input");
  const std::size_t dim = m.dim(0);
  ColMat a = to_eigen(m, dim, dim);

  Eigen::ComplexEigenSolver<ColMat> es(a, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_eig: eigensolver failed");

  // Sort by (Re, Im).
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXcd& vals = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (vals(i).real() != vals(j).real()) return vals(i).real() < vals(j).real();
    return vals(i).imag() < vals(j).imag();
  });

  DenseEig out;
  out.values.resize(dim);
  ColMat right(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out.values[i] = vals(order[i]);
    right.col(i) = es.eigenvectors().col(order[i]);
  }

  // Left rows from the inverse of the right basis: V^{-1} M = Lambda V^{-1},
  // so row i acts as <l_i| (l_i^dag M = lambda_i l_i^dag), exactly
  // biorthogonal to the right columns and matched by construction. The same
  // inverse yields a 1-norm condition estimate; a numerically defective
  // basis has no trustworthy biorthogonal partners, so `left` stays empty.
  Eigen::PartialPivLU<ColMat> lu(right);
  ColMat vinv = lu.inverse();
  out.right = from_eigen(right, {dim, dim});
  if (vinv.allFinite()) {
    const double norm_v = right.cwiseAbs().colwise().sum().maxCoeff();
    const double norm_vinv = vinv.cwiseAbs().colwise().sum().maxCoeff();
    out.condition = norm_v * norm_vinv;
  } else {
    out.condition = std::numeric_limits<double>::infinity();
  }
  out.defective = !(out.condition < 1e12);
  if (!out.defective) out.left = from_eigen(vinv, {dim, dim});
  return out;
}

cplx LogDet::value() const { return std::exp(log_abs) * phase; }

LogDet logdet_lu(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::invalid_argument("logdet_lu: matrix must be square rank 2");
  const std::size_t dim = m.dim(0);
  LogDet r;
  if (dim == 0) return r;  // det of the empty matrix is 1
  ColMat a = to_eigen(m, dim, dim);
  Eigen::PartialPivLU<ColMat> lu(a);
  r.phase = static_cast<double>(lu.permutationP().determinant());
  for (std::size_t i = 0; i < dim; ++i) {
    const cplx d = lu.matrixLU()(i, i);
    const double ad = std::abs(d);
    if (ad == 0.0) {
      r.log_abs = -std::numeric_limits<double>::infinity();
      r.phase = 0.0;
      return r;
    }
    r.log_abs += std::log(ad);
    r.phase *= d / ad;
  }
  return r;
}

Tensor inverse(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::invalid_argument("inverse: matrix must be square rank 2");
  const std::size_t dim = m.dim(0);
  ColMat a = to_eigen(m, dim, dim);
  Eigen::PartialPivLU<ColMat> lu(a);
  for (std::size_t i = 0; i < dim; ++i)
    if (std::abs(lu.matrixLU()(i, i)) < 1e-300)
      throw std::runtime_error("inverse: matrix is numerically singular");
  return from_eigen(lu.inverse(), {dim, dim});
}

}  // namespace nhmps
