#include "nhmps/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nhmps {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

using MatrixXc = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatrixXc>;
using ConstMapMat = Eigen::Map<const MatrixXc>;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), cplx(0.0)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    throw std::invalid_argument("Tensor: data size does not match shape");
}

Tensor Tensor::scalar(cplx v) {
  Tensor t(std::vector<std::size_t>{});
  t.data_ = {v};
  return t;
}

Tensor Tensor::eye(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw std::out_of_range("Tensor::dim: axis out of range");
  return shape_[axis];
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size())
    throw std::invalid_argument("Tensor: index rank mismatch");
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : idx) {
    if (i >= shape_[axis]) throw std::out_of_range("Tensor: index out of range");
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

cplx& Tensor::operator()(std::initializer_list<std::size_t> idx) {
  return data_[flat_index(idx)];
}

const cplx& Tensor::operator()(std::initializer_list<std::size_t> idx) const {
  return data_[flat_index(idx)];
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (shape_size(new_shape) != data_.size())
    throw std::invalid_argument("Tensor::reshaped: size mismatch");
  Tensor t;
  t.shape_ = std::move(new_shape);
  t.data_ = data_;
  return t;
}

Tensor Tensor::permuted(const std::vector<std::size_t>& perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw std::invalid_argument("Tensor::permuted: bad permutation size");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw std::invalid_argument("Tensor::permuted: invalid permutation");
    seen[p] = true;
  }

  std::vector<std::size_t> new_shape(r);
  for (std::size_t k = 0; k < r; ++k) new_shape[k] = shape_[perm[k]];

  Tensor out;
  out.shape_ = new_shape;
  out.data_.resize(data_.size());
  if (r == 0) {
    out.data_ = data_;
    return out;
  }

  // Input strides, then strides of the output's axes in input storage.
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t k = r; k-- > 1;) in_stride[k - 1] = in_stride[k] * shape_[k];
  std::vector<std::size_t> step(r);
  for (std::size_t k = 0; k < r; ++k) step[k] = in_stride[perm[k]];

  // Odometer walk over output indices; src tracks the input flat index.
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  const std::size_t total = data_.size();
  for (std::size_t dst = 0; dst < total; ++dst) {
    out.data_[dst] = data_[src];
    for (std::size_t k = r; k-- > 0;) {
      if (++idx[k] < new_shape[k]) {
        src += step[k];
        break;
      }
      src -= step[k] * (new_shape[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

Tensor Tensor::conjugated() const {
  Tensor t = *this;
  for (cplx& v : t.data_) v = std::conj(v);
  return t;
}

double Tensor::norm() const {
  double s = 0.0;
  for (const cplx& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Tensor::all_finite() const {
  for (const cplx& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

Tensor& Tensor::operator*=(cplx s) {
  for (cplx& v : data_) v *= s;
  return *this;
}

Tensor& Tensor::operator+=(const Tensor& o) {
  if (shape_ != o.shape_) throw std::invalid_argument("Tensor::operator+=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  if (shape_ != o.shape_) throw std::invalid_argument("Tensor::operator-=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<std::size_t, std::size_t>>& axes) {
  const std::size_t ra = a.rank(), rb = b.rank();
  std::vector<bool> a_contracted(ra, false), b_contracted(rb, false);
  std::size_t contracted_size = 1;
  for (auto [ia, ib] : axes) {
    if (ia >= ra || ib >= rb) throw std::invalid_argument("contract: axis out of range");
    if (a_contracted[ia] || b_contracted[ib])
      throw std::invalid_argument("contract: repeated axis");
    if (a.dim(ia) != b.dim(ib)) throw std::invalid_argument("contract: dimension mismatch");
    a_contracted[ia] = true;
    b_contracted[ib] = true;
    contracted_size *= a.dim(ia);
  }

  // Permute a to (free..., contracted...) and b to (contracted..., free...),
  // then a single GEMM does the work.
  std::vector<std::size_t> a_perm, b_perm;
  std::vector<std::size_t> out_shape;
  std::size_t a_free = 1, b_free = 1;
  for (std::size_t k = 0; k < ra; ++k)
    if (!a_contracted[k]) {
      a_perm.push_back(k);
      out_shape.push_back(a.dim(k));
      a_free *= a.dim(k);
    }
  for (auto [ia, ib] : axes) {
    (void)ib;
    a_perm.push_back(ia);
  }
  for (auto [ia, ib] : axes) {
    (void)ia;
    b_perm.push_back(ib);
  }
  for (std::size_t k = 0; k < rb; ++k)
    if (!b_contracted[k]) {
      b_perm.push_back(k);
      out_shape.push_back(b.dim(k));
      b_free *= b.dim(k);
    }

  Tensor ap = a.permuted(a_perm);
  Tensor bp = b.permuted(b_perm);

  Tensor out(out_shape);
  ConstMapMat ma(ap.data(), a_free, contracted_size);
  ConstMapMat mb(bp.data(), contracted_size, b_free);
  MapMat mo(out.data(), a_free, b_free);
  mo.noalias() = ma * mb;
  return out;
}

cplx scalar_value(const Tensor& t) {
  if (t.size() != 1) throw std::invalid_argument("scalar_value: tensor is not a scalar");
  return t[0];
}

void ensure_finite(const Tensor& t, const char* what) {
  if (!t.all_finite())
    throw std::runtime_error(std::string("non-finite values in ") + what);
}

std::uint64_t Rng::next_u64() {
  // splitmix64: tiny, seedable, identical everywhere.
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

cplx Rng::gaussian_cplx() {
  const double re = gaussian();
  const double im = gaussian();
  return {re, im};
}

}  // namespace nhmps
