#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nhmps {

using cplx = std::complex<double>;

// Dense complex tensor with row-major (last index fastest) storage.
// This is the single value type threaded through the whole library:
// MPS/MPO site tensors, environments, dense matrices and vectors.
class Tensor {
 public:
  Tensor() = default;

  // Zero tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);

  Tensor(std::vector<std::size_t> shape, std::vector<cplx> data);

  static Tensor scalar(cplx v);

  // Identity matrix of dimension n (rank 2).
  static Tensor eye(std::size_t n);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }

  cplx& operator[](std::size_t flat) { return data_[flat]; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  // Multi-index element access, e.g. t({i, j, k}).
  cplx& operator()(std::initializer_list<std::size_t> idx);
  const cplx& operator()(std::initializer_list<std::size_t> idx) const;

  // Reshape to a new shape of equal total size. Cheap (storage is shared
  // layout-wise); returns a copy with the new shape.
  Tensor reshaped(std::vector<std::size_t> new_shape) const;

  // Permute axes: result axis k is input axis perm[k].
  Tensor permuted(const std::vector<std::size_t>& perm) const;

  Tensor conjugated() const;

  double norm() const;        // Frobenius norm
  double max_abs() const;

  bool all_finite() const;

  Tensor& operator*=(cplx s);
  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);

  friend Tensor operator*(cplx s, Tensor t) { t *= s; return t; }
  friend Tensor operator*(Tensor t, cplx s) { t *= s; return t; }
  friend Tensor operator+(Tensor a, const Tensor& b) { a += b; return a; }
  friend Tensor operator-(Tensor a, const Tensor& b) { a -= b; return a; }

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> idx) const;

  std::vector<std::size_t> shape_;
  std::vector<cplx> data_;
};

// Contraction of a and b over the given axis pairs (axis_of_a, axis_of_b).
// Free axes of a (in order) are followed by free axes of b. Contracting all
// axes of both yields a rank-0 tensor holding the scalar result.
Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<std::size_t, std::size_t>>& axes);

// Scalar value of a rank-0 (or single-element) tensor.
cplx scalar_value(const Tensor& t);

// Throws std::runtime_error mentioning `what` if t holds NaN or Inf.
void ensure_finite(const Tensor& t, const char* what);

// Deterministic RNG used everywhere randomness is needed, so that a fixed
// seed reproduces runs bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64();
  double uniform();               // [0, 1)
  double gaussian();              // standard normal (Box-Muller)
  cplx gaussian_cplx();           // independent N(0,1) real and imaginary parts

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nhmps
