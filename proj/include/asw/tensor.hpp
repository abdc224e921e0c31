#pragma once

#include <Eigen/Dense>

#include <array>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

namespace asw {

/// Dense row-major tensor of up to 4 dimensions backed by an Eigen vector.
///
/// The flat storage order is canonical row-major: the last dimension varies
/// fastest. A rank-3 tensor indexed as (c, h, w) therefore stores channel
/// planes contiguously, which is the layout every op in this library assumes.
template <class Scalar>
class TensorT {
public:
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

  TensorT() = default;

  explicit TensorT(std::initializer_list<Eigen::Index> dims) { resize(dims); }

  static TensorT zeros(std::initializer_list<Eigen::Index> dims) {
    TensorT t(dims);
    t.data_.setZero();
    return t;
  }

  void resize(std::initializer_list<Eigen::Index> dims) {
    if (dims.size() < 1 || dims.size() > 4) {
      throw std::invalid_argument("TensorT: rank must be between 1 and 4");
    }
    rank_ = static_cast<int>(dims.size());
    Eigen::Index n = 1;
    int i = 0;
    for (Eigen::Index d : dims) {
      if (d <= 0) throw std::invalid_argument("TensorT: extents must be positive");
      dims_[i++] = d;
      n *= d;
    }
    for (; i < 4; ++i) dims_[i] = 1;
    data_.resize(n);
  }

  int rank() const { return rank_; }
  Eigen::Index dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  Eigen::Index size() const { return data_.size(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Vector& vec() { return data_; }
  const Vector& vec() const { return data_; }

  Eigen::Index flat_index(Eigen::Index a, Eigen::Index b) const {
    return a * dims_[1] + b;
  }
  Eigen::Index flat_index(Eigen::Index a, Eigen::Index b, Eigen::Index c) const {
    return (a * dims_[1] + b) * dims_[2] + c;
  }
  Eigen::Index flat_index(Eigen::Index a, Eigen::Index b, Eigen::Index c,
                          Eigen::Index d) const {
    return ((a * dims_[1] + b) * dims_[2] + c) * dims_[3] + d;
  }

  Scalar& operator()(Eigen::Index i) { return data_[i]; }
  Scalar operator()(Eigen::Index i) const { return data_[i]; }
  Scalar& operator()(Eigen::Index a, Eigen::Index b) { return data_[flat_index(a, b)]; }
  Scalar operator()(Eigen::Index a, Eigen::Index b) const { return data_[flat_index(a, b)]; }
  Scalar& operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c) {
    return data_[flat_index(a, b, c)];
  }
  Scalar operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c) const {
    return data_[flat_index(a, b, c)];
  }
  Scalar& operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c, Eigen::Index d) {
    return data_[flat_index(a, b, c, d)];
  }
  Scalar operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c, Eigen::Index d) const {
    return data_[flat_index(a, b, c, d)];
  }

  bool same_shape(const TensorT& o) const {
    return rank_ == o.rank_ && dims_ == o.dims_;
  }

  std::string shape_string() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < rank_; ++i) os << (i ? "x" : "") << dims_[static_cast<size_t>(i)];
    os << ']';
    return os.str();
  }

  bool all_finite() const { return data_.allFinite(); }

  /// View of one (H, W) channel plane of a rank-3 tensor as a row-major matrix.
  auto channel(Eigen::Index c) {
    return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data_.data() + c * dims_[1] * dims_[2], dims_[1], dims_[2]);
  }
  auto channel(Eigen::Index c) const {
    return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data_.data() + c * dims_[1] * dims_[2], dims_[1], dims_[2]);
  }

private:
  std::array<Eigen::Index, 4> dims_{1, 1, 1, 1};
  int rank_ = 0;
  Vector data_;
};

using Tensor = TensorT<double>;

namespace detail {
inline void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace detail

}  // namespace asw
