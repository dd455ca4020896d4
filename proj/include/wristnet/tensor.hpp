#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wristnet {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

// Dense row-major array of doubles with an explicit shape. Storage is
// aligned to Eigen's packet size: Eigen peels unaligned heads off vectorized
// reductions, so without a fixed alignment the same data could round
// differently depending on where the allocator put it.
class Tensor {
 public:
  using Storage = std::vector<double, Eigen::aligned_allocator<double>>;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::span<const double> data);
  Tensor(std::vector<std::size_t> shape, const std::vector<double>& data)
      : Tensor(std::move(shape), std::span<const double>(data)) {}
  Tensor(std::vector<std::size_t> shape, std::initializer_list<double> data)
      : Tensor(std::move(shape), std::span<const double>(data.begin(), data.size())) {}

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Views the tensor as a rows x cols matrix. Rank-1 tensors view as a
  // single row; rank-3 tensors fold the leading axes into rows.
  MatrixMap matrix();
  ConstMatrixMap matrix() const;
  VectorMap vector() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  ConstVectorMap vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  void fill(double value);
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::vector<std::size_t> shape_;
  Storage data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Throws DimensionError if `t` is not of the given shape.
void expect_shape(const Tensor& t, const std::vector<std::size_t>& shape, const char* what);
void expect_rank(const Tensor& t, std::size_t rank, const char* what);
// Throws NumericError naming `what` if any element is NaN or infinite.
void expect_finite(const Tensor& t, const char* what);

}  // namespace wristnet
