#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace glayers {

using Shape = std::vector<std::size_t>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

std::size_t shape_size(const Shape& dims);
std::string shape_string(const Shape& dims);

/// Dense row-major array of doubles. Complex data carries a trailing extent of 2 (re, im).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape dims, double fill = 0.0);
  Tensor(Shape dims, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> data);
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor(Shape{rows, cols}, fill);
  }
  static Tensor identity(std::size_t n);
  static Tensor from_matrix(const RowMatrix& m);

  const Shape& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// True when the trailing extent is 2 and the tensor is flagged complex.
  bool is_complex() const noexcept { return complex_; }
  Tensor& mark_complex();

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Matrix view; vectors are treated as columns.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  MatrixMap mat() { return MatrixMap(data_.data(), rows(), cols()); }
  ConstMatrixMap mat() const { return ConstMatrixMap(data_.data(), rows(), cols()); }

  double item() const;
  Tensor reshaped(Shape dims) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  Shape dims_;
  std::vector<double> data_;
  bool complex_ = false;
};

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
Tensor axpy(double alpha, const Tensor& x, const Tensor& y);  // alpha*x + y
Tensor scaled(const Tensor& x, double alpha);
void require_same_dims(const Tensor& a, const Tensor& b, const char* where);

/// GTNS container: "GTNS", u32 version=1, u32 rank, u64 extents, f64 payload (all little-endian).
void write_gtns(const Tensor& t, const std::filesystem::path& path);
Tensor read_gtns(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_gtns(const Tensor& t);
Tensor decode_gtns(std::span<const std::uint8_t> bytes);

}  // namespace glayers
