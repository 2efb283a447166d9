#include "glayers/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "glayers/error.hpp"

namespace glayers {

static_assert(std::endian::native == std::endian::little, "GTNS I/O assumes a little-endian host");

std::size_t shape_size(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  os << ']';
  return os.str();
}

static void check_dims(const Shape& dims) {
  if (dims.empty()) fail(ErrorKind::Shape, "tensor rank must be at least 1");
  for (auto d : dims)
    if (d == 0) fail(ErrorKind::Shape, "tensor extents must be >= 1, got " + shape_string(dims));
}

Tensor::Tensor(Shape dims, double fill) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(shape_size(dims_), fill);
}

Tensor::Tensor(Shape dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (shape_size(dims_) != data_.size())
    fail(ErrorKind::Shape, "data length " + std::to_string(data_.size()) + " does not match " +
                               shape_string(dims_));
}

Tensor Tensor::vector(std::vector<double> data) {
  const auto n = data.size();
  return Tensor(Shape{n}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::from_matrix(const RowMatrix& m) {
  Tensor t = matrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  t.mat() = m;
  return t;
}

Tensor& Tensor::mark_complex() {
  if (dims_.empty() || dims_.back() != 2)
    fail(ErrorKind::Shape, "complex tensors need a trailing extent of 2");
  complex_ = true;
  return *this;
}

std::size_t Tensor::rows() const noexcept { return dims_.empty() ? 0 : dims_[0]; }

std::size_t Tensor::cols() const noexcept {
  if (dims_.size() < 2) return 1;
  return data_.size() / dims_[0];
}

double Tensor::item() const {
  if (data_.size() != 1) fail(ErrorKind::Shape, "item() needs a single-element tensor");
  return data_[0];
}

Tensor Tensor::reshaped(Shape dims) const {
  if (shape_size(dims) != data_.size())
    fail(ErrorKind::Shape, "cannot reshape " + shape_string(dims_) + " to " + shape_string(dims));
  return Tensor(std::move(dims), data_);
}

void require_same_dims(const Tensor& a, const Tensor& b, const char* where) {
  if (a.dims() != b.dims())
    fail(ErrorKind::Shape, std::string(where) + ": shape mismatch " + shape_string(a.dims()) + " vs " +
                               shape_string(b.dims()));
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "dot: size mismatch");
  return std::inner_product(a.storage().begin(), a.storage().end(), b.storage().begin(), 0.0);
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor axpy(double alpha, const Tensor& x, const Tensor& y) {
  require_same_dims(x, y, "axpy");
  Tensor out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * x[i];
  return out;
}

Tensor scaled(const Tensor& x, double alpha) {
  Tensor out = x;
  for (double& v : out.values()) v *= alpha;
  return out;
}

namespace {

constexpr char kMagic[4] = {'G', 'T', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) fail(ErrorKind::Io, "GTNS: truncated input");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_gtns(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * t.rank() + 8 * t.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.dims()) put<std::uint64_t>(out, d);
  for (double v : t.values()) put<double>(out, v);
  return out;
}

Tensor decode_gtns(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorKind::Io, "GTNS: bad magic");
  std::size_t pos = 4;
  if (auto version = take<std::uint32_t>(bytes, pos); version != kVersion)
    fail(ErrorKind::Io, "GTNS: unsupported version " + std::to_string(version));
  const auto rank = take<std::uint32_t>(bytes, pos);
  if (rank == 0 || rank > 16) fail(ErrorKind::Io, "GTNS: implausible rank");
  Shape dims(rank);
  for (auto& d : dims) d = static_cast<std::size_t>(take<std::uint64_t>(bytes, pos));
  const std::size_t n = shape_size(dims);
  if (bytes.size() - pos != n * sizeof(double)) fail(ErrorKind::Io, "GTNS: payload size mismatch");
  std::vector<double> data(n);
  std::memcpy(data.data(), bytes.data() + pos, n * sizeof(double));
  return Tensor(std::move(dims), std::move(data));
}

void write_gtns(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_gtns(t);
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
}

Tensor read_gtns(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_gtns(bytes);
}

}  // namespace glayers
