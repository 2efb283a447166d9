#include "glayers/gaussianize/partition.hpp"

#include <algorithm>

#include "glayers/error.hpp"

namespace glayers::gauss {

namespace {

std::vector<std::size_t> strides_of(const Shape& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

// Source index of `out_index` in a tensor rolled by `shifts`.
std::size_t rolled_source(std::size_t out_index, const Shape& dims, const std::vector<std::size_t>& strides,
                          const std::vector<long>& shifts) {
  std::size_t src = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    const std::size_t coord = (out_index / strides[a]) % dims[a];
    const long shift = a < shifts.size() ? shifts[a] : 0;
    src += wrap(static_cast<long>(coord) - shift, dims[a]) * strides[a];
  }
  return src;
}

}  // namespace

PatchPartition::PatchPartition(Shape tensor_dims, Shape patch_dims, std::vector<long> roll)
    : tensor_dims_(std::move(tensor_dims)), patch_dims_(std::move(patch_dims)), roll_(std::move(roll)) {
  const std::size_t rank = tensor_dims_.size();
  if (rank == 0 || patch_dims_.empty() || patch_dims_.size() > rank)
    fail(ErrorKind::Shape, "partition: patch rank must be between 1 and the tensor rank");
  patch_dims_.insert(patch_dims_.begin(), rank - patch_dims_.size(), 1);
  if (!roll_.empty() && roll_.size() != rank) {
    if (roll_.size() > rank) fail(ErrorKind::Shape, "partition: too many roll offsets");
    roll_.insert(roll_.begin(), rank - roll_.size(), 0);
  }

  Shape grid(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    if (patch_dims_[a] == 0 || tensor_dims_[a] % patch_dims_[a] != 0)
      fail(ErrorKind::Shape, "partition: patch " + shape_string(patch_dims_) + " does not divide tensor " +
                                 shape_string(tensor_dims_));
    grid[a] = tensor_dims_[a] / patch_dims_[a];
  }
  d_ = shape_size(patch_dims_);
  n_ = shape_size(grid);

  const auto tstride = strides_of(tensor_dims_);
  const auto pstride = strides_of(patch_dims_);
  const auto gstride = strides_of(grid);
  const std::size_t total = d_ * n_;
  src_.resize(total);
  inv_.resize(total);
  for (std::size_t comp = 0; comp < d_; ++comp) {
    for (std::size_t patch = 0; patch < n_; ++patch) {
      std::size_t idx = 0;
      for (std::size_t a = 0; a < rank; ++a) {
        const std::size_t pc = (comp / pstride[a]) % patch_dims_[a];
        const std::size_t gc = (patch / gstride[a]) % grid[a];
        idx += (gc * patch_dims_[a] + pc) * tstride[a];
      }
      if (!roll_.empty()) idx = rolled_source(idx, tensor_dims_, tstride, roll_);
      src_[comp * n_ + patch] = idx;
    }
  }
  for (std::size_t i = 0; i < total; ++i) inv_[src_[i]] = i;
}

bool PatchPartition::rolled() const noexcept {
  return std::any_of(roll_.begin(), roll_.end(), [](long r) { return r != 0; });
}

PatchPartition PatchPartition::with_half_patch_roll() const {
  std::vector<long> shifts(tensor_dims_.size(), 0);
  const std::size_t rank = tensor_dims_.size();
  for (std::size_t a = rank >= 2 ? rank - 2 : 0; a < rank; ++a)
    shifts[a] = static_cast<long>(patch_dims_[a] / 2);
  return PatchPartition(tensor_dims_, patch_dims_, shifts);
}

Tensor PatchPartition::partition(const Tensor& z) const {
  if (z.dims() != tensor_dims_)
    fail(ErrorKind::Shape, "partition: expected " + shape_string(tensor_dims_) + ", got " +
                               shape_string(z.dims()));
  Tensor v = Tensor::matrix(d_, n_);
  for (std::size_t i = 0; i < src_.size(); ++i) v[i] = z[src_[i]];
  return v;
}

Tensor PatchPartition::assemble(const Tensor& v) const {
  if (v.size() != d_ * n_) fail(ErrorKind::Shape, "assemble: patch matrix has the wrong size");
  Tensor z(tensor_dims_);
  for (std::size_t i = 0; i < inv_.size(); ++i) z[i] = v[inv_[i]];
  return z;
}

ad::Var PatchPartition::partition(ad::Var z) const {
  if (z.dims() != tensor_dims_) fail(ErrorKind::Shape, "partition: tensor dims mismatch");
  return ad::gather(z, src_, Shape{d_, n_});
}

ad::Var PatchPartition::assemble(ad::Var v) const {
  if (v.size() != d_ * n_) fail(ErrorKind::Shape, "assemble: patch matrix has the wrong size");
  return ad::gather(v, inv_, tensor_dims_);
}

Tensor roll(const Tensor& t, const std::vector<long>& shifts) {
  const auto strides = strides_of(t.dims());
  Tensor out(t.dims());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[rolled_source(i, t.dims(), strides, shifts)];
  return out;
}

}  // namespace glayers::gauss
