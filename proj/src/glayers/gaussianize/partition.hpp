#pragma once

#include <cstddef>
#include <vector>

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

/// Reversible map between a tensor and the D x N matrix whose columns are its non-overlapping
/// patches. Patches are ordered raster-wise over the patch grid and entries raster-wise within a
/// patch. An optional circular roll of the last two axes is applied before extraction.
class PatchPartition {
 public:
  PatchPartition(Shape tensor_dims, Shape patch_dims, std::vector<long> roll = {});

  const Shape& tensor_dims() const noexcept { return tensor_dims_; }
  const Shape& patch_dims() const noexcept { return patch_dims_; }
  const std::vector<long>& roll_offsets() const noexcept { return roll_; }
  std::size_t patch_dim() const noexcept { return d_; }    // D
  std::size_t patch_count() const noexcept { return n_; }  // N
  bool rolled() const noexcept;

  /// Same geometry, rolled by half a patch along the last two axes.
  PatchPartition with_half_patch_roll() const;

  Tensor partition(const Tensor& z) const;
  Tensor assemble(const Tensor& v) const;
  ad::Var partition(ad::Var z) const;
  ad::Var assemble(ad::Var v) const;

  /// Flat tensor index feeding entry (component, patch) of the patch matrix.
  const std::vector<std::size_t>& source_index() const noexcept { return src_; }

 private:
  Shape tensor_dims_;
  Shape patch_dims_;
  std::vector<long> roll_;
  std::size_t d_ = 0;
  std::size_t n_ = 0;
  std::vector<std::size_t> src_;  // row-major over the D x N matrix
  std::vector<std::size_t> inv_;  // tensor index -> matrix index
};

/// Circular shift with wrap-around: out[i] = in[i - shift] along each axis.
Tensor roll(const Tensor& t, const std::vector<long>& shifts);

}  // namespace glayers::gauss
