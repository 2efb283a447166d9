#pragma once

#include <memory>
#include <string>

#include "glayers/forward/eikonal.hpp"
#include "glayers/forward/imaging.hpp"
#include "glayers/tensor.hpp"

namespace glayers::fwd {

/// Physics operator f: simulate data from a model image and pull back a data residual.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;
  virtual std::string name() const = 0;
  virtual Tensor simulate(const Tensor& m) const = 0;
  /// Gradient of 1/2 ||simulate(m) - d||^2 with respect to m, given r = simulate(m) - d.
  virtual Tensor vjp(const Tensor& m, const Tensor& r) const = 0;
};

class BlurModel final : public ForwardModel {
 public:
  explicit BlurModel(double sigma) : sigma_(sigma) {}
  std::string name() const override { return "deblur"; }
  Tensor simulate(const Tensor& m) const override { return blur(m, sigma_); }
  Tensor vjp(const Tensor&, const Tensor& r) const override { return blur_vjp(r, sigma_); }

 private:
  double sigma_;
};

class CsmriModel final : public ForwardModel {
 public:
  explicit CsmriModel(Tensor mask) : mask_(std::move(mask)) {}
  std::string name() const override { return "csmri"; }
  Tensor simulate(const Tensor& m) const override { return csmri_forward(m, mask_); }
  Tensor vjp(const Tensor&, const Tensor& r) const override { return csmri_vjp(r, mask_); }
  const Tensor& mask() const { return mask_; }

 private:
  Tensor mask_;
};

/// Receiver traveltimes in milliseconds for the velocity velocity_map(m).
class EikonalModel final : public ForwardModel {
 public:
  explicit EikonalModel(EikonalGeometry g, EikonalOptions opt = {}) : geom_(std::move(g)), opt_(opt) {}
  std::string name() const override { return "eikonal"; }
  Tensor simulate(const Tensor& m) const override {
    return scaled(traveltime_table(velocity_map(m), geom_, opt_), kMillisecond);
  }
  Tensor vjp(const Tensor& m, const Tensor& r) const override {
    const Tensor gc = traveltime_gradient(velocity_map(m), geom_, scaled(r, kMillisecond), opt_);
    return velocity_map_vjp(m, gc);
  }
  const EikonalGeometry& geometry() const { return geom_; }

  static constexpr double kMillisecond = 1e3;

 private:
  EikonalGeometry geom_;
  EikonalOptions opt_;
};

}  // namespace glayers::fwd
