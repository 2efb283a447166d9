#include "glayers/invert/metrics.hpp"

#include <cmath>
#include <vector>

#include "glayers/error.hpp"

namespace glayers::inv {

double psnr(const Tensor& ref, const Tensor& test, double peak) {
  require_same_dims(ref, test, "psnr");
  if (!(peak > 0.0)) fail(ErrorKind::Domain, "psnr: peak must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) mse += (ref[i] - test[i]) * (ref[i] - test[i]);
  mse /= static_cast<double>(ref.size());
  if (mse < 1e-10) return 100.0;
  return std::min(100.0, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Tensor& ref, const Tensor& test, double peak) {
  require_same_dims(ref, test, "ssim");
  if (ref.rank() != 2) fail(ErrorKind::Shape, "ssim: 2D images expected");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  const std::size_t h = ref.dims()[0], w = ref.dims()[1];
  if (h < kWin || w < kWin) fail(ErrorKind::Shape, "ssim: images smaller than the 11 x 11 window");

  std::vector<double> win(kWin * kWin);
  double total = 0.0;
  for (int a = 0; a < kWin; ++a)
    for (int b = 0; b < kWin; ++b) {
      const double da = a - kWin / 2, db = b - kWin / 2;
      total += win[a * kWin + b] = std::exp(-(da * da + db * db) / (2.0 * kSigma * kSigma));
    }
  for (double& v : win) v /= total;

  const double c1 = std::pow(0.01 * peak, 2), c2 = std::pow(0.03 * peak, 2);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + kWin <= h; ++i)
    for (std::size_t j = 0; j + kWin <= w; ++j) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int a = 0; a < kWin; ++a)
        for (int b = 0; b < kWin; ++b) {
          const double wt = win[a * kWin + b];
          const double x = ref[(i + a) * w + j + b], y = test[(i + a) * w + j + b];
          mx += wt * x;
          my += wt * y;
          sxx += wt * x * x;
          syy += wt * y * y;
          sxy += wt * x * y;
        }
      const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
      acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace glayers::inv
