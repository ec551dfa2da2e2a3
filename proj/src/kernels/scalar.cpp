#include <cmath>
#include <limits>

#include "pdepth/kernels.hpp"
#include "pdepth/scalar_map.hpp"
#include "pixel_math.hpp"

namespace pdepth::kernels {
namespace {

using detail::usable_a;

void linear_params(const GeometryConstants& g, int width, int row_begin, int row_end,
                   double* a, double* c) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (int y = row_begin; y < row_end; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto idx = static_cast<std::size_t>(y) * width + x;
      const auto p = detail::pixel_params(g, x, y);
      a[idx] = p.ok ? p.a : kNaN;
      c[idx] = p.ok ? p.c : kNaN;
    }
  }
}

// Pixel-level depth; returns false when the pixel is not convertible.
inline bool depth_at(double a, double c, double a_floor, float rho, double& z) {
  if (!(std::isfinite(rho) && rho > 0.0f) || !usable_a(a, a_floor)) return false;
  z = a / static_cast<double>(rho) + c;
  return std::isfinite(z) && z > 0.0;
}

std::size_t depth_from_parallax(std::span<const double> a, std::span<const double> c,
                                double a_floor, std::span<const float> rho,
                                std::span<float> depth) {
  std::size_t invalid = 0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    double z;
    if (depth_at(a[k], c[k], a_floor, rho[k], z)) {
      depth[k] = static_cast<float>(z);
    } else {
      depth[k] = kInvalidPixel;
      ++invalid;
    }
  }
  return invalid;
}

std::size_t parallax_from_depth(std::span<const double> a, std::span<const double> c,
                                double a_floor, std::span<const float> depth,
                                std::span<float> rho) {
  std::size_t invalid = 0;
  for (std::size_t k = 0; k < depth.size(); ++k) {
    const double z = depth[k];
    const bool ok = std::isfinite(z) && z > 0.0 && usable_a(a[k], a_floor) && z > c[k];
    if (ok) {
      rho[k] = static_cast<float>(a[k] / (z - c[k]));
    } else {
      rho[k] = kInvalidPixel;
      ++invalid;
    }
  }
  return invalid;
}

std::size_t delta_depth(std::span<const double> a, std::span<const double> c, double a_floor,
                        std::span<const float> rho, std::span<const float> sigma_rho,
                        std::span<float> depth, std::span<float> delta) {
  std::size_t invalid = 0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    double z;
    const float s = sigma_rho[k];
    if (depth_at(a[k], c[k], a_floor, rho[k], z) && std::isfinite(s) && s > 0.0f &&
        z > c[k]) {
      const double delta_rho = static_cast<double>(s) / static_cast<double>(rho[k]);
      depth[k] = static_cast<float>(z);
      delta[k] = static_cast<float>(delta_rho * (1.0 - c[k] / z));
    } else {
      depth[k] = kInvalidPixel;
      delta[k] = kInvalidPixel;
      ++invalid;
    }
  }
  return invalid;
}

std::size_t sigma_depth(std::span<const double> a, std::span<const double> c, double a_floor,
                        std::span<const float> rho, std::span<const float> sigma_zeta,
                        std::span<float> depth, std::span<float> sigma_z) {
  std::size_t invalid = 0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    double z;
    const float s = sigma_zeta[k];
    if (depth_at(a[k], c[k], a_floor, rho[k], z) && std::isfinite(s) && s >= 0.0f) {
      depth[k] = static_cast<float>(z);
      sigma_z[k] = static_cast<float>(a[k] * static_cast<double>(s));
    } else {
      depth[k] = kInvalidPixel;
      sigma_z[k] = kInvalidPixel;
      ++invalid;
    }
  }
  return invalid;
}

DepthErrorSums depth_error_sums(std::span<const float> gt, std::span<const float> pred,
                                double cap) {
  DepthErrorSums sums;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double g = gt[k];
    const double p = pred[k];
    if (!(std::isfinite(g) && g > 0.0 && g < cap && std::isfinite(p) && p > 0.0)) continue;
    sums.abs_rel += std::abs(p - g) / g;
    sums.n_valid += 1;
    const double ratio = p > g ? p / g : g / p;
    sums.n_within_125 += ratio < 1.25 ? 1 : 0;
  }
  return sums;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",          &linear_params, &depth_from_parallax, &parallax_from_depth,
      &delta_depth,      &sigma_depth,   &depth_error_sums,
  };
  return table;
}

}  // namespace pdepth::kernels
