#pragma once

// Per-pixel arithmetic shared by the scalar API, the scalar kernels and
// (operation for operation) the SIMD kernels. Any change here must be
// mirrored in every SIMD variant or the equivalence tests will fail.

#include <cmath>

#include "pdepth/kernels.hpp"

namespace pdepth::kernels::detail {

struct PixelParams {
  double a;
  double c;
  bool ok;  // false when the virtual depth factor is not positive
};

inline PixelParams pixel_params(const GeometryConstants& g, double i, double j) {
  const double u = i - g.cx;
  const double v = j - g.cy;
  const double ni = g.ri[0] * u + g.ri[1] * v + g.ri[2];
  const double nj = g.rj[0] * u + g.rj[1] * v + g.rj[2];
  const double zv = g.rz[0] * u + g.rz[1] * v + g.rz[2];
  if (!(zv > 0.0)) return {0.0, 0.0, false};
  const double iv = ni / zv;
  const double jv = nj / zv;
  const double dx = g.ftx - g.tz * iv;
  const double dy = g.fty - g.tz * jv;
  return {std::sqrt(dx * dx + dy * dy) / zv, -g.tz / zv, true};
}

inline bool usable_a(double a, double a_floor) { return a > a_floor && a > 0.0; }

}  // namespace pdepth::kernels::detail
