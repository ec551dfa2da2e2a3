#pragma once

// Data-parallel per-pixel kernels. Every kernel has a scalar reference
// implementation; SIMD variants are selected at runtime when the CPU
// supports them. Elementwise kernels are bit-identical across variants
// (same operation order, IEEE-exact div/sqrt, no FMA contraction).
// Reductions may differ in summation order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace pdepth::kernels {

/// Camera and motion constants folded into the per-pixel projection:
///   ni = ri . (u, v, 1), nj = rj . (u, v, 1), zv = rz . (u, v, 1)
/// with u = i - cx, v = j - cy, and iv = ni / zv, jv = nj / zv.
struct GeometryConstants {
  double cx = 0.0;
  double cy = 0.0;
  double ri[3] = {1.0, 0.0, 0.0};
  double rj[3] = {0.0, 1.0, 0.0};
  double rz[3] = {0.0, 0.0, 1.0};
  double ftx = 0.0;  // fx * tx
  double fty = 0.0;  // fy * ty
  double tz = 0.0;
};

/// Sums over pixels with finite gt in (0, cap) and finite pred > 0.
struct DepthErrorSums {
  double abs_rel = 0.0;
  std::uint64_t n_valid = 0;
  std::uint64_t n_within_125 = 0;
};

struct KernelTable {
  std::string_view name;

  // Fills row-major a/c for rows [row_begin, row_end); NaN where zv <= 0.
  void (*linear_params)(const GeometryConstants& g, int width, int row_begin, int row_end,
                        double* a, double* c);

  // depth = a / rho + c. Returns the number of pixels set to the invalid marker.
  std::size_t (*depth_from_parallax)(std::span<const double> a, std::span<const double> c,
                                     double a_floor, std::span<const float> rho,
                                     std::span<float> depth);

  // rho = a / (z - c), requires z > 0 and z > c.
  std::size_t (*parallax_from_depth)(std::span<const double> a, std::span<const double> c,
                                     double a_floor, std::span<const float> depth,
                                     std::span<float> rho);

  // depth as above plus relative depth uncertainty
  // delta_z = (sigma / rho) * (1 - c / depth).
  std::size_t (*delta_depth)(std::span<const double> a, std::span<const double> c,
                             double a_floor, std::span<const float> rho,
                             std::span<const float> sigma_rho, std::span<float> depth,
                             std::span<float> delta);

  // depth as above plus absolute depth sigma a * sigma_zeta.
  std::size_t (*sigma_depth)(std::span<const double> a, std::span<const double> c,
                             double a_floor, std::span<const float> rho,
                             std::span<const float> sigma_zeta, std::span<float> depth,
                             std::span<float> sigma_z);

  DepthErrorSums (*depth_error_sums)(std::span<const float> gt, std::span<const float> pred,
                                     double cap);
};

const KernelTable& scalar_table();

/// AVX2 variants, or nullptr when not compiled in or unsupported by the CPU.
const KernelTable* avx2_table();

/// Table used by the library. Chosen once from the CPU features; the
/// PDEPTH_KERNELS environment variable ("scalar", "avx2", "auto") overrides.
const KernelTable& active();

/// Force a table (tests and benchmarking). Passing nullptr restores auto.
void set_active(const KernelTable* table);

}  // namespace pdepth::kernels
