// AVX2 variants of the per-pixel kernels. Compiled with a function-level
// target attribute so the rest of the library stays baseline x86-64; the
// dispatcher only hands these out after checking CPUID.

#include "pdepth/kernels.hpp"

#if defined(PDEPTH_HAVE_AVX2)

#include <immintrin.h>

#include <bit>
#include <cmath>
#include <limits>

#include "pdepth/scalar_map.hpp"
#include "pixel_math.hpp"

#define PDEPTH_AVX2 __attribute__((target("avx2")))

namespace pdepth::kernels {
namespace {

constexpr std::size_t kLanes = 4;

PDEPTH_AVX2 inline __m256d load4(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

PDEPTH_AVX2 inline void store4(float* p, __m256d v) { _mm_storeu_ps(p, _mm256_cvtpd_ps(v)); }

PDEPTH_AVX2 inline __m256d finite_positive(__m256d v) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  return _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GT_OQ), _mm256_cmp_pd(v, inf, _CMP_LT_OQ));
}

PDEPTH_AVX2 inline __m256d usable_a(__m256d a, __m256d a_floor) {
  return _mm256_and_pd(_mm256_cmp_pd(a, a_floor, _CMP_GT_OQ),
                       _mm256_cmp_pd(a, _mm256_setzero_pd(), _CMP_GT_OQ));
}

PDEPTH_AVX2 inline std::size_t count_rejected(__m256d mask) {
  return kLanes - static_cast<std::size_t>(std::popcount(
                      static_cast<unsigned>(_mm256_movemask_pd(mask))));
}

PDEPTH_AVX2 void linear_params(const GeometryConstants& g, int width, int row_begin,
                               int row_end, double* a, double* c) {
  const __m256d nan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d cx = _mm256_set1_pd(g.cx);
  const __m256d ri0 = _mm256_set1_pd(g.ri[0]), ri1 = _mm256_set1_pd(g.ri[1]),
                ri2 = _mm256_set1_pd(g.ri[2]);
  const __m256d rj0 = _mm256_set1_pd(g.rj[0]), rj1 = _mm256_set1_pd(g.rj[1]),
                rj2 = _mm256_set1_pd(g.rj[2]);
  const __m256d rz0 = _mm256_set1_pd(g.rz[0]), rz1 = _mm256_set1_pd(g.rz[1]),
                rz2 = _mm256_set1_pd(g.rz[2]);
  const __m256d ftx = _mm256_set1_pd(g.ftx), fty = _mm256_set1_pd(g.fty);
  const __m256d tz = _mm256_set1_pd(g.tz);
  const __m256d neg_tz = _mm256_set1_pd(-g.tz);
  const __m256d zero = _mm256_setzero_pd();

  for (int y = row_begin; y < row_end; ++y) {
    const __m256d v = _mm256_set1_pd(static_cast<double>(y) - g.cy);
    const __m256d ri1v = _mm256_mul_pd(ri1, v);
    const __m256d rj1v = _mm256_mul_pd(rj1, v);
    const __m256d rz1v = _mm256_mul_pd(rz1, v);
    const std::size_t row = static_cast<std::size_t>(y) * width;
    int x = 0;
    for (; x + static_cast<int>(kLanes) <= width; x += kLanes) {
      const __m256d xs = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(x)), lane);
      const __m256d u = _mm256_sub_pd(xs, cx);
      const __m256d ni = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ri0, u), ri1v), ri2);
      const __m256d nj = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(rj0, u), rj1v), rj2);
      const __m256d zv = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(rz0, u), rz1v), rz2);
      const __m256d ok = _mm256_cmp_pd(zv, zero, _CMP_GT_OQ);
      const __m256d iv = _mm256_div_pd(ni, zv);
      const __m256d jv = _mm256_div_pd(nj, zv);
      const __m256d dx = _mm256_sub_pd(ftx, _mm256_mul_pd(tz, iv));
      const __m256d dy = _mm256_sub_pd(fty, _mm256_mul_pd(tz, jv));
      const __m256d norm =
          _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
      _mm256_storeu_pd(a + row + x, _mm256_blendv_pd(nan, _mm256_div_pd(norm, zv), ok));
      _mm256_storeu_pd(c + row + x, _mm256_blendv_pd(nan, _mm256_div_pd(neg_tz, zv), ok));
    }
    for (; x < width; ++x) {
      const auto px = detail::pixel_params(g, x, y);
      a[row + x] = px.ok ? px.a : std::numeric_limits<double>::quiet_NaN();
      c[row + x] = px.ok ? px.c : std::numeric_limits<double>::quiet_NaN();
    }
  }
}

PDEPTH_AVX2 inline __m256d depth4(__m256d a, __m256d c, __m256d a_floor, __m256d rho,
                                  __m256d& ok) {
  const __m256d z = _mm256_add_pd(_mm256_div_pd(a, rho), c);
  ok = _mm256_and_pd(_mm256_and_pd(finite_positive(rho), usable_a(a, a_floor)),
                     finite_positive(z));
  return z;
}

PDEPTH_AVX2 std::size_t depth_from_parallax(std::span<const double> a,
                                            std::span<const double> c, double a_floor,
                                            std::span<const float> rho,
                                            std::span<float> depth) {
  const __m256d invalid = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  const __m256d floor = _mm256_set1_pd(a_floor);
  const std::size_t n = rho.size();
  std::size_t rejected = 0;
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    __m256d ok;
    const __m256d z = depth4(_mm256_loadu_pd(&a[k]), _mm256_loadu_pd(&c[k]), floor,
                             load4(&rho[k]), ok);
    store4(&depth[k], _mm256_blendv_pd(invalid, z, ok));
    rejected += count_rejected(ok);
  }
  return rejected + scalar_table().depth_from_parallax(a.subspan(k), c.subspan(k), a_floor,
                                                       rho.subspan(k), depth.subspan(k));
}

PDEPTH_AVX2 std::size_t parallax_from_depth(std::span<const double> a,
                                            std::span<const double> c, double a_floor,
                                            std::span<const float> depth,
                                            std::span<float> rho) {
  const __m256d invalid = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  const __m256d floor = _mm256_set1_pd(a_floor);
  const std::size_t n = depth.size();
  std::size_t rejected = 0;
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    const __m256d z = load4(&depth[k]);
    const __m256d av = _mm256_loadu_pd(&a[k]);
    const __m256d cv = _mm256_loadu_pd(&c[k]);
    const __m256d ok =
        _mm256_and_pd(_mm256_and_pd(finite_positive(z), usable_a(av, floor)),
                      _mm256_cmp_pd(z, cv, _CMP_GT_OQ));
    const __m256d r = _mm256_div_pd(av, _mm256_sub_pd(z, cv));
    store4(&rho[k], _mm256_blendv_pd(invalid, r, ok));
    rejected += count_rejected(ok);
  }
  return rejected + scalar_table().parallax_from_depth(a.subspan(k), c.subspan(k), a_floor,
                                                       depth.subspan(k), rho.subspan(k));
}

PDEPTH_AVX2 std::size_t delta_depth(std::span<const double> a, std::span<const double> c,
                                    double a_floor, std::span<const float> rho,
                                    std::span<const float> sigma_rho, std::span<float> depth,
                                    std::span<float> delta) {
  const __m256d invalid = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  const __m256d floor = _mm256_set1_pd(a_floor);
  const __m256d one = _mm256_set1_pd(1.0);
  const std::size_t n = rho.size();
  std::size_t rejected = 0;
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    const __m256d r = load4(&rho[k]);
    const __m256d s = load4(&sigma_rho[k]);
    const __m256d cv = _mm256_loadu_pd(&c[k]);
    __m256d ok;
    const __m256d z = depth4(_mm256_loadu_pd(&a[k]), cv, floor, r, ok);
    ok = _mm256_and_pd(_mm256_and_pd(ok, finite_positive(s)), _mm256_cmp_pd(z, cv, _CMP_GT_OQ));
    const __m256d delta_rho = _mm256_div_pd(s, r);
    const __m256d dz = _mm256_mul_pd(delta_rho, _mm256_sub_pd(one, _mm256_div_pd(cv, z)));
    store4(&depth[k], _mm256_blendv_pd(invalid, z, ok));
    store4(&delta[k], _mm256_blendv_pd(invalid, dz, ok));
    rejected += count_rejected(ok);
  }
  return rejected + scalar_table().delta_depth(a.subspan(k), c.subspan(k), a_floor,
                                               rho.subspan(k), sigma_rho.subspan(k),
                                               depth.subspan(k), delta.subspan(k));
}

PDEPTH_AVX2 std::size_t sigma_depth(std::span<const double> a, std::span<const double> c,
                                    double a_floor, std::span<const float> rho,
                                    std::span<const float> sigma_zeta, std::span<float> depth,
                                    std::span<float> sigma_z) {
  const __m256d invalid = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  const __m256d floor = _mm256_set1_pd(a_floor);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const std::size_t n = rho.size();
  std::size_t rejected = 0;
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    const __m256d av = _mm256_loadu_pd(&a[k]);
    const __m256d s = load4(&sigma_zeta[k]);
    __m256d ok;
    const __m256d z = depth4(av, _mm256_loadu_pd(&c[k]), floor, load4(&rho[k]), ok);
    const __m256d s_ok =
        _mm256_and_pd(_mm256_cmp_pd(s, zero, _CMP_GE_OQ), _mm256_cmp_pd(s, inf, _CMP_LT_OQ));
    ok = _mm256_and_pd(ok, s_ok);
    store4(&depth[k], _mm256_blendv_pd(invalid, z, ok));
    store4(&sigma_z[k], _mm256_blendv_pd(invalid, _mm256_mul_pd(av, s), ok));
    rejected += count_rejected(ok);
  }
  return rejected + scalar_table().sigma_depth(a.subspan(k), c.subspan(k), a_floor,
                                               rho.subspan(k), sigma_zeta.subspan(k),
                                               depth.subspan(k), sigma_z.subspan(k));
}

PDEPTH_AVX2 DepthErrorSums depth_error_sums(std::span<const float> gt,
                                            std::span<const float> pred, double cap) {
  const __m256d capv = _mm256_set1_pd(cap);
  const __m256d threshold = _mm256_set1_pd(1.25);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::uint64_t n_valid = 0;
  std::uint64_t n_within = 0;
  const std::size_t n = gt.size();
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    const __m256d g = load4(&gt[k]);
    const __m256d p = load4(&pred[k]);
    const __m256d ok = _mm256_and_pd(
        _mm256_and_pd(finite_positive(g), _mm256_cmp_pd(g, capv, _CMP_LT_OQ)),
        finite_positive(p));
    const __m256d rel = _mm256_div_pd(_mm256_andnot_pd(sign, _mm256_sub_pd(p, g)), g);
    acc = _mm256_add_pd(acc, _mm256_and_pd(ok, rel));
    const __m256d ratio = _mm256_max_pd(_mm256_div_pd(p, g), _mm256_div_pd(g, p));
    const __m256d within = _mm256_and_pd(ok, _mm256_cmp_pd(ratio, threshold, _CMP_LT_OQ));
    n_valid += std::popcount(static_cast<unsigned>(_mm256_movemask_pd(ok)));
    n_within += std::popcount(static_cast<unsigned>(_mm256_movemask_pd(within)));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, acc);
  DepthErrorSums tail = scalar_table().depth_error_sums(gt.subspan(k), pred.subspan(k), cap);
  tail.abs_rel += (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  tail.n_valid += n_valid;
  tail.n_within_125 += n_within;
  return tail;
}

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{
      "avx2",       &linear_params, &depth_from_parallax, &parallax_from_depth,
      &delta_depth, &sigma_depth,   &depth_error_sums,
  };
  static const bool supported = cpu_has_avx2();
  return supported ? &table : nullptr;
}

}  // namespace pdepth::kernels

#else

namespace pdepth::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace pdepth::kernels

#endif
