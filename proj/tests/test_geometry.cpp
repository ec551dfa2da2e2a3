#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "pdepth/errors.hpp"
#include "pdepth/geometry.hpp"
#include "test_support.hpp"

using namespace pdepth;
using testing_support::brute_force_parallax;
using testing_support::random_rotation;
using testing_support::virtual_ray;

namespace {

CameraIntrinsics camera() { return {120.0, 110.0, 63.5, 47.5, 128, 96}; }

RelativePose pose(Vec3 t, Quaternion q = {}) {
  RelativePose p;
  p.rotation = q;
  p.translation = t;
  return p;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(LinearDepthParams, PureBackwardMotionAtCentre) {
  const CameraIntrinsics k{1.0, 1.0, 0.0, 0.0, 1, 1};
  const auto p = linear_depth_params(k, pose({0, 0, -1}), 0.0, 0.0);
  EXPECT_EQ(p.a, 0.0);
  EXPECT_EQ(p.c, 1.0);
}

TEST(LinearDepthParams, IdentityRotationAnchorIsExact) {
  const auto k = camera();
  const auto p = pose({0.3, -0.2, 0.7});
  for (int j = 0; j < k.height; j += 7) {
    for (int i = 0; i < k.width; i += 5) {
      const auto v = virtual_coords(k, p, i, j);
      EXPECT_EQ(v.zv, 1.0);
      EXPECT_EQ(v.iv, i - k.cx);
      EXPECT_EQ(v.jv, j - k.cy);
    }
  }
}

TEST(LinearDepthParams, VirtualCoordsMatchRotatedRay) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pi(0.0, 127.0), pj(0.0, 95.0);
  const auto k = camera();
  int checked = 0;
  for (int n = 0; n < 10000; ++n) {
    const auto q = random_rotation(rng);
    const double i = pi(rng), j = pj(rng);
    const auto h = virtual_ray(k, q, i, j);
    if (!(h[2] > 1e-3)) continue;
    const auto v = virtual_coords(k, pose({0.1, 0.0, 0.0}, q), i, j);
    EXPECT_NEAR(v.zv, h[2], 1e-9);
    EXPECT_NEAR(v.iv, k.fx * h[0] / h[2], 1e-9 * std::max(1.0, std::abs(v.iv)));
    EXPECT_NEAR(v.jv, k.fy * h[1] / h[2], 1e-9 * std::max(1.0, std::abs(v.jv)));
    ++checked;
  }
  EXPECT_GT(checked, 4000);
}

TEST(LinearDepthParams, RadicalExpressionOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> f(50.0, 800.0), t(-2.0, 2.0), frac(0.0, 1.0);
  for (int n = 0; n < 2000; ++n) {
    CameraIntrinsics k{f(rng), f(rng), 0.0, 0.0, 320, 240};
    k.cx = frac(rng) * 319.0;
    k.cy = frac(rng) * 239.0;
    const auto q = random_rotation(rng);
    const auto p = pose({t(rng), t(rng), t(rng)}, q);
    const double i = frac(rng) * 319.0, j = frac(rng) * 239.0;
    const auto h = virtual_ray(k, q, i, j);
    if (!(h[2] > 1e-2)) continue;
    const long double zv = h[2];
    const long double iv = k.fx * h[0] / zv, jv = k.fy * h[1] / zv;
    const long double dx = k.fx * p.translation[0] - p.translation[2] * iv;
    const long double dy = k.fy * p.translation[1] - p.translation[2] * jv;
    const double a = static_cast<double>(std::sqrt(dx * dx + dy * dy) / zv);
    const double c = static_cast<double>(-p.translation[2] / zv);
    const auto got = linear_depth_params(k, p, i, j);
    EXPECT_NEAR(got.a, a, 1e-9 * std::max(1.0, a));
    EXPECT_NEAR(got.c, c, 1e-9 * std::max(1.0, std::abs(c)));
  }
}

TEST(LinearDepthParams, TwoViewProjectionOracle) {
  // Place a point at depth z, project it from both camera centres, and check
  // that the parallax produced by the formula is the measured displacement.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> t(-1.0, 1.0), z(1.0, 50.0), pi(0.0, 127.0),
      pj(0.0, 95.0);
  const auto k = camera();
  int checked = 0;
  for (int n = 0; n < 5000; ++n) {
    const auto q = random_rotation(rng);
    const auto p = pose({t(rng), t(rng), t(rng)}, q);
    const double i = pi(rng), j = pj(rng), depth = z(rng);
    const auto h = virtual_ray(k, q, i, j);
    if (!(h[2] > 0.05) || !(h[2] * depth + p.translation[2] > 0.05)) continue;
    const auto params = linear_depth_params(k, p, i, j);
    if (params.a < 1e-3) continue;
    const double rho = brute_force_parallax(k, p, i, j, depth);
    EXPECT_NEAR(parallax_from_depth(params, depth), rho, 1e-9 * std::max(1.0, rho));
    EXPECT_NEAR(depth_from_parallax(params, rho), depth, 1e-9 * depth);
    ++checked;
  }
  EXPECT_GT(checked, 2000);
}

TEST(LinearDepthParams, QuarterTurnAboutOpticalAxis) {
  // 90 degrees about z: the virtual ray of pixel offset (u, v) is (v, -u).
  const double s = std::sqrt(0.5);
  const CameraIntrinsics k{100.0, 100.0, 50.0, 50.0, 101, 101};
  const auto p = pose({0.5, 0.0, 0.0}, {s, 0.0, 0.0, s});
  const auto v = virtual_coords(k, p, 70.0, 40.0);
  EXPECT_NEAR(v.iv, -10.0, 1e-12);
  EXPECT_NEAR(v.jv, -20.0, 1e-12);
  EXPECT_NEAR(v.zv, 1.0, 1e-15);
}

TEST(LinearDepthParams, RayBehindVirtualCameraIsDegenerate) {
  const CameraIntrinsics k{100.0, 100.0, 50.0, 50.0, 101, 101};
  // Half turn about y flips every ray behind the image plane.
  const auto p = pose({0.0, 0.0, 1.0}, {0.0, 0.0, 1.0, 0.0});
  EXPECT_EQ(code_of([&] { linear_depth_params(k, p, 10.0, 10.0); }),
            ErrorCode::kDegenerateGeometry);
}

TEST(LinearDepthParams, InvalidInputs) {
  const auto k = camera();
  EXPECT_EQ(code_of([&] { linear_depth_params(k, pose({1, 0, 0}, {0.9, 0, 0, 0}), 1, 1); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { linear_depth_params(k, pose({1, 0, 0}), 128.5, 1); }),
            ErrorCode::kDomain);
  CameraIntrinsics bad = k;
  bad.fx = 0.0;
  EXPECT_EQ(code_of([&] { linear_depth_params(bad, pose({1, 0, 0}), 1, 1); }),
            ErrorCode::kInvalidArgument);
}

TEST(DepthFromParallax, HandExamples) {
  EXPECT_EQ(depth_from_parallax({1.0, 0.0}, 0.5), 2.0);
  EXPECT_EQ(depth_from_parallax({2.0, -1.0}, 1.0), 1.0);
  EXPECT_EQ(parallax_from_depth({1.0, 0.0}, 2.0), 0.5);
  EXPECT_EQ(parallax_from_depth({2.0, -1.0}, 3.0), 0.5);
}

TEST(DepthFromParallax, RandomAgainstLongDouble) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> a(1e-3, 1e3), c(-5.0, 5.0), rho(1e-3, 1e2);
  for (int n = 0; n < 100000; ++n) {
    const LinearDepthParams p{a(rng), c(rng)};
    const double r = rho(rng);
    const long double expect = static_cast<long double>(p.a) / r + p.c;
    if (!(expect > 1e-6)) continue;
    const double got = depth_from_parallax(p, r);
    EXPECT_LE(std::abs((got - expect) / expect), 1e-12);
  }
}

TEST(DepthFromParallax, Errors) {
  EXPECT_EQ(code_of([] { depth_from_parallax({1.0, 0.0}, 0.0); }), ErrorCode::kDomain);
  EXPECT_EQ(code_of([] { depth_from_parallax({1.0, 0.0}, -1.0); }), ErrorCode::kDomain);
  EXPECT_EQ(code_of([] { depth_from_parallax({0.0, 1.0}, 1.0); }), ErrorCode::kNoParallax);
  EXPECT_EQ(code_of([] { depth_from_parallax({1e-13, 0.0, 1e-12}, 1.0); }),
            ErrorCode::kNoParallax);
  EXPECT_EQ(code_of([] { depth_from_parallax({1.0, -3.0}, 1.0); }), ErrorCode::kBehindCamera);
  EXPECT_EQ(code_of([] { parallax_from_depth({1.0, 2.0}, 2.0); }), ErrorCode::kExistence);
  EXPECT_EQ(code_of([] { parallax_from_depth({1.0, 2.0}, 1.5); }), ErrorCode::kExistence);
  EXPECT_EQ(code_of([] { parallax_from_depth({1.0, 0.0}, 0.0); }), ErrorCode::kDomain);
}

TEST(DepthFromParallax, StrictlyDecreasingInParallax) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> a(0.1, 100.0), c(-2.0, 2.0), rho(0.01, 10.0);
  for (int n = 0; n < 10000; ++n) {
    const LinearDepthParams p{a(rng), c(rng)};
    double r1 = rho(rng), r2 = rho(rng);
    if (r1 == r2) continue;
    if (r1 > r2) std::swap(r1, r2);
    if (!(p.a / r2 + p.c > 0.0)) continue;
    EXPECT_GT(depth_from_parallax(p, r1), depth_from_parallax(p, r2));
  }
}

TEST(DepthMaps, RoundTripThroughFloatStorage) {
  const auto k = camera();
  const Quaternion q{0.995, 0.05, -0.07, 0.03};
  const double n = q.norm();
  const auto p = pose({0.4, 0.1, -0.6}, {q.w / n, q.x / n, q.y / n, q.z / n});
  const auto depth = testing_support::random_map(k.width, k.height, Quantity::kDepth, 2.0, 80.0, 3);
  const auto rho = parallax_map_from_depth_map(k, p, depth);
  EXPECT_EQ(rho.invalid_count, 0u);
  const auto back = depth_map_from_parallax_map(k, p, rho.map);
  const auto rho2 = parallax_map_from_depth_map(k, p, back.map);
  for (std::size_t n = 0; n < depth.size(); ++n) {
    const double r = rho.map.data()[n];
    EXPECT_LT(std::abs(rho2.map.data()[n] - r) / r, 1e-6);
  }
  const auto field = params_field(k, p);
  for (std::size_t n = 0; n < depth.size(); n += 97) {
    const double r = rho.map.data()[n];
    const LinearDepthParams lp{field.a[n], field.c[n]};
    EXPECT_LT(std::abs(parallax_from_depth(lp, depth_from_parallax(lp, r)) - r) / r, 1e-9);
  }
}

TEST(DepthMaps, ConstantParallaxUnderLateralTranslation) {
  const auto k = camera();
  const auto p = pose({0.5, 0.0, 0.0});
  const ScalarMap rho(k.width, k.height, Quantity::kParallax, 2.0f);
  const auto out = depth_map_from_parallax_map(k, p, rho);
  EXPECT_EQ(out.invalid_count, 0u);
  for (int j = 0; j < k.height; j += 9) {
    for (int i = 0; i < k.width; i += 13) {
      const auto lp = linear_depth_params(k, p, i, j);
      EXPECT_EQ(out.map.at(i, j), static_cast<float>(depth_from_parallax(lp, 2.0)));
    }
  }
}

TEST(DepthMaps, SinglePixelReducesToScalar) {
  const CameraIntrinsics k{50.0, 50.0, 0.0, 0.0, 1, 1};
  const auto p = pose({0.2, 0.1, 0.3});
  const ScalarMap rho(1, 1, Quantity::kParallax, 1.5f);
  const auto out = depth_map_from_parallax_map(k, p, rho);
  EXPECT_EQ(out.map.at(0, 0), static_cast<float>(depth_from_parallax(
                                  linear_depth_params(k, p, 0.0, 0.0), 1.5)));
}

TEST(DepthMaps, AllInvalidInput) {
  const auto k = camera();
  const ScalarMap rho(k.width, k.height, Quantity::kParallax, -1.0f);
  const auto out = depth_map_from_parallax_map(k, pose({0.5, 0.0, 0.0}), rho);
  EXPECT_EQ(out.invalid_count, rho.size());
  EXPECT_EQ(out.map.count_invalid(), rho.size());
}

TEST(DepthMaps, ShapeAndTagChecks) {
  const auto k = camera();
  const ScalarMap small(4, 4, Quantity::kParallax, 1.0f);
  EXPECT_EQ(code_of([&] { depth_map_from_parallax_map(k, pose({1, 0, 0}), small); }),
            ErrorCode::kShapeMismatch);
  const ScalarMap depth(k.width, k.height, Quantity::kDepth, 1.0f);
  EXPECT_EQ(code_of([&] { depth_map_from_parallax_map(k, pose({1, 0, 0}), depth); }),
            ErrorCode::kInvalidArgument);
}
