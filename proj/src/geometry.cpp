#include "pdepth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernels/pixel_math.hpp"
#include "pdepth/errors.hpp"
#include "pdepth/kernels.hpp"

namespace pdepth {
namespace {

constexpr double kUnitQuaternionTolerance = 1e-9;
constexpr double kNoParallaxRelative = 1e-12;

kernels::GeometryConstants fold_constants(const CameraIntrinsics& k, const RelativePose& pose) {
  // h = ((i-cx)/fx, (j-cy)/fy, 1) is rotated by R^-1 = R^T. The fx/fy
  // factors are folded so that an identity rotation reproduces u and v
  // exactly.
  const Mat3 r = rotation_matrix(pose.rotation);
  kernels::GeometryConstants g;
  g.cx = k.cx;
  g.cy = k.cy;
  g.ri[0] = r[0];
  g.ri[1] = r[3] * (k.fx / k.fy);
  g.ri[2] = r[6] * k.fx;
  g.rj[0] = r[1] * (k.fy / k.fx);
  g.rj[1] = r[4];
  g.rj[2] = r[7] * k.fy;
  g.rz[0] = r[2] / k.fx;
  g.rz[1] = r[5] / k.fy;
  g.rz[2] = r[8];
  g.ftx = k.fx * pose.translation[0];
  g.fty = k.fy * pose.translation[1];
  g.tz = pose.translation[2];
  return g;
}

void require_pixel(const CameraIntrinsics& k, double i, double j) {
  if (!(i >= 0.0 && i <= k.width - 1.0 && j >= 0.0 && j <= k.height - 1.0)) {
    fail(ErrorCode::kDomain, "pixel (" + std::to_string(i) + ", " + std::to_string(j) +
                                 ") outside the " + std::to_string(k.width) + "x" +
                                 std::to_string(k.height) + " image");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, std::string(what) + " is not finite");
}

}  // namespace

void CameraIntrinsics::validate() const {
  require_finite(fx, "fx");
  require_finite(fy, "fy");
  require_finite(cx, "cx");
  require_finite(cy, "cy");
  if (!(fx > 0.0 && fy > 0.0)) fail(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  if (width < 1 || height < 1) fail(ErrorCode::kInvalidArgument, "image size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    fail(ErrorCode::kInvalidArgument, "principal point outside the image");
  }
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

void RelativePose::validate() const {
  for (double v : {rotation.w, rotation.x, rotation.y, rotation.z}) require_finite(v, "rotation");
  for (double v : translation) require_finite(v, "translation");
  if (std::abs(rotation.norm() - 1.0) > kUnitQuaternionTolerance) {
    fail(ErrorCode::kInvalidArgument, "rotation quaternion is not unit length");
  }
}

Mat3 rotation_matrix(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  return {1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z),       2.0 * (x * z + w * y),
          2.0 * (x * y + w * z),       1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
          2.0 * (x * z - w * y),       2.0 * (y * z + w * x),       1.0 - 2.0 * (x * x + y * y)};
}

VirtualCoords virtual_coords(const CameraIntrinsics& intrinsics, const RelativePose& pose,
                             double i, double j) {
  intrinsics.validate();
  pose.validate();
  require_pixel(intrinsics, i, j);
  const auto g = fold_constants(intrinsics, pose);
  const double u = i - g.cx;
  const double v = j - g.cy;
  const double zv = g.rz[0] * u + g.rz[1] * v + g.rz[2];
  return {(g.ri[0] * u + g.ri[1] * v + g.ri[2]) / zv, (g.rj[0] * u + g.rj[1] * v + g.rj[2]) / zv,
          zv};
}

double no_parallax_floor(const CameraIntrinsics& intrinsics, const RelativePose& pose) {
  const auto& t = pose.translation;
  const double t_norm = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
  return kNoParallaxRelative * std::max(intrinsics.fx, intrinsics.fy) * t_norm;
}

LinearDepthParams linear_depth_params(const CameraIntrinsics& intrinsics,
                                      const RelativePose& pose, double i, double j) {
  intrinsics.validate();
  pose.validate();
  require_pixel(intrinsics, i, j);
  const auto px = kernels::detail::pixel_params(fold_constants(intrinsics, pose), i, j);
  if (!px.ok) {
    fail(ErrorCode::kDegenerateGeometry,
         "ray rotated onto or behind the image plane (z_V <= 0)");
  }
  return {px.a, px.c, no_parallax_floor(intrinsics, pose)};
}

double depth_from_parallax(const LinearDepthParams& params, double rho) {
  if (!(std::isfinite(rho) && rho > 0.0)) fail(ErrorCode::kDomain, "parallax must be positive");
  if (!kernels::detail::usable_a(params.a, params.a_floor)) {
    fail(ErrorCode::kNoParallax, "camera motion yields no parallax at this pixel");
  }
  const double z = params.a / rho + params.c;
  if (!(z > 0.0)) fail(ErrorCode::kBehindCamera, "depth is not positive");
  return z;
}

double parallax_from_depth(const LinearDepthParams& params, double z) {
  if (!(std::isfinite(z) && z > 0.0)) fail(ErrorCode::kDomain, "depth must be positive");
  if (!kernels::detail::usable_a(params.a, params.a_floor)) {
    fail(ErrorCode::kNoParallax, "camera motion yields no parallax at this pixel");
  }
  if (!(z > params.c)) {
    fail(ErrorCode::kExistence,
         "condition of existence violated: z_V * z + t_z <= 0 (depth " + std::to_string(z) +
             " <= c " + std::to_string(params.c) + ")");
  }
  return params.a / (z - params.c);
}

ParamsField params_field(const CameraIntrinsics& intrinsics, const RelativePose& pose) {
  intrinsics.validate();
  pose.validate();
  ParamsField field;
  field.width = intrinsics.width;
  field.height = intrinsics.height;
  field.a_floor = no_parallax_floor(intrinsics, pose);
  const auto n = static_cast<std::size_t>(intrinsics.width) * intrinsics.height;
  field.a.resize(n);
  field.c.resize(n);
  kernels::active().linear_params(fold_constants(intrinsics, pose), intrinsics.width, 0,
                                  intrinsics.height, field.a.data(), field.c.data());
  return field;
}

namespace {

void require_map_matches_camera(const CameraIntrinsics& k, const ScalarMap& map) {
  if (map.width() != k.width || map.height() != k.height) {
    fail(ErrorCode::kShapeMismatch, "map size does not match the camera image size");
  }
}

}  // namespace

MapConversion depth_map_from_parallax_map(const CameraIntrinsics& intrinsics,
                                          const RelativePose& pose, const ScalarMap& rho_map) {
  if (rho_map.quantity() != Quantity::kParallax) {
    fail(ErrorCode::kInvalidArgument, "expected a parallax map");
  }
  require_map_matches_camera(intrinsics, rho_map);
  const auto field = params_field(intrinsics, pose);
  MapConversion out{ScalarMap(rho_map.width(), rho_map.height(), Quantity::kDepth), 0};
  out.invalid_count = kernels::active().depth_from_parallax(field.a, field.c, field.a_floor,
                                                            rho_map.data(), out.map.data());
  return out;
}

MapConversion parallax_map_from_depth_map(const CameraIntrinsics& intrinsics,
                                          const RelativePose& pose, const ScalarMap& depth_map) {
  if (depth_map.quantity() != Quantity::kDepth) {
    fail(ErrorCode::kInvalidArgument, "expected a depth map");
  }
  require_map_matches_camera(intrinsics, depth_map);
  const auto field = params_field(intrinsics, pose);
  MapConversion out{ScalarMap(depth_map.width(), depth_map.height(), Quantity::kParallax), 0};
  out.invalid_count = kernels::active().parallax_from_depth(field.a, field.c, field.a_floor,
                                                            depth_map.data(), out.map.data());
  return out;
}

}  // namespace pdepth
