#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pdepth/scalar_map.hpp"

namespace pdepth {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const;
};

/// Unit quaternion, Hamilton convention, scalar first.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

/// Camera motion between pose t-1 and pose t.
///
/// `rotation` rotates frame t-1 into frame t. `translation` is in meters,
/// expressed in the camera frame at time t (x right, y down, z forward).
struct RelativePose {
  Quaternion rotation;
  Vec3 translation{0.0, 0.0, 0.0};

  void validate() const;
};

Mat3 rotation_matrix(const Quaternion& q);

/// Coordinates of a pixel as seen by the virtual camera that shares the
/// position of one pose and the orientation of the other.
/// (iv, jv) are relative to the principal point; zv is dimensionless.
struct VirtualCoords {
  double iv = 0.0;
  double jv = 0.0;
  double zv = 1.0;
};

/// Per-pixel coefficients of z = a / rho + c.
struct LinearDepthParams {
  double a = 0.0;
  double c = 0.0;
  // `a` at or below this value carries no parallax information. Set by
  // linear_depth_params from the camera scale; zero for hand-built params.
  double a_floor = 0.0;
};

VirtualCoords virtual_coords(const CameraIntrinsics& intrinsics, const RelativePose& pose,
                             double i, double j);

LinearDepthParams linear_depth_params(const CameraIntrinsics& intrinsics,
                                      const RelativePose& pose, double i, double j);

/// Threshold below which `a` is treated as zero: 1e-12 * max(fx, fy) * |t|.
double no_parallax_floor(const CameraIntrinsics& intrinsics, const RelativePose& pose);

double depth_from_parallax(const LinearDepthParams& params, double rho);
double parallax_from_depth(const LinearDepthParams& params, double z);

/// Per-pixel (a, c) for a whole image. Pixels whose ray leaves the
/// half-space in front of the virtual camera hold NaN.
struct ParamsField {
  int width = 0;
  int height = 0;
  double a_floor = 0.0;
  std::vector<double> a;
  std::vector<double> c;
};

ParamsField params_field(const CameraIntrinsics& intrinsics, const RelativePose& pose);

struct MapConversion {
  ScalarMap map;
  std::size_t invalid_count = 0;
};

MapConversion depth_map_from_parallax_map(const CameraIntrinsics& intrinsics,
                                          const RelativePose& pose, const ScalarMap& rho_map);

MapConversion parallax_map_from_depth_map(const CameraIntrinsics& intrinsics,
                                          const RelativePose& pose, const ScalarMap& depth_map);

}  // namespace pdepth
