#include "pdepth/uncertainty.hpp"

#include <cmath>
#include <string>

#include "pdepth/errors.hpp"
#include "pdepth/kernels.hpp"

namespace pdepth {

RelativeUncertainty::RelativeUncertainty(double value) : value_(value) {
  if (!(std::isfinite(value) && value > 0.0)) {
    fail(ErrorCode::kDomain, "relative uncertainty must be positive and finite");
  }
}

double sigma_depth_from_sigma_inv_parallax(const LinearDepthParams& params, double sigma_zeta) {
  if (!(std::isfinite(sigma_zeta) && sigma_zeta >= 0.0)) {
    fail(ErrorCode::kDomain, "sigma(zeta) must be non-negative");
  }
  if (!(params.a >= 0.0)) fail(ErrorCode::kDomain, "a must be non-negative");
  return params.a * sigma_zeta;
}

RelativeUncertainty relative_uncertainty(double sigma_rho, double rho_hat) {
  if (!(sigma_rho > 0.0 && rho_hat > 0.0)) {
    fail(ErrorCode::kDomain, "sigma(rho) and rho_hat must be positive");
  }
  return RelativeUncertainty(sigma_rho / rho_hat);
}

RelativeUncertainty delta_depth_from_delta_parallax(const LinearDepthParams& params,
                                                    double z_hat,
                                                    RelativeUncertainty delta_rho) {
  if (!(std::isfinite(z_hat) && z_hat > 0.0)) fail(ErrorCode::kDomain, "z_hat must be positive");
  if (!(z_hat > params.c)) {
    fail(ErrorCode::kExistence,
         "condition of existence violated: z_V * z_hat + t_z <= 0 (z_hat " +
             std::to_string(z_hat) + " <= c " + std::to_string(params.c) + ")");
  }
  // c/z + (1 + d)(1 - c/z) - 1 reduces to d (1 - c/z); this form keeps
  // delta_z == delta_rho bit-exact when c == 0.
  return RelativeUncertainty(delta_rho.value() * (1.0 - params.c / z_hat));
}

UncertainDepth uncertain_depth(const LinearDepthParams& params, double rho_hat,
                               double sigma_rho) {
  const double z_hat = depth_from_parallax(params, rho_hat);
  return {z_hat, delta_depth_from_delta_parallax(params, z_hat,
                                                 relative_uncertainty(sigma_rho, rho_hat))};
}

namespace {

void check_inputs(const CameraIntrinsics& k, const ScalarMap& rho, const ScalarMap& sigma,
                  Quantity sigma_quantity) {
  require_same_shape(rho, sigma, "uncertainty conversion");
  if (rho.width() != k.width || rho.height() != k.height) {
    fail(ErrorCode::kShapeMismatch, "map size does not match the camera image size");
  }
  if (rho.quantity() != Quantity::kParallax) {
    fail(ErrorCode::kInvalidArgument, "expected a parallax map");
  }
  if (sigma.quantity() != sigma_quantity) {
    fail(ErrorCode::kInvalidArgument,
         "expected an uncertainty map tagged " + std::string(quantity_name(sigma_quantity)));
  }
}

}  // namespace

UncertainDepthMaps delta_depth_map(const CameraIntrinsics& intrinsics, const RelativePose& pose,
                                   const ScalarMap& rho_map, const ScalarMap& sigma_map) {
  check_inputs(intrinsics, rho_map, sigma_map, Quantity::kSigma);
  const auto field = params_field(intrinsics, pose);
  UncertainDepthMaps out{ScalarMap(rho_map.width(), rho_map.height(), Quantity::kDepth),
                         ScalarMap(rho_map.width(), rho_map.height(), Quantity::kDelta), 0};
  out.invalid_count =
      kernels::active().delta_depth(field.a, field.c, field.a_floor, rho_map.data(),
                                    sigma_map.data(), out.depth.data(), out.uncertainty.data());
  return out;
}

UncertainDepthMaps sigma_depth_map(const CameraIntrinsics& intrinsics, const RelativePose& pose,
                                   const ScalarMap& rho_map, const ScalarMap& sigma_zeta_map) {
  check_inputs(intrinsics, rho_map, sigma_zeta_map, Quantity::kSigma);
  const auto field = params_field(intrinsics, pose);
  UncertainDepthMaps out{ScalarMap(rho_map.width(), rho_map.height(), Quantity::kDepth),
                         ScalarMap(rho_map.width(), rho_map.height(), Quantity::kSigma), 0};
  out.invalid_count = kernels::active().sigma_depth(field.a, field.c, field.a_floor,
                                                    rho_map.data(), sigma_zeta_map.data(),
                                                    out.depth.data(), out.uncertainty.data());
  return out;
}

}  // namespace pdepth
