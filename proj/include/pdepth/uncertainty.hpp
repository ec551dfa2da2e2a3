#pragma once

#include "pdepth/geometry.hpp"
#include "pdepth/scalar_map.hpp"

namespace pdepth {

/// Dimensionless one-sided uncertainty width, strictly positive.
class RelativeUncertainty {
 public:
  explicit RelativeUncertainty(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// A depth estimate with its relative range [z_hat, (1 + delta_z) * z_hat].
struct UncertainDepth {
  double z_hat;
  RelativeUncertainty delta_z;
};

// Probabilistic route: the network predicts the scale of zeta = 1 / rho, and
// depth is affine in zeta, so the depth scale is a * sigma(zeta) in meters.
double sigma_depth_from_sigma_inv_parallax(const LinearDepthParams& params, double sigma_zeta);

RelativeUncertainty relative_uncertainty(double sigma_rho, double rho_hat);

/// Maps the parallax range [rho_hat / (1 + delta_rho), rho_hat] onto the depth
/// range [z_hat, (1 + delta_z) z_hat]. Requires z_hat > c.
RelativeUncertainty delta_depth_from_delta_parallax(const LinearDepthParams& params,
                                                    double z_hat,
                                                    RelativeUncertainty delta_rho);

UncertainDepth uncertain_depth(const LinearDepthParams& params, double rho_hat,
                               double sigma_rho);

struct UncertainDepthMaps {
  ScalarMap depth;        // Quantity::kDepth
  ScalarMap uncertainty;  // kDelta for the relative route, kSigma (meters) for the probabilistic one
  std::size_t invalid_count = 0;
};

/// Relative route over whole maps: (rho_hat, sigma(rho)) -> (depth, delta_z).
UncertainDepthMaps delta_depth_map(const CameraIntrinsics& intrinsics, const RelativePose& pose,
                                   const ScalarMap& rho_map, const ScalarMap& sigma_map);

/// Probabilistic route over whole maps: (rho_hat, sigma(zeta)) -> (depth, sigma(z)).
UncertainDepthMaps sigma_depth_map(const CameraIntrinsics& intrinsics, const RelativePose& pose,
                                   const ScalarMap& rho_map, const ScalarMap& sigma_zeta_map);

}  // namespace pdepth
