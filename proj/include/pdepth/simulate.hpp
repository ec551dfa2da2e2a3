#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "pdepth/geometry.hpp"
#include "pdepth/metrics.hpp"
#include "pdepth/scalar_map.hpp"

namespace pdepth {

enum class DepthModel { kConstant, kFrontoPlaneRamp, kRandomSmooth };

std::string_view depth_model_name(DepthModel m);
DepthModel parse_depth_model(std::string_view name);

/// Synthetic scene. `constant` puts every pixel at z_min; `fronto-plane-ramp`
/// goes linearly from z_max on the top row to z_min on the bottom row;
/// `random-smooth` sums 8 random low-frequency cosines and rescales them
/// onto [z_min, z_max].
struct SceneSpec {
  int width = 64;
  int height = 48;
  DepthModel depth_model = DepthModel::kRandomSmooth;
  double z_min = 2.0;
  double z_max = 60.0;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class NoiseScaleModel { kConstant, kProportionalToParallax };

std::string_view noise_scale_model_name(NoiseScaleModel m);
NoiseScaleModel parse_noise_scale_model(std::string_view name);

/// Laplace noise on parallax; b = scale_param or b = scale_param * rho.
struct NoiseSpec {
  NoiseScaleModel scale_model = NoiseScaleModel::kProportionalToParallax;
  double scale_param = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noisy parallax is clamped from below to keep depth finite.
inline constexpr double kMinParallax = 1e-4;
/// Clamping more than this fraction of pixels marks the setup as degenerate.
inline constexpr double kMaxClampedFraction = 1e-3;
/// More than this fraction of invalid ground-truth pixels is degenerate.
inline constexpr double kMaxInvalidSceneFraction = 0.01;

struct Scene {
  ScalarMap depth;     // Quantity::kDepth
  ScalarMap parallax;  // Quantity::kParallax, invalid where z <= c or a carries no parallax
  std::size_t invalid_count = 0;
};

Scene generate_scene(const SceneSpec& spec, const CameraIntrinsics& intrinsics,
                     const RelativePose& pose);

struct CorruptedParallax {
  ScalarMap parallax;  // noisy, Quantity::kParallax
  ScalarMap sigma;     // Laplace scale b used at each pixel, Quantity::kSigma
  std::size_t clamped_count = 0;
};

CorruptedParallax corrupt(const ScalarMap& gt_parallax, const NoiseSpec& noise);

/// Noise-model scale evaluated at the estimate: what an estimator that knows
/// the noise model but not the true parallax would report as sigma(rho).
ScalarMap estimated_sigma(const ScalarMap& rho_hat, const NoiseSpec& noise);

/// First-order scale of zeta = 1 / rho: sigma(rho) / rho^2, Quantity::kSigma.
ScalarMap inverse_parallax_sigma(const ScalarMap& rho_hat, const ScalarMap& sigma_rho);

/// Random permutation of the valid pixels of `map` (Fisher-Yates on a
/// SplitMix64 stream). Invalid pixels stay in place.
ScalarMap shuffle_valid(const ScalarMap& map, std::uint64_t seed);

// kMatched: estimated_sigma of the noisy parallax. kTrueScale: the exact b
// map from corrupt(). kShuffled: kMatched permuted across valid pixels.
enum class UncertaintySource { kMatched, kTrueScale, kShuffled };

struct EndToEndOptions {
  int n_bins = kDefaultSparsificationBins;
  double cap = kDefaultDepthCap;
  UncertaintySource source = UncertaintySource::kMatched;
};

struct EndToEndResult {
  DepthMetrics metrics;
  // AuSE per DepthMetric (abs_rel, rmse_log, delta_125) when ranking by the
  // relative depth uncertainty delta_z.
  std::array<double, 3> ause{};
  // Same, ranking by the probabilistic depth sigma a * sigma(zeta).
  std::array<double, 3> ause_probabilistic{};
  // False for noise-free runs: a zero scale gives no uncertainty to rank by,
  // and both AuSE arrays stay zero.
  bool has_uncertainty = true;
  std::size_t invalid_count = 0;
  std::size_t clamped_count = 0;
};

/// Full synthetic pipeline: scene -> noisy parallax and its scale ->
/// depth with both uncertainty conversions -> metrics and AuSE against the
/// ground-truth depth.
EndToEndResult end_to_end_case(const SceneSpec& scene, const NoiseSpec& noise,
                               const CameraIntrinsics& intrinsics, const RelativePose& pose,
                               const EndToEndOptions& options = {});

}  // namespace pdepth
