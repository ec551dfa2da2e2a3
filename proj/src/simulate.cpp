#include "pdepth/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pdepth/errors.hpp"
#include "pdepth/kernels.hpp"
#include "pdepth/random.hpp"
#include "pdepth/uncertainty.hpp"

namespace pdepth {

double SplitMix64::laplace(double b) {
  const double u = uniform_open() - 0.5;
  const double magnitude = -b * std::log(1.0 - 2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

namespace {

// Stream tags ("SCENE", "NOISE", "SHUFF" in ASCII).
constexpr std::uint64_t kSceneTag = 0x5343454E45ULL;
constexpr std::uint64_t kNoiseTag = 0x4E4F495345ULL;
constexpr std::uint64_t kShuffleTag = 0x5348554646ULL;

constexpr int kSmoothBumps = 8;

std::vector<double> smooth_field(int width, int height, std::uint64_t seed) {
  struct Bump {
    double kx, ky, phase, amplitude;
  };
  auto rng = SplitMix64::stream(seed, kSceneTag, 0);
  std::vector<Bump> bumps;
  for (int b = 0; b < kSmoothBumps; ++b) {
    Bump bump;
    bump.kx = rng.uniform(-2.0, 2.0);
    bump.ky = rng.uniform(-2.0, 2.0);
    bump.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    bump.amplitude = rng.uniform(0.5, 1.0);
    bumps.push_back(bump);
  }
  std::vector<double> f(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = 0.0;
      for (const auto& b : bumps) {
        v += b.amplitude * std::cos(2.0 * std::numbers::pi *
                                        (b.kx * x / width + b.ky * y / height) +
                                    b.phase);
      }
      f[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return f;
}

}  // namespace

std::string_view depth_model_name(DepthModel m) {
  switch (m) {
    case DepthModel::kConstant: return "constant";
    case DepthModel::kFrontoPlaneRamp: return "fronto-plane-ramp";
    case DepthModel::kRandomSmooth: return "random-smooth";
  }
  return "unknown";
}

DepthModel parse_depth_model(std::string_view name) {
  if (name == "constant") return DepthModel::kConstant;
  if (name == "fronto-plane-ramp") return DepthModel::kFrontoPlaneRamp;
  if (name == "random-smooth") return DepthModel::kRandomSmooth;
  fail(ErrorCode::kInvalidArgument, "unknown depth model '" + std::string(name) + "'");
}

std::string_view noise_scale_model_name(NoiseScaleModel m) {
  return m == NoiseScaleModel::kConstant ? "constant" : "proportional";
}

NoiseScaleModel parse_noise_scale_model(std::string_view name) {
  if (name == "constant") return NoiseScaleModel::kConstant;
  if (name == "proportional" || name == "proportional-to-parallax") {
    return NoiseScaleModel::kProportionalToParallax;
  }
  fail(ErrorCode::kInvalidArgument, "unknown noise scale model '" + std::string(name) + "'");
}

void SceneSpec::validate() const {
  if (width < 1 || height < 1) fail(ErrorCode::kInvalidArgument, "scene size must be positive");
  if (!(std::isfinite(z_min) && std::isfinite(z_max) && z_min > 0.0 && z_min < z_max)) {
    fail(ErrorCode::kInvalidArgument, "scene depth range must satisfy 0 < z_min < z_max");
  }
}

void NoiseSpec::validate() const {
  if (!(std::isfinite(scale_param) && scale_param >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "noise scale must be non-negative");
  }
}

Scene generate_scene(const SceneSpec& spec, const CameraIntrinsics& intrinsics,
                     const RelativePose& pose) {
  spec.validate();
  if (spec.width != intrinsics.width || spec.height != intrinsics.height) {
    fail(ErrorCode::kShapeMismatch, "scene size differs from the camera image size");
  }
  Scene scene{ScalarMap(spec.width, spec.height, Quantity::kDepth),
              ScalarMap(spec.width, spec.height, Quantity::kParallax), 0};
  auto depth = scene.depth.data();
  switch (spec.depth_model) {
    case DepthModel::kConstant:
      std::fill(depth.begin(), depth.end(), static_cast<float>(spec.z_min));
      break;
    case DepthModel::kFrontoPlaneRamp:
      for (int y = 0; y < spec.height; ++y) {
        const double t = spec.height > 1 ? static_cast<double>(y) / (spec.height - 1) : 0.0;
        const auto z = static_cast<float>(spec.z_max + (spec.z_min - spec.z_max) * t);
        for (int x = 0; x < spec.width; ++x) scene.depth.at(x, y) = z;
      }
      break;
    case DepthModel::kRandomSmooth: {
      const auto f = smooth_field(spec.width, spec.height, spec.seed);
      const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
      const double range = *hi - *lo;
      for (std::size_t k = 0; k < f.size(); ++k) {
        const double t = range > 0.0 ? (f[k] - *lo) / range : 0.5;
        depth[k] = static_cast<float>(spec.z_min + (spec.z_max - spec.z_min) * t);
      }
      break;
    }
  }

  const auto field = params_field(intrinsics, pose);
  scene.invalid_count = kernels::active().parallax_from_depth(
      field.a, field.c, field.a_floor, scene.depth.data(), scene.parallax.data());
  const double invalid_fraction =
      static_cast<double>(scene.invalid_count) / static_cast<double>(scene.depth.size());
  if (invalid_fraction > kMaxInvalidSceneFraction) {
    fail(ErrorCode::kDegenerateSetup,
         std::to_string(scene.invalid_count) +
             " pixels have no valid parallax (condition of existence or no parallax)");
  }
  return scene;
}

CorruptedParallax corrupt(const ScalarMap& gt_parallax, const NoiseSpec& noise) {
  noise.validate();
  if (gt_parallax.quantity() != Quantity::kParallax) {
    fail(ErrorCode::kInvalidArgument, "expected a parallax map");
  }
  CorruptedParallax out{ScalarMap(gt_parallax.width(), gt_parallax.height(), Quantity::kParallax),
                        ScalarMap(gt_parallax.width(), gt_parallax.height(), Quantity::kSigma), 0};
  const auto in = gt_parallax.data();
  auto noisy = out.parallax.data();
  auto sigma = out.sigma.data();
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double rho = in[k];
    if (!is_valid_pixel(in[k]) || !(rho > 0.0)) {
      noisy[k] = kInvalidPixel;
      sigma[k] = kInvalidPixel;
      continue;
    }
    const double b = noise.scale_model == NoiseScaleModel::kConstant ? noise.scale_param
                                                                      : noise.scale_param * rho;
    auto rng = SplitMix64::stream(noise.seed, kNoiseTag, k);
    double value = rho + rng.laplace(b);
    if (value < kMinParallax) {
      value = kMinParallax;
      ++out.clamped_count;
    }
    noisy[k] = static_cast<float>(value);
    sigma[k] = static_cast<float>(b);
  }
  return out;
}

ScalarMap estimated_sigma(const ScalarMap& rho_hat, const NoiseSpec& noise) {
  noise.validate();
  if (rho_hat.quantity() != Quantity::kParallax) {
    fail(ErrorCode::kInvalidArgument, "expected a parallax map");
  }
  ScalarMap out(rho_hat.width(), rho_hat.height(), Quantity::kSigma, kInvalidPixel);
  const auto r = rho_hat.data();
  auto o = out.data();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!is_valid_pixel(r[k]) || !(r[k] > 0.0f)) continue;
    o[k] = noise.scale_model == NoiseScaleModel::kConstant
               ? static_cast<float>(noise.scale_param)
               : static_cast<float>(noise.scale_param * static_cast<double>(r[k]));
  }
  return out;
}

ScalarMap inverse_parallax_sigma(const ScalarMap& rho_hat, const ScalarMap& sigma_rho) {
  require_same_shape(rho_hat, sigma_rho, "inverse parallax sigma");
  ScalarMap out(rho_hat.width(), rho_hat.height(), Quantity::kSigma, kInvalidPixel);
  const auto r = rho_hat.data();
  const auto s = sigma_rho.data();
  auto o = out.data();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!is_valid_pixel(r[k]) || !is_valid_pixel(s[k]) || !(r[k] > 0.0f)) continue;
    const double rho = r[k];
    o[k] = static_cast<float>(static_cast<double>(s[k]) / (rho * rho));
  }
  return out;
}

ScalarMap shuffle_valid(const ScalarMap& map, std::uint64_t seed) {
  std::vector<std::size_t> slots;
  const auto d = map.data();
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (is_valid_pixel(d[k])) slots.push_back(k);
  }
  std::vector<float> values;
  values.reserve(slots.size());
  for (std::size_t k : slots) values.push_back(d[k]);
  auto rng = SplitMix64::stream(seed, kShuffleTag, 0);
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[rng.below(i)]);
  }
  ScalarMap out = map;
  auto o = out.data();
  for (std::size_t i = 0; i < slots.size(); ++i) o[slots[i]] = values[i];
  return out;
}

EndToEndResult end_to_end_case(const SceneSpec& scene_spec, const NoiseSpec& noise,
                               const CameraIntrinsics& intrinsics, const RelativePose& pose,
                               const EndToEndOptions& options) {
  const Scene scene = generate_scene(scene_spec, intrinsics, pose);
  CorruptedParallax observed = corrupt(scene.parallax, noise);
  const double clamped_fraction =
      static_cast<double>(observed.clamped_count) / static_cast<double>(scene.parallax.size());
  if (clamped_fraction >= kMaxClampedFraction) {
    fail(ErrorCode::kDegenerateSetup,
         std::to_string(observed.clamped_count) + " noisy parallax values needed clamping");
  }
  const auto depth = depth_map_from_parallax_map(intrinsics, pose, observed.parallax);
  EndToEndResult out;
  out.metrics = depth_metrics(scene.depth, depth.map, options.cap);
  out.invalid_count = depth.invalid_count;
  out.clamped_count = observed.clamped_count;
  if (noise.scale_param == 0.0) {
    out.has_uncertainty = false;
    return out;
  }

  ScalarMap sigma = options.source == UncertaintySource::kTrueScale
                        ? std::move(observed.sigma)
                        : estimated_sigma(observed.parallax, noise);
  if (options.source == UncertaintySource::kShuffled) sigma = shuffle_valid(sigma, noise.seed);

  const auto relative = delta_depth_map(intrinsics, pose, observed.parallax, sigma);
  const auto probabilistic = sigma_depth_map(intrinsics, pose, observed.parallax,
                                             inverse_parallax_sigma(observed.parallax, sigma));
  constexpr DepthMetric kAll[] = {DepthMetric::kAbsRel, DepthMetric::kRmseLog,
                                  DepthMetric::kDelta125};
  for (std::size_t m = 0; m < 3; ++m) {
    out.ause[m] = ause_for_metric(scene.depth, relative.depth, relative.uncertainty, kAll[m],
                                  options.n_bins, options.cap);
    out.ause_probabilistic[m] =
        ause_for_metric(scene.depth, probabilistic.depth, probabilistic.uncertainty, kAll[m],
                        options.n_bins, options.cap);
  }
  return out;
}

}  // namespace pdepth
