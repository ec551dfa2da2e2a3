#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pdepth/scalar_map.hpp"

namespace pdepth {

/// Multi-resolution stack of maps. levels[k] holds level l = k + 1, whose
/// size is (max(1, W >> l), max(1, H >> l)) for full resolution W x H and
/// whose loss weight is 2^-l.
class MapPyramid {
 public:
  MapPyramid() = default;
  MapPyramid(int full_width, int full_height, std::vector<ScalarMap> levels);

  int full_width() const { return full_width_; }
  int full_height() const { return full_height_; }
  int level_count() const { return static_cast<int>(levels_.size()); }

  const ScalarMap& level(int l) const { return levels_.at(static_cast<std::size_t>(l - 1)); }
  ScalarMap& level(int l) { return levels_.at(static_cast<std::size_t>(l - 1)); }

  static int level_width(int full_width, int l);
  static int level_height(int full_height, int l);
  static double weight(int l);

  bool same_shape(const MapPyramid& other) const;

 private:
  int full_width_ = 0;
  int full_height_ = 0;
  std::vector<ScalarMap> levels_;
};

struct LossConfig {
  double beta = 0.02;
  double depth_mask_max = 400.0;  // meters; pixels with gt depth >= this are skipped

  void validate() const;
};

/// Loss value with its gradient w.r.t. the predicted quantity and, for the
/// likelihood terms, the predicted scale. Gradients are laid out per level
/// (index l - 1), row-major within a level.
struct LossEvaluation {
  double value = 0.0;
  std::vector<std::vector<double>> d_prediction;
  std::vector<std::vector<double>> d_scale;
};

/// (1/HW) sum_l sum_px 2^-l |log z - log z_hat|, natural log.
double l1_log_depth_loss(const MapPyramid& gt, const MapPyramid& pred);
LossEvaluation l1_log_depth_loss_with_gradient(const MapPyramid& gt, const MapPyramid& pred);

/// (1/HW) sum_l sum_px 2^-l [ stop(|z - z_hat|) / (a s) + beta log(a s) ]
/// with s the predicted scale of the inverse parallax. The residual is a
/// constant for differentiation, so d/dz_hat is identically zero.
double nll_depth_loss(const MapPyramid& gt_depth, const MapPyramid& pred_depth,
                      const MapPyramid& a_map, const MapPyramid& sigma_zeta,
                      const LossConfig& cfg);
LossEvaluation nll_depth_loss_with_gradient(const MapPyramid& gt_depth,
                                            const MapPyramid& pred_depth,
                                            const MapPyramid& a_map,
                                            const MapPyramid& sigma_zeta,
                                            const LossConfig& cfg);

/// Parallax counterpart: stop(|rho - rho_hat|) / s + beta log s. The depth
/// mask needs gt depth; when `gt_depth` is null no pixel is masked.
double nll_parallax_loss(const MapPyramid& gt_parallax, const MapPyramid& pred_parallax,
                         const MapPyramid& sigma_rho, const LossConfig& cfg,
                         const MapPyramid* gt_depth = nullptr);
LossEvaluation nll_parallax_loss_with_gradient(const MapPyramid& gt_parallax,
                                               const MapPyramid& pred_parallax,
                                               const MapPyramid& sigma_rho,
                                               const LossConfig& cfg,
                                               const MapPyramid* gt_depth = nullptr);

/// Minimizer of r / (a s) + beta log(a s) over s > 0: r / (beta a).
double optimal_scale(double residual, double beta, double a = 1.0);

// ---------------------------------------------------------------------------
// Gradient verification

using ScalarFunction = std::function<double(std::span<const double>)>;
using GradientFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Central-difference step for coordinate x: step * max(1, |x|).
double finite_difference_step(double x, double step = 1e-6);

struct GradientCheckResult {
  // max_i |g_a - g_n| over the largest gradient entry (max |g_a|, |g_n|, 1e-8).
  double max_rel_error = 0.0;
  // Per-coordinate max_i |g_a - g_n| / max(|g_a|, |g_n|, 1e-8). Informative
  // only: it blows up at coordinates whose derivative is near zero, where the
  // difference quotient is all rounding noise.
  double max_coordinate_rel_error = 0.0;
  // Largest |analytic| and |numeric| derivative over stop-gradient inputs.
  double max_stopped_gradient = 0.0;
  // Relative gap between the library loss value and the double-precision
  // functional that is differentiated numerically (loss-level checks only).
  double value_rel_error = 0.0;
  std::size_t n_checked = 0;
};

GradientCheckResult gradient_check(const ScalarFunction& f, const GradientFunction& grad,
                                   std::span<const double> x, double step = 1e-6);

enum class LossId { kL1LogDepth, kNllDepth, kNllParallax };

/// Everything a loss needs to be evaluated. `aux` is the a-map for the
/// inverse-parallax likelihood and the gt depth (mask source, optional) for
/// the parallax likelihood; unused for the L1-log loss. `scale` is unused for
/// the L1-log loss.
struct LossPoint {
  MapPyramid gt;
  MapPyramid prediction;
  MapPyramid scale;
  MapPyramid aux;
  LossConfig cfg;
};

/// Checks the analytic gradient of a loss at `point` against central
/// differences. For the likelihood terms the residual is frozen at its value
/// at `point`, so the numeric derivative w.r.t. the prediction is zero and
/// must match the analytic one exactly.
GradientCheckResult gradient_check(LossId loss, const LossPoint& point, double step = 1e-6);

// ---------------------------------------------------------------------------
// Laplace maximum-likelihood fitting

struct LaplaceFit {
  double location = 0.0;
  double scale = 0.0;
  int iterations = 0;
};

inline constexpr double kMinLaplaceScale = 1e-6;

/// Gradient-descent fit of (mu, sigma) minimizing
///   mean_i |x_i - mu| / sigma + beta log sigma
/// over (mu, log sigma), using sign-adaptive step sizes. `learning_rate`
/// sets the initial step (relative to the sample spread for mu). The
/// optimum is mu = median, sigma = mean|x - median| / beta.
LaplaceFit laplace_mle_fit(std::span<const double> samples, double beta, int iters = 4000,
                           double learning_rate = 0.05);

}  // namespace pdepth
