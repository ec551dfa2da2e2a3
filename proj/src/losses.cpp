#include "pdepth/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pdepth/errors.hpp"

namespace pdepth {

MapPyramid::MapPyramid(int full_width, int full_height, std::vector<ScalarMap> levels)
    : full_width_(full_width), full_height_(full_height), levels_(std::move(levels)) {
  if (full_width < 1 || full_height < 1) {
    fail(ErrorCode::kInvalidArgument, "pyramid full resolution must be positive");
  }
  if (levels_.empty()) fail(ErrorCode::kInvalidArgument, "pyramid needs at least one level");
  for (int l = 1; l <= level_count(); ++l) {
    const auto& m = level(l);
    if (m.width() != level_width(full_width, l) || m.height() != level_height(full_height, l)) {
      fail(ErrorCode::kShapeMismatch,
           "pyramid level " + std::to_string(l) + " is " + std::to_string(m.width()) + "x" +
               std::to_string(m.height()) + ", expected " +
               std::to_string(level_width(full_width, l)) + "x" +
               std::to_string(level_height(full_height, l)));
    }
  }
}

int MapPyramid::level_width(int full_width, int l) { return std::max(1, full_width >> l); }
int MapPyramid::level_height(int full_height, int l) { return std::max(1, full_height >> l); }
double MapPyramid::weight(int l) { return std::ldexp(1.0, -l); }

bool MapPyramid::same_shape(const MapPyramid& other) const {
  return full_width_ == other.full_width_ && full_height_ == other.full_height_ &&
         levels_.size() == other.levels_.size();
}

void LossConfig::validate() const {
  if (!(std::isfinite(beta) && beta > 0.0)) fail(ErrorCode::kInvalidArgument, "beta must be > 0");
  if (!(depth_mask_max > 0.0)) fail(ErrorCode::kInvalidArgument, "depth mask must be > 0");
}

namespace {

void require_matching(const MapPyramid& a, const MapPyramid& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kShapeMismatch, std::string(what) + ": pyramid shapes differ");
  }
}

std::vector<std::vector<double>> zero_gradient(const MapPyramid& p) {
  std::vector<std::vector<double>> g;
  for (int l = 1; l <= p.level_count(); ++l) g.emplace_back(p.level(l).size(), 0.0);
  return g;
}

// Shared evaluation of the two likelihood terms. `a_map` may be null (unit a).
LossEvaluation nll_evaluate(const MapPyramid& gt, const MapPyramid& pred,
                            const MapPyramid* a_map, const MapPyramid& scale,
                            const MapPyramid* mask_depth, const LossConfig& cfg) {
  cfg.validate();
  require_matching(gt, pred, "likelihood loss");
  require_matching(gt, scale, "likelihood loss");
  if (a_map) require_matching(gt, *a_map, "likelihood loss");
  if (mask_depth) require_matching(gt, *mask_depth, "likelihood loss");

  const double norm = 1.0 / (static_cast<double>(gt.full_width()) * gt.full_height());
  LossEvaluation out;
  out.d_prediction = zero_gradient(gt);
  out.d_scale = zero_gradient(gt);
  double total = 0.0;
  for (int l = 1; l <= gt.level_count(); ++l) {
    const auto g = gt.level(l).data();
    const auto p = pred.level(l).data();
    const auto s = scale.level(l).data();
    const double w = MapPyramid::weight(l) * norm;
    auto& ds = out.d_scale[static_cast<std::size_t>(l - 1)];
    double level_sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!is_valid_pixel(g[k])) continue;
      if (mask_depth) {
        const float z = mask_depth->level(l).data()[k];
        if (!is_valid_pixel(z) || z >= cfg.depth_mask_max) continue;
      }
      const double a = a_map ? static_cast<double>(a_map->level(l).data()[k]) : 1.0;
      const double sk = s[k];
      if (!(std::isfinite(sk) && sk > 0.0)) {
        fail(ErrorCode::kDomain, "non-positive uncertainty scale at a valid pixel");
      }
      if (!(std::isfinite(a) && a > 0.0)) {
        fail(ErrorCode::kDomain, "non-positive parallax coefficient a at a valid pixel");
      }
      if (!is_valid_pixel(p[k])) fail(ErrorCode::kDomain, "invalid prediction at a valid pixel");
      const double r = std::abs(static_cast<double>(g[k]) - static_cast<double>(p[k]));
      const double as = a * sk;
      level_sum += r / as + cfg.beta * std::log(as);
      ds[k] = w * (cfg.beta / sk - r / (as * sk));
    }
    total += MapPyramid::weight(l) * level_sum;
  }
  out.value = norm * total;
  return out;
}

}  // namespace

LossEvaluation l1_log_depth_loss_with_gradient(const MapPyramid& gt, const MapPyramid& pred) {
  require_matching(gt, pred, "l1 log depth loss");
  const double norm = 1.0 / (static_cast<double>(gt.full_width()) * gt.full_height());
  LossEvaluation out;
  out.d_prediction = zero_gradient(gt);
  double total = 0.0;
  for (int l = 1; l <= gt.level_count(); ++l) {
    const auto g = gt.level(l).data();
    const auto p = pred.level(l).data();
    const double w = MapPyramid::weight(l) * norm;
    auto& dp = out.d_prediction[static_cast<std::size_t>(l - 1)];
    double level_sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!is_valid_pixel(g[k])) continue;
      if (!(g[k] > 0.0f && is_valid_pixel(p[k]) && p[k] > 0.0f)) {
        fail(ErrorCode::kDomain, "non-positive depth at a valid pixel");
      }
      const double diff = std::log(static_cast<double>(p[k])) - std::log(static_cast<double>(g[k]));
      level_sum += std::abs(diff);
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      dp[k] = w * sign / static_cast<double>(p[k]);
    }
    total += MapPyramid::weight(l) * level_sum;
  }
  out.value = norm * total;
  return out;
}

double l1_log_depth_loss(const MapPyramid& gt, const MapPyramid& pred) {
  return l1_log_depth_loss_with_gradient(gt, pred).value;
}

LossEvaluation nll_depth_loss_with_gradient(const MapPyramid& gt_depth,
                                            const MapPyramid& pred_depth,
                                            const MapPyramid& a_map,
                                            const MapPyramid& sigma_zeta,
                                            const LossConfig& cfg) {
  return nll_evaluate(gt_depth, pred_depth, &a_map, sigma_zeta, &gt_depth, cfg);
}

double nll_depth_loss(const MapPyramid& gt_depth, const MapPyramid& pred_depth,
                      const MapPyramid& a_map, const MapPyramid& sigma_zeta,
                      const LossConfig& cfg) {
  return nll_depth_loss_with_gradient(gt_depth, pred_depth, a_map, sigma_zeta, cfg).value;
}

LossEvaluation nll_parallax_loss_with_gradient(const MapPyramid& gt_parallax,
                                               const MapPyramid& pred_parallax,
                                               const MapPyramid& sigma_rho,
                                               const LossConfig& cfg,
                                               const MapPyramid* gt_depth) {
  return nll_evaluate(gt_parallax, pred_parallax, nullptr, sigma_rho, gt_depth, cfg);
}

double nll_parallax_loss(const MapPyramid& gt_parallax, const MapPyramid& pred_parallax,
                         const MapPyramid& sigma_rho, const LossConfig& cfg,
                         const MapPyramid* gt_depth) {
  return nll_parallax_loss_with_gradient(gt_parallax, pred_parallax, sigma_rho, cfg, gt_depth)
      .value;
}

double optimal_scale(double residual, double beta, double a) {
  if (!(residual > 0.0 && beta > 0.0 && a > 0.0)) {
    fail(ErrorCode::kDomain, "optimal scale needs positive residual, beta and a");
  }
  return residual / (beta * a);
}

// ---------------------------------------------------------------------------

double finite_difference_step(double x, double step) { return step * std::max(1.0, std::abs(x)); }

namespace {

constexpr double kGradientFloor = 1e-8;

double relative_discrepancy(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
  return std::abs(analytic - numeric) / denom;
}

double central_difference(const ScalarFunction& f, std::vector<double>& x, std::size_t i,
                          double step) {
  const double x0 = x[i];
  const double h = finite_difference_step(x0, step);
  const double hi = x0 + h, lo = x0 - h;
  x[i] = hi;
  const double up = f(x);
  x[i] = lo;
  const double down = f(x);
  x[i] = x0;
  // Divide by the spacing actually representable around x0.
  return (up - down) / (hi - lo);
}

}  // namespace

GradientCheckResult gradient_check(const ScalarFunction& f, const GradientFunction& grad,
                                   std::span<const double> x, double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidArgument, "finite-difference step must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  const auto analytic = grad(x);
  if (analytic.size() != x.size()) {
    fail(ErrorCode::kShapeMismatch, "gradient size differs from point size");
  }
  GradientCheckResult result;
  double max_diff = 0.0, max_mag = kGradientFloor;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double numeric = central_difference(f, probe, i, step);
    max_diff = std::max(max_diff, std::abs(analytic[i] - numeric));
    max_mag = std::max({max_mag, std::abs(analytic[i]), std::abs(numeric)});
    result.max_coordinate_rel_error =
        std::max(result.max_coordinate_rel_error, relative_discrepancy(analytic[i], numeric));
    ++result.n_checked;
  }
  result.max_rel_error = max_diff / max_mag;
  return result;
}

namespace {

struct Coordinate {
  bool is_scale;  // otherwise prediction
  int level;
  std::size_t index;
};

// Coordinates that actually enter the loss (valid, unmasked gt).
std::vector<Coordinate> active_coordinates(LossId loss, const LossPoint& pt) {
  std::vector<Coordinate> coords;
  const bool has_scale = loss != LossId::kL1LogDepth;
  const MapPyramid* mask = nullptr;
  if (loss == LossId::kNllDepth) mask = &pt.gt;
  if (loss == LossId::kNllParallax && pt.aux.level_count() > 0) mask = &pt.aux;
  for (int l = 1; l <= pt.gt.level_count(); ++l) {
    const auto g = pt.gt.level(l).data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!is_valid_pixel(g[k])) continue;
      if (mask) {
        const float z = mask->level(l).data()[k];
        if (!is_valid_pixel(z) || z >= pt.cfg.depth_mask_max) continue;
      }
      coords.push_back({false, l, k});
      if (has_scale) coords.push_back({true, l, k});
    }
  }
  return coords;
}

double& slot(std::vector<std::vector<double>>& v, const Coordinate& c) {
  return v[static_cast<std::size_t>(c.level - 1)][c.index];
}

}  // namespace

GradientCheckResult gradient_check(LossId loss, const LossPoint& point, double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidArgument, "finite-difference step must be > 0");
  const auto coords = active_coordinates(loss, point);

  // Values are perturbed in double precision, so work on double copies of the
  // prediction and scale maps rather than the 32-bit storage.
  auto flatten = [](const MapPyramid& p) {
    std::vector<std::vector<double>> out;
    for (int l = 1; l <= p.level_count(); ++l) {
      const auto d = p.level(l).data();
      out.emplace_back(d.begin(), d.end());
    }
    return out;
  };
  const auto gt = flatten(point.gt);
  const auto pred0 = flatten(point.prediction);
  const auto scale0 =
      loss == LossId::kL1LogDepth ? std::vector<std::vector<double>>{} : flatten(point.scale);
  const auto aux = point.aux.level_count() > 0 ? flatten(point.aux)
                                               : std::vector<std::vector<double>>{};

  std::vector<double> x;
  for (const auto& c : coords) {
    x.push_back(c.is_scale ? scale0[c.level - 1][c.index] : pred0[c.level - 1][c.index]);
  }

  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& c = coords[i];
    const double h = finite_difference_step(x[i], step);
    if (c.is_scale && !(x[i] - h > 0.0)) {
      fail(ErrorCode::kDomain, "scale within one step of zero: point on the domain boundary");
    }
    if (!c.is_scale && loss == LossId::kL1LogDepth) {
      const double g = gt[c.level - 1][c.index];
      if (!(x[i] - h > 0.0) || std::abs(x[i] - g) <= h) {
        fail(ErrorCode::kDomain, "prediction within one step of the |.| kink or of zero");
      }
    }
  }

  // Per-pixel loss in double precision, mirroring the library formulas.
  // The likelihood residual always uses the original prediction (stop-gradient).
  const double norm =
      1.0 / (static_cast<double>(point.gt.full_width()) * point.gt.full_height());
  const double beta = point.cfg.beta;
  auto evaluate = [&](std::span<const double> v, std::vector<std::vector<double>>* dpred,
                      std::vector<std::vector<double>>* dscale) {
    double total = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto& c = coords[i];
      if (c.is_scale) continue;
      const double w = MapPyramid::weight(c.level) * norm;
      const double g = gt[c.level - 1][c.index];
      if (loss == LossId::kL1LogDepth) {
        const double p = v[i];
        const double diff = std::log(p) - std::log(g);
        total += w * std::abs(diff);
        if (dpred) (*dpred)[c.level - 1][c.index] = w * (diff > 0 ? 1.0 : -1.0) / p;
        continue;
      }
      const double s = v[i + 1];  // scale coordinate follows its prediction
      const double a = loss == LossId::kNllDepth ? aux[c.level - 1][c.index] : 1.0;
      const double r = std::abs(g - pred0[c.level - 1][c.index]);
      const double as = a * s;
      total += w * (r / as + beta * std::log(as));
      if (dpred) (*dpred)[c.level - 1][c.index] = 0.0;
      if (dscale) (*dscale)[c.level - 1][c.index] = w * (beta / s - r / (as * s));
    }
    return total;
  };

  // Analytic gradient from the library, then cross-checked against the
  // numeric derivative of the frozen-residual functional above.
  LossPoint live = point;
  LossEvaluation lib;
  switch (loss) {
    case LossId::kL1LogDepth:
      lib = l1_log_depth_loss_with_gradient(live.gt, live.prediction);
      break;
    case LossId::kNllDepth:
      lib = nll_depth_loss_with_gradient(live.gt, live.prediction, live.aux, live.scale, live.cfg);
      break;
    case LossId::kNllParallax:
      lib = nll_parallax_loss_with_gradient(live.gt, live.prediction, live.scale, live.cfg,
                                            live.aux.level_count() > 0 ? &live.aux : nullptr);
      break;
  }

  ScalarFunction f = [&](std::span<const double> v) { return evaluate(v, nullptr, nullptr); };
  GradientFunction grad = [&](std::span<const double>) {
    std::vector<double> g(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
      g[i] = coords[i].is_scale ? slot(lib.d_scale, coords[i]) : slot(lib.d_prediction, coords[i]);
    }
    return g;
  };

  auto result = gradient_check(f, grad, x, step);
  const double mirrored = f(x);
  result.value_rel_error =
      std::abs(mirrored - lib.value) / std::max(std::abs(lib.value), kGradientFloor);
  if (loss != LossId::kL1LogDepth) {
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].is_scale) continue;
      const double numeric = central_difference(f, probe, i, step);
      result.max_stopped_gradient =
          std::max({result.max_stopped_gradient, std::abs(numeric),
                    std::abs(slot(lib.d_prediction, coords[i]))});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

LaplaceFit laplace_mle_fit(std::span<const double> samples, double beta, int iters,
                           double learning_rate) {
  if (samples.size() < 2) fail(ErrorCode::kInvalidArgument, "need at least two samples");
  if (!(std::isfinite(beta) && beta > 0.0)) fail(ErrorCode::kInvalidArgument, "beta must be > 0");
  if (iters < 1 || !(learning_rate > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "iterations and learning rate must be positive");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "samples must be finite");
  }
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double spread = 0.0;
  for (double v : samples) spread += std::abs(v - mean);
  spread = std::max(spread / n, kMinLaplaceScale);

  const double log_min = std::log(kMinLaplaceScale);
  double mu = mean;
  double log_sigma = std::log(spread);

  // Gradient of the mean objective J(mu, s) = m(mu) e^-s + beta s.
  auto gradient = [&](double& g_mu, double& g_s) {
    double sign_sum = 0.0;
    double abs_sum = 0.0;
    for (double v : samples) {
      const double r = v - mu;
      sign_sum += r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      abs_sum += std::abs(r);
    }
    const double inv_sigma = std::exp(-log_sigma);
    g_mu = -sign_sum / n * inv_sigma;
    g_s = -abs_sum / n * inv_sigma + beta;
  };

  // Per-parameter step sizes grow while the gradient keeps its sign and
  // halve when it flips, which settles onto the non-smooth median.
  double step_mu = learning_rate * spread;
  double step_s = learning_rate;
  double prev_mu = 0.0, prev_s = 0.0;
  int it = 0;
  for (; it < iters; ++it) {
    double g_mu, g_s;
    gradient(g_mu, g_s);
    if (g_mu * prev_mu < 0.0) {
      step_mu *= 0.5;
      g_mu = 0.0;
    } else if (g_mu * prev_mu > 0.0) {
      step_mu *= 1.2;
    }
    if (g_s * prev_s < 0.0) {
      step_s *= 0.5;
      g_s = 0.0;
    } else if (g_s * prev_s > 0.0) {
      step_s = std::min(step_s * 1.2, 1.0);
    }
    mu -= (g_mu > 0.0 ? 1.0 : (g_mu < 0.0 ? -1.0 : 0.0)) * step_mu;
    log_sigma -= (g_s > 0.0 ? 1.0 : (g_s < 0.0 ? -1.0 : 0.0)) * step_s;
    if (log_sigma < log_min) {
      log_sigma = log_min;
      g_s = 0.0;
    }
    prev_mu = g_mu;
    prev_s = g_s;
    const double eps = std::numeric_limits<double>::epsilon();
    if (step_mu <= eps * (1.0 + std::abs(mu)) && step_s <= eps * (1.0 + std::abs(log_sigma))) {
      ++it;
      break;
    }
  }
  return {mu, log_sigma <= log_min ? kMinLaplaceScale : std::exp(log_sigma), it};
}

}  // namespace pdepth
