#include "pdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pdepth/errors.hpp"
#include "pdepth/kernels.hpp"

namespace pdepth {

namespace {

bool evaluated(double g, double p, double cap) {
  return std::isfinite(g) && g > 0.0 && g < cap && std::isfinite(p) && p > 0.0;
}

double pixel_error(double g, double p, DepthMetric metric) {
  switch (metric) {
    case DepthMetric::kAbsRel:
      return std::abs(p - g) / g;
    case DepthMetric::kRmseLog: {
      const double d = std::log(p) - std::log(g);
      return d * d;
    }
    case DepthMetric::kDelta125: {
      const double ratio = p > g ? p / g : g / p;
      return ratio < 1.25 ? 0.0 : 1.0;
    }
  }
  return 0.0;
}

void require_cap(double cap) {
  if (!(cap > 0.0)) fail(ErrorCode::kInvalidArgument, "evaluation cap must be positive");
}

}  // namespace

DepthMetrics depth_metrics(const ScalarMap& gt, const ScalarMap& pred, double cap) {
  require_same_shape(gt, pred, "depth metrics");
  require_cap(cap);
  const auto sums = kernels::active().depth_error_sums(gt.data(), pred.data(), cap);
  if (sums.n_valid == 0) fail(ErrorCode::kEmptyEvaluation, "no valid pixels to evaluate");

  double sq_log = 0.0;
  const auto g = gt.data();
  const auto p = pred.data();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (evaluated(g[k], p[k], cap)) sq_log += pixel_error(g[k], p[k], DepthMetric::kRmseLog);
  }
  const double n = static_cast<double>(sums.n_valid);
  return {sums.abs_rel / n, std::sqrt(sq_log / n), static_cast<double>(sums.n_within_125) / n,
          static_cast<std::size_t>(sums.n_valid)};
}

std::string_view metric_name(DepthMetric m) {
  switch (m) {
    case DepthMetric::kAbsRel: return "abs_rel";
    case DepthMetric::kRmseLog: return "rmse_log";
    case DepthMetric::kDelta125: return "delta_125";
  }
  return "unknown";
}

DepthMetric parse_metric(std::string_view name) {
  if (name == "abs_rel") return DepthMetric::kAbsRel;
  if (name == "rmse_log") return DepthMetric::kRmseLog;
  if (name == "delta_125") return DepthMetric::kDelta125;
  fail(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

Reducer reducer_for(DepthMetric m) {
  return m == DepthMetric::kRmseLog ? Reducer::kRootMean : Reducer::kMean;
}

namespace {

// Indices sorted by decreasing key; equal keys keep input order.
std::vector<std::size_t> descending_order(std::span<const double> key) {
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return order;
}

// Metric of the retained set after removing the first n entries of `order`,
// for each requested n.
std::vector<double> retained_curve(std::span<const double> errors,
                                   const std::vector<std::size_t>& order,
                                   const std::vector<std::size_t>& removed, Reducer reducer) {
  const std::size_t n = order.size();
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + errors[order[k]];
  std::vector<double> curve;
  curve.reserve(removed.size());
  for (std::size_t r : removed) {
    const double mean = suffix[r] / static_cast<double>(n - r);
    curve.push_back(reducer == Reducer::kRootMean ? std::sqrt(mean) : mean);
  }
  return curve;
}

}  // namespace

SparsificationResult sparsification(std::span<const double> errors,
                                    std::span<const double> uncertainties, Reducer reducer,
                                    int n_bins) {
  if (errors.size() != uncertainties.size()) {
    fail(ErrorCode::kShapeMismatch, "sparsification: errors and uncertainties differ in size");
  }
  if (n_bins < 1) fail(ErrorCode::kInvalidArgument, "sparsification needs at least one bin");
  const std::size_t n = errors.size();
  if (n < static_cast<std::size_t>(n_bins)) {
    fail(ErrorCode::kEmptyEvaluation, "sparsification needs at least n_bins valid pixels (" +
                                          std::to_string(n) + " < " + std::to_string(n_bins) +
                                          ")");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(std::isfinite(errors[k]) && errors[k] >= 0.0) || std::isnan(uncertainties[k])) {
      fail(ErrorCode::kDomain, "sparsification: errors must be finite and non-negative");
    }
  }

  SparsificationResult out;
  std::vector<std::size_t> removed;
  for (int k = 0; k < n_bins; ++k) {
    out.fractions.push_back(static_cast<double>(k) / n_bins);
    removed.push_back(static_cast<std::size_t>(k) * n / static_cast<std::size_t>(n_bins));
  }

  const auto by_uncertainty = descending_order(uncertainties);
  const auto by_error = descending_order(errors);
  auto metric = retained_curve(errors, by_uncertainty, removed, reducer);
  auto oracle = retained_curve(errors, by_error, removed, reducer);

  // Both curves start from the same full set; use one value so the gap is 0.
  const double full = metric.front();
  oracle.front() = full;
  if (!(full > 0.0 && std::isfinite(full))) {
    fail(ErrorCode::kNormalization, "metric over the full set is zero; cannot normalize");
  }
  for (std::size_t k = 0; k < metric.size(); ++k) {
    metric[k] /= full;
    oracle[k] /= full;
  }
  out.error_curve.resize(metric.size());
  for (std::size_t k = 0; k < metric.size(); ++k) out.error_curve[k] = metric[k] - oracle[k];
  for (std::size_t k = 0; k + 1 < metric.size(); ++k) {
    out.ause += (out.fractions[k + 1] - out.fractions[k]) *
                (out.error_curve[k] + out.error_curve[k + 1]) * 0.5;
  }
  out.metric_curve = std::move(metric);
  out.oracle_curve = std::move(oracle);
  return out;
}

SparsificationResult sparsification(const ScalarMap& errors, const ScalarMap& uncertainties,
                                    Reducer reducer, int n_bins) {
  require_same_shape(errors, uncertainties, "sparsification");
  std::vector<double> e;
  std::vector<double> u;
  const auto ed = errors.data();
  const auto ud = uncertainties.data();
  for (std::size_t k = 0; k < ed.size(); ++k) {
    if (!is_valid_pixel(ed[k]) || !is_valid_pixel(ud[k])) continue;
    e.push_back(ed[k]);
    u.push_back(ud[k]);
  }
  return sparsification(e, u, reducer, n_bins);
}

ScalarMap per_pixel_error(const ScalarMap& gt, const ScalarMap& pred, DepthMetric metric,
                          double cap) {
  require_same_shape(gt, pred, "per-pixel error");
  require_cap(cap);
  ScalarMap out(gt.width(), gt.height(), Quantity::kError, kInvalidPixel);
  const auto g = gt.data();
  const auto p = pred.data();
  auto o = out.data();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (evaluated(g[k], p[k], cap)) o[k] = static_cast<float>(pixel_error(g[k], p[k], metric));
  }
  return out;
}

SparsificationResult sparsification_for_metric(const ScalarMap& gt, const ScalarMap& pred,
                                               const ScalarMap& uncertainty, DepthMetric metric,
                                               int n_bins, double cap) {
  require_same_shape(gt, pred, "sparsification");
  require_same_shape(gt, uncertainty, "sparsification");
  require_cap(cap);
  std::vector<double> e;
  std::vector<double> u;
  const auto g = gt.data();
  const auto p = pred.data();
  const auto un = uncertainty.data();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!evaluated(g[k], p[k], cap) || !is_valid_pixel(un[k])) continue;
    e.push_back(pixel_error(g[k], p[k], metric));
    u.push_back(un[k]);
  }
  if (e.empty()) fail(ErrorCode::kEmptyEvaluation, "no valid pixels to evaluate");
  if (std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; }) &&
      e.size() >= static_cast<std::size_t>(std::max(n_bins, 1))) {
    SparsificationResult zero;
    for (int k = 0; k < n_bins; ++k) zero.fractions.push_back(static_cast<double>(k) / n_bins);
    zero.metric_curve.assign(zero.fractions.size(), 0.0);
    zero.oracle_curve = zero.metric_curve;
    zero.error_curve = zero.metric_curve;
    return zero;
  }
  return sparsification(e, u, reducer_for(metric), n_bins);
}

double ause_for_metric(const ScalarMap& gt, const ScalarMap& pred, const ScalarMap& uncertainty,
                       DepthMetric metric, int n_bins, double cap) {
  return sparsification_for_metric(gt, pred, uncertainty, metric, n_bins, cap).ause;
}

}  // namespace pdepth
