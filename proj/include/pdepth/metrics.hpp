#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "pdepth/scalar_map.hpp"

namespace pdepth {

inline constexpr double kDefaultDepthCap = 80.0;
inline constexpr int kDefaultSparsificationBins = 100;

struct DepthMetrics {
  double abs_rel = 0.0;
  double rmse_log = 0.0;
  double delta_125 = 0.0;  // fraction of pixels with max(pred/gt, gt/pred) < 1.25
  std::size_t n_valid = 0;
};

/// Evaluates pixels with finite gt in (0, cap) and finite pred > 0.
DepthMetrics depth_metrics(const ScalarMap& gt, const ScalarMap& pred,
                           double cap = kDefaultDepthCap);

enum class DepthMetric { kAbsRel, kRmseLog, kDelta125 };

std::string_view metric_name(DepthMetric m);
DepthMetric parse_metric(std::string_view name);

/// How per-pixel errors collapse into the metric of the retained set.
enum class Reducer {
  kMean,      // abs_rel, 1 - delta
  kRootMean,  // rmse_log from squared log errors
};

Reducer reducer_for(DepthMetric m);

struct SparsificationResult {
  std::vector<double> fractions;
  std::vector<double> metric_curve;  // removal by decreasing uncertainty, normalized
  std::vector<double> oracle_curve;  // removal by decreasing true error, normalized
  std::vector<double> error_curve;   // metric - oracle
  double ause = 0.0;
};

/// Sparsification over paired per-pixel errors and uncertainties. Curves are
/// sampled at fractions k / n_bins, k = 0 .. n_bins - 1, and normalized by the
/// metric of the full set. Ties in either ranking resolve by input order.
SparsificationResult sparsification(std::span<const double> errors,
                                    std::span<const double> uncertainties, Reducer reducer,
                                    int n_bins = kDefaultSparsificationBins);

/// Map form; pixels where either map is invalid are skipped.
SparsificationResult sparsification(const ScalarMap& errors, const ScalarMap& uncertainties,
                                    Reducer reducer, int n_bins = kDefaultSparsificationBins);

/// Per-pixel error consistent with each metric: |pred - gt| / gt, squared log
/// error, or the 0/1 indicator of a delta < 1.25 failure. Pixels outside the
/// evaluation set are invalid.
ScalarMap per_pixel_error(const ScalarMap& gt, const ScalarMap& pred, DepthMetric metric,
                          double cap = kDefaultDepthCap);

/// Full sparsification for a depth metric. When the metric is exactly zero on
/// the evaluated set, every curve is zero and so is the AuSE.
SparsificationResult sparsification_for_metric(const ScalarMap& gt, const ScalarMap& pred,
                                               const ScalarMap& uncertainty, DepthMetric metric,
                                               int n_bins = kDefaultSparsificationBins,
                                               double cap = kDefaultDepthCap);

double ause_for_metric(const ScalarMap& gt, const ScalarMap& pred, const ScalarMap& uncertainty,
                       DepthMetric metric, int n_bins = kDefaultSparsificationBins,
                       double cap = kDefaultDepthCap);

}  // namespace pdepth
