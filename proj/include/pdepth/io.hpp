#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdepth/geometry.hpp"
#include "pdepth/metrics.hpp"
#include "pdepth/scalar_map.hpp"
#include "pdepth/simulate.hpp"

namespace pdepth {

inline constexpr std::string_view kToolName = "pdepth";
inline constexpr std::string_view kToolVersion = "0.3.0";

// ---------------------------------------------------------------------------
// PFM maps
//
// Grayscale "Pf" variant only. A negative scale means little-endian payload,
// positive means big-endian. Rows are stored bottom-up. -inf is the invalid
// pixel marker; NaN and +inf are rejected. Maps are always written as
// "Pf\n<w> <h>\n-1.0\n" followed by little-endian floats.

ScalarMap decode_pfm(std::string_view bytes, Quantity quantity);
std::string encode_pfm(const ScalarMap& map);

ScalarMap read_map(const std::filesystem::path& path, Quantity quantity);
void write_map(const ScalarMap& map, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Poses: one frame pair per line, "tx ty tz qw qx qy qz", whitespace
// separated, meters. Blank lines and lines starting with '#' are skipped.

RelativePose parse_pose_line(std::string_view line);
std::vector<RelativePose> read_poses(const std::filesystem::path& path);
std::string format_pose_line(const RelativePose& pose);

/// "fx fy cx cy width height", separated by commas and/or whitespace.
CameraIntrinsics parse_intrinsics(std::string_view text);
std::string format_intrinsics(const CameraIntrinsics& k);

// ---------------------------------------------------------------------------
// Reports

struct MetricEntry {
  double value = 0.0;
  std::optional<double> ause;

  bool operator==(const MetricEntry&) const = default;
};

struct MetricReport {
  MetricEntry abs_rel;
  MetricEntry rmse_log;
  MetricEntry delta_125;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  std::string tool_version{kToolVersion};
  std::map<std::string, std::string> config;

  bool operator==(const MetricReport&) const = default;
};

std::string serialize_report(const MetricReport& report);
MetricReport parse_report(std::string_view json_text);

/// Two-column "fraction,value" text for one curve.
std::string format_curve(const std::vector<double>& fractions, const std::vector<double>& values);

/// Writes metric/oracle/error curves as <stem>_{metric,oracle,error}.csv.
void write_curves(const SparsificationResult& result, const std::filesystem::path& dir,
                  std::string_view stem);

// ---------------------------------------------------------------------------
// Config files: flat INI, "key = value" lines, '[section]' headers map to
// CLI subcommands.

/// Keys understood by the `simulate` subcommand, as a [simulate] section.
std::string simulation_config_ini(const SceneSpec& scene, const NoiseSpec& noise);

/// Numbers separated by whitespace and/or commas.
std::vector<double> read_samples(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace pdepth
