#include "pdepth/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pdepth/errors.hpp"

namespace pdepth {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000FF00u) | ((v << 8) & 0x00FF0000u) | (v << 24);
}

bool is_space(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

// Reads one whitespace-delimited header token starting at `pos`.
std::string_view header_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
  const std::size_t begin = pos;
  while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
  if (begin == pos) fail(ErrorCode::kMalformedFile, "PFM header is truncated");
  return bytes.substr(begin, pos - begin);
}

template <typename T>
T parse_number(std::string_view token, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(ErrorCode::kMalformedFile, std::string("bad ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

ScalarMap decode_pfm(std::string_view bytes, Quantity quantity) {
  std::size_t pos = 0;
  const auto magic = header_token(bytes, pos);
  if (magic == "PF") fail(ErrorCode::kMalformedFile, "color PFM is not supported");
  if (magic != "Pf") fail(ErrorCode::kMalformedFile, "not a PFM file (missing 'Pf')");
  const int width = parse_number<int>(header_token(bytes, pos), "PFM width");
  const int height = parse_number<int>(header_token(bytes, pos), "PFM height");
  const double scale = parse_number<double>(header_token(bytes, pos), "PFM scale");
  if (width < 1 || height < 1) fail(ErrorCode::kMalformedFile, "PFM dimensions must be positive");
  if (!(std::isfinite(scale) && scale != 0.0)) {
    fail(ErrorCode::kMalformedFile, "PFM scale must be finite and non-zero");
  }
  // Exactly one whitespace byte separates the header from the payload.
  if (pos >= bytes.size() || !is_space(bytes[pos])) {
    fail(ErrorCode::kMalformedFile, "PFM header is truncated");
  }
  ++pos;

  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t payload = bytes.size() - pos;
  if (payload < count * 4) {
    fail(ErrorCode::kMalformedFile, "PFM payload truncated: " + std::to_string(payload) +
                                        " bytes, expected " + std::to_string(count * 4));
  }
  if (payload > count * 4) fail(ErrorCode::kMalformedFile, "PFM payload has trailing bytes");

  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  std::vector<float> data(count);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;  // bottom-up
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + pos + (static_cast<std::size_t>(row) * width + x) * 4, 4);
      if (swap) bits = byteswap32(bits);
      const float v = std::bit_cast<float>(bits);
      if (std::isnan(v) || v == std::numeric_limits<float>::infinity()) {
        fail(ErrorCode::kMalformedFile,
             "PFM contains NaN or +inf; only -inf is allowed as the invalid marker");
      }
      data[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return ScalarMap(width, height, quantity, std::move(data));
}

std::string encode_pfm(const ScalarMap& map) {
  std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + map.size() * 4);
  const bool swap = std::endian::native != std::endian::little;
  for (int row = 0; row < map.height(); ++row) {
    const int y = map.height() - 1 - row;
    for (int x = 0; x < map.width(); ++x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(map.at(x, y));
      if (swap) bits = byteswap32(bits);
      std::memcpy(out.data() + header + (static_cast<std::size_t>(row) * map.width() + x) * 4,
                  &bits, 4);
    }
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

ScalarMap read_map(const std::filesystem::path& path, Quantity quantity) {
  try {
    return decode_pfm(read_text(path), quantity);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_map(const ScalarMap& map, const std::filesystem::path& path) {
  write_text(path, encode_pfm(map));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> parse_numbers(std::string_view text, bool allow_commas) {
  std::vector<double> values;
  std::size_t pos = 0;
  auto separator = [&](char c) { return is_space(c) || (allow_commas && c == ','); };
  while (pos < text.size()) {
    while (pos < text.size() && separator(text[pos])) ++pos;
    if (pos >= text.size()) break;
    const std::size_t begin = pos;
    while (pos < text.size() && !separator(text[pos])) ++pos;
    const auto token = text.substr(begin, pos - begin);
    double v{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
      fail(ErrorCode::kInvalidArgument, "bad number '" + std::string(token) + "'");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace

std::vector<double> read_samples(const std::filesystem::path& path) {
  try {
    return parse_numbers(read_text(path), true);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

RelativePose parse_pose_line(std::string_view line) {
  const auto v = parse_numbers(line, false);
  if (v.size() != 7) {
    fail(ErrorCode::kInvalidArgument,
         "pose line needs 7 values 'tx ty tz qw qx qy qz', got " + std::to_string(v.size()));
  }
  RelativePose pose;
  pose.translation = {v[0], v[1], v[2]};
  pose.rotation = {v[3], v[4], v[5], v[6]};
  pose.validate();
  return pose;
}

std::vector<RelativePose> read_poses(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<RelativePose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      poses.push_back(parse_pose_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (poses.empty()) fail(ErrorCode::kInvalidArgument, path.string() + ": no poses");
  return poses;
}

std::string format_pose_line(const RelativePose& pose) {
  const auto& t = pose.translation;
  const auto& q = pose.rotation;
  return format_double(t[0]) + " " + format_double(t[1]) + " " + format_double(t[2]) + " " +
         format_double(q.w) + " " + format_double(q.x) + " " + format_double(q.y) + " " +
         format_double(q.z);
}

CameraIntrinsics parse_intrinsics(std::string_view text) {
  const auto v = parse_numbers(text, true);
  if (v.size() != 6) {
    fail(ErrorCode::kInvalidArgument, "intrinsics need 'fx fy cx cy width height'");
  }
  CameraIntrinsics k;
  k.fx = v[0];
  k.fy = v[1];
  k.cx = v[2];
  k.cy = v[3];
  if (v[4] != std::floor(v[4]) || v[5] != std::floor(v[5])) {
    fail(ErrorCode::kInvalidArgument, "image width and height must be integers");
  }
  k.width = static_cast<int>(v[4]);
  k.height = static_cast<int>(v[5]);
  k.validate();
  return k;
}

std::string format_intrinsics(const CameraIntrinsics& k) {
  return format_double(k.fx) + "," + format_double(k.fy) + "," + format_double(k.cx) + "," +
         format_double(k.cy) + "," + std::to_string(k.width) + "," + std::to_string(k.height);
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::ordered_json;

ordered_json entry_json(const MetricEntry& e) {
  ordered_json j;
  j["value"] = e.value;
  j["ause"] = e.ause ? ordered_json(*e.ause) : ordered_json(nullptr);
  return j;
}

MetricEntry entry_from(const ordered_json& j) {
  MetricEntry e;
  e.value = j.at("value").get<double>();
  if (!j.at("ause").is_null()) e.ause = j.at("ause").get<double>();
  return e;
}

}  // namespace

std::string serialize_report(const MetricReport& report) {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = report.tool_version;
  j["metrics"]["abs_rel"] = entry_json(report.abs_rel);
  j["metrics"]["rmse_log"] = entry_json(report.rmse_log);
  j["metrics"]["delta_125"] = entry_json(report.delta_125);
  j["pixels"]["valid"] = report.n_valid;
  j["pixels"]["invalid"] = report.n_invalid;
  j["config"] = ordered_json::object();
  for (const auto& [k, v] : report.config) j["config"][k] = v;
  return j.dump(2) + "\n";
}

MetricReport parse_report(std::string_view json_text) {
  try {
    const auto j = ordered_json::parse(json_text);
    MetricReport r;
    r.tool_version = j.at("version").get<std::string>();
    r.abs_rel = entry_from(j.at("metrics").at("abs_rel"));
    r.rmse_log = entry_from(j.at("metrics").at("rmse_log"));
    r.delta_125 = entry_from(j.at("metrics").at("delta_125"));
    r.n_valid = j.at("pixels").at("valid").get<std::size_t>();
    r.n_invalid = j.at("pixels").at("invalid").get<std::size_t>();
    for (const auto& [k, v] : j.at("config").items()) r.config[k] = v.get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedFile, std::string("bad report: ") + e.what());
  }
}

std::string format_curve(const std::vector<double>& fractions, const std::vector<double>& values) {
  if (fractions.size() != values.size()) {
    fail(ErrorCode::kShapeMismatch, "curve columns differ in length");
  }
  std::string out = "fraction,value\n";
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    out += format_double(fractions[k]) + "," + format_double(values[k]) + "\n";
  }
  return out;
}

void write_curves(const SparsificationResult& result, const std::filesystem::path& dir,
                  std::string_view stem) {
  const std::string s(stem);
  write_text(dir / (s + "_metric.csv"), format_curve(result.fractions, result.metric_curve));
  write_text(dir / (s + "_oracle.csv"), format_curve(result.fractions, result.oracle_curve));
  write_text(dir / (s + "_error.csv"), format_curve(result.fractions, result.error_curve));
}

std::string simulation_config_ini(const SceneSpec& scene, const NoiseSpec& noise) {
  std::string out = "[simulate]\n";
  out += "depth-model = " + std::string(depth_model_name(scene.depth_model)) + "\n";
  out += "zmin = " + format_double(scene.z_min) + "\n";
  out += "zmax = " + format_double(scene.z_max) + "\n";
  out += "seed = " + std::to_string(scene.seed) + "\n";
  out += "noise-model = " + std::string(noise_scale_model_name(noise.scale_model)) + "\n";
  out += "noise-scale = " + format_double(noise.scale_param) + "\n";
  out += "noise-seed = " + std::to_string(noise.seed) + "\n";
  return out;
}

}  // namespace pdepth
