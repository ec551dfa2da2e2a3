#include "pdepth/scalar_map.hpp"

#include <cstring>
#include <string>

#include "pdepth/errors.hpp"

namespace pdepth {

std::string_view quantity_name(Quantity q) {
  switch (q) {
    case Quantity::kDepth: return "depth-m";
    case Quantity::kParallax: return "parallax-px";
    case Quantity::kInvParallax: return "inv-parallax";
    case Quantity::kSigma: return "sigma";
    case Quantity::kDelta: return "delta";
    case Quantity::kError: return "error";
  }
  return "unknown";
}

ScalarMap::ScalarMap(int width, int height, Quantity quantity, float fill)
    : width_(width), height_(height), quantity_(quantity) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "map dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ScalarMap::ScalarMap(int width, int height, Quantity quantity, std::vector<float> data)
    : width_(width), height_(height), quantity_(quantity), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "map dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kShapeMismatch, "map data length does not match width*height");
  }
}

std::size_t ScalarMap::count_invalid() const {
  std::size_t n = 0;
  for (float v : data_) n += is_valid_pixel(v) ? 0 : 1;
  return n;
}

bool ScalarMap::identical(const ScalarMap& other) const {
  return same_shape(other) && quantity_ == other.quantity_ &&
         (data_.empty() ||
          std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

void require_same_shape(const ScalarMap& a, const ScalarMap& b, std::string_view what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()));
  }
}

}  // namespace pdepth
