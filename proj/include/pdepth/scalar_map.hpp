#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace pdepth {

/// Physical meaning of the values held by a ScalarMap.
enum class Quantity {
  kDepth,         // meters
  kParallax,      // pixels
  kInvParallax,   // 1 / pixels
  kSigma,         // scale parameter, unit depends on the producer
  kDelta,         // dimensionless relative uncertainty
  kError,         // per-pixel error values
};

std::string_view quantity_name(Quantity q);

/// Marker stored in place of pixels that carry no usable value.
inline constexpr float kInvalidPixel = -std::numeric_limits<float>::infinity();

inline bool is_valid_pixel(float v) { return std::isfinite(v); }

/// Row-major 2-D grid of 32-bit floats, top row first.
class ScalarMap {
 public:
  ScalarMap() = default;
  ScalarMap(int width, int height, Quantity quantity, float fill = 0.0f);
  ScalarMap(int width, int height, Quantity quantity, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  Quantity quantity() const { return quantity_; }
  void set_quantity(Quantity q) { quantity_ = q; }

  float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const ScalarMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  std::size_t count_invalid() const;

  // Bitwise comparison, so two invalid markers compare equal.
  bool identical(const ScalarMap& other) const;

 private:
  int width_ = 0;
  int height_ = 0;
  Quantity quantity_ = Quantity::kDepth;
  std::vector<float> data_;
};

void require_same_shape(const ScalarMap& a, const ScalarMap& b, std::string_view what);

}  // namespace pdepth
