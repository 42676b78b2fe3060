#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "facade/error.hpp"

namespace facade {

using ClassId = std::uint16_t;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline int squared_distance(const Rgb& a, const Rgb& b) {
  const int dr = int(a.r) - int(b.r);
  const int dg = int(a.g) - int(b.g);
  const int db = int(a.b) - int(b.b);
  return dr * dr + dg * dg + db * db;
}

/// Dense row-major 2D raster.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::InvalidArgument, "grid dimensions must be >= 1");
    }
    data_.assign(std::size_t(width) * std::size_t(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::size_t index(int x, int y) const noexcept {
    return std::size_t(y) * std::size_t(width_) + std::size_t(x);
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using LabelMap = Grid<ClassId>;
using FacadeImage = Grid<Rgb>;

template <typename A, typename B>
bool same_dimensions(const Grid<A>& a, const Grid<B>& b) {
  return a.width() == b.width() && a.height() == b.height();
}

}  // namespace facade
