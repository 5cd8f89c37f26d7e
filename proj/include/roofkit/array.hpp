#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roofkit/error.hpp"

namespace roofkit {

// Dense row-major 2D grid. Rows index y (top to bottom), columns index x.
template <typename T>
class Array2D {
 public:
  using value_type = T;

  Array2D() = default;
  Array2D(int height, int width, T fill = T{})
      : height_(height), width_(width) {
    if (height < 0 || width < 0) throw ValidationError("negative array shape");
    data_.assign(static_cast<std::size_t>(height) * width, fill);
  }
  Array2D(int height, int width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (height < 0 || width < 0) throw ValidationError("negative array shape");
    if (data_.size() != static_cast<std::size_t>(height) * width) {
      throw ValidationError("array data length does not match shape");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <typename U>
  bool same_shape(const Array2D<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Array2D& a, const Array2D& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

// Binary masks store 0 / 1.
using Mask = Array2D<std::uint8_t>;
using LabelImage = Array2D<std::uint32_t>;
using FloatImage = Array2D<float>;

template <typename T, typename U>
void require_same_shape(const Array2D<T>& a, const Array2D<U>& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw ValidationError(std::string("shape mismatch: ") + what);
  }
}

}  // namespace roofkit
