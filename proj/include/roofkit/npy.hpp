#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roofkit/array.hpp"

namespace roofkit {

enum class DType { kUint8, kUint16, kUint32, kFloat32 };

std::size_t dtype_size(DType dtype);
// NPY descriptor string, e.g. "|u1" or "<f4".
const char* dtype_descr(DType dtype);

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<std::uint8_t>() { return DType::kUint8; }
template <>
constexpr DType dtype_of<std::uint16_t>() { return DType::kUint16; }
template <>
constexpr DType dtype_of<std::uint32_t>() { return DType::kUint32; }
template <>
constexpr DType dtype_of<float>() { return DType::kFloat32; }

// An n-dimensional C-order array as stored in an NPY file. The payload is
// kept as little-endian bytes; typed views are obtained through the
// conversion helpers below.
struct NpyArray {
  DType dtype = DType::kUint8;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;

  std::size_t element_count() const;

  template <typename T>
  std::vector<T> values() const;

  template <typename T>
  static NpyArray from_values(std::vector<std::size_t> shape,
                              std::span<const T> values);

  friend bool operator==(const NpyArray&, const NpyArray&) = default;
};

// Parses NPY 1.0 / 2.0 / 3.0 bytes. Throws FormatError on a malformed
// magic or header and UnsupportedError on Fortran order or a dtype outside
// {u1, u2, u4, f4}.
NpyArray decode_npy(std::span<const std::uint8_t> file_bytes);
// Emits NPY 1.0 with the same header numpy writes (64-byte aligned).
std::vector<std::uint8_t> encode_npy(const NpyArray& array);

NpyArray read_array(const std::filesystem::path& path);
void write_array(const NpyArray& array, const std::filesystem::path& path);

template <typename T>
NpyArray to_npy(const Array2D<T>& image) {
  return NpyArray::from_values<T>(
      {static_cast<std::size_t>(image.height()),
       static_cast<std::size_t>(image.width())},
      image.values());
}

// Stacks equally shaped layers along a leading axis.
template <typename T>
NpyArray to_npy(const std::vector<Array2D<T>>& layers);

// Requires a 2D array with exactly the dtype T.
template <typename T>
Array2D<T> to_array2d(const NpyArray& array);

// Instance ids from any unsigned 2D array.
LabelImage to_label_image(const NpyArray& array);

// 2D arrays become one layer; 3D arrays are split along the leading axis.
std::vector<FloatImage> to_float_stack(const NpyArray& array);
std::vector<Mask> to_mask_stack(const NpyArray& array);

}  // namespace roofkit
