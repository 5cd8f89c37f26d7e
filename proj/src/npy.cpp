#include "roofkit/npy.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string_view>

namespace roofkit {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are handled as little-endian host memory");

namespace {

constexpr std::uint8_t kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kAlign = 64;

std::optional<DType> parse_descr(std::string_view d) {
  if (d.size() != 3) return std::nullopt;
  const char order = d[0];
  const std::string_view code = d.substr(1);
  if (code == "u1" && (order == '|' || order == '<' || order == '=')) {
    return DType::kUint8;
  }
  if (order != '<' && order != '=') return std::nullopt;
  if (code == "u2") return DType::kUint16;
  if (code == "u4") return DType::kUint32;
  if (code == "f4") return DType::kFloat32;
  return std::nullopt;
}

// Minimal reader for the Python dict literal in an NPY header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  void parse(std::string& descr, bool& fortran, std::vector<std::size_t>& shape) {
    bool have_descr = false, have_order = false, have_shape = false;
    skip_ws();
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = quoted();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        descr = quoted();
        have_descr = true;
      } else if (key == "fortran_order") {
        fortran = boolean();
        have_order = true;
      } else if (key == "shape") {
        shape = tuple();
        have_shape = true;
      } else {
        throw FormatError("npy header: unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      if (peek() != '}') throw FormatError("npy header: expected ',' or '}'");
    }
    if (!have_descr || !have_order || !have_shape) {
      throw FormatError("npy header: missing descr, fortran_order or shape");
    }
  }

 private:
  char peek() const {
    if (pos_ >= text_.size()) throw FormatError("npy header: truncated");
    return text_[pos_];
  }
  void expect(char c) {
    if (peek() != c) {
      throw FormatError(std::string("npy header: expected '") + c + "'");
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  std::string quoted() {
    const char q = peek();
    if (q != '\'' && q != '"') throw FormatError("npy header: expected string");
    ++pos_;
    const auto end = text_.find(q, pos_);
    if (end == std::string_view::npos) {
      throw FormatError("npy header: unterminated string");
    }
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }
  bool boolean() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    throw FormatError("npy header: expected True or False");
  }
  std::vector<std::size_t> tuple() {
    std::vector<std::size_t> dims;
    expect('(');
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        throw FormatError("npy header: bad shape entry");
      }
      std::size_t value = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + static_cast<std::size_t>(text_[pos_] - '0');
        ++pos_;
      }
      dims.push_back(value);
      skip_ws();
      if (peek() == ',') ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kUint8: return 1;
    case DType::kUint16: return 2;
    case DType::kUint32: return 4;
    case DType::kFloat32: return 4;
  }
  return 0;
}

const char* dtype_descr(DType dtype) {
  switch (dtype) {
    case DType::kUint8: return "|u1";
    case DType::kUint16: return "<u2";
    case DType::kUint32: return "<u4";
    case DType::kFloat32: return "<f4";
  }
  return "";
}

std::size_t NpyArray::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

template <typename T>
std::vector<T> NpyArray::values() const {
  if (dtype_of<T>() != dtype) throw ValidationError("npy dtype mismatch");
  std::vector<T> out(element_count());
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
  return out;
}

template <typename T>
NpyArray NpyArray::from_values(std::vector<std::size_t> shape,
                               std::span<const T> values) {
  NpyArray a;
  a.dtype = dtype_of<T>();
  a.shape = std::move(shape);
  if (a.element_count() != values.size()) {
    throw ValidationError("npy shape does not match value count");
  }
  a.bytes.resize(values.size_bytes());
  std::memcpy(a.bytes.data(), values.data(), values.size_bytes());
  return a;
}

NpyArray decode_npy(std::span<const std::uint8_t> file) {
  if (file.size() < 10 || !std::equal(std::begin(kMagic), std::end(kMagic),
                                      file.begin())) {
    throw FormatError("not an npy file: bad magic");
  }
  const std::uint8_t major = file[6];
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = file[8] | (std::size_t{file[9]} << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (file.size() < 12) throw FormatError("npy: truncated preamble");
    header_len = file[8] | (std::size_t{file[9]} << 8) |
                 (std::size_t{file[10]} << 16) | (std::size_t{file[11]} << 24);
    offset = 12;
  } else {
    throw FormatError("npy: unknown format version " + std::to_string(major));
  }
  if (file.size() < offset + header_len) {
    throw FormatError("npy: header runs past end of file");
  }
  const std::string_view header(
      reinterpret_cast<const char*>(file.data() + offset), header_len);

  std::string descr;
  bool fortran = false;
  NpyArray a;
  HeaderParser(header).parse(descr, fortran, a.shape);
  if (fortran) throw UnsupportedError("npy: Fortran-order arrays not supported");
  const auto dtype = parse_descr(descr);
  if (!dtype) throw UnsupportedError("npy: unsupported dtype '" + descr + "'");
  a.dtype = *dtype;

  const std::size_t payload = a.element_count() * dtype_size(a.dtype);
  const std::size_t start = offset + header_len;
  if (file.size() - start != payload) {
    throw FormatError("npy: payload size " + std::to_string(file.size() - start) +
                      " does not match shape (" + std::to_string(payload) + ")");
  }
  a.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(start), file.end());
  return a;
}

std::vector<std::uint8_t> encode_npy(const NpyArray& a) {
  if (a.bytes.size() != a.element_count() * dtype_size(a.dtype)) {
    throw ValidationError("npy: byte payload does not match shape");
  }
  std::string header = std::string("{'descr': '") + dtype_descr(a.dtype) +
                       "', 'fortran_order': False, 'shape': " +
                       shape_literal(a.shape) + ", }";
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((kAlign - unpadded % kAlign) % kAlign, ' ');
  header.push_back('\n');
  if (header.size() > 0xFFFF) throw ValidationError("npy: header too long");

  std::vector<std::uint8_t> out(10 + header.size() + a.bytes.size());
  std::memcpy(out.data(), kMagic, sizeof(kMagic));
  out[6] = 1;
  out[7] = 0;
  out[8] = static_cast<std::uint8_t>(header.size() & 0xFF);
  out[9] = static_cast<std::uint8_t>(header.size() >> 8);
  std::memcpy(out.data() + 10, header.data(), header.size());
  if (!a.bytes.empty()) {
    std::memcpy(out.data() + 10 + header.size(), a.bytes.data(), a.bytes.size());
  }
  return out;
}

NpyArray read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  try {
    return decode_npy(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const UnsupportedError& e) {
    throw UnsupportedError(path.string() + ": " + e.what());
  }
}

void write_array(const NpyArray& array, const std::filesystem::path& path) {
  const auto bytes = encode_npy(array);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
NpyArray to_npy(const std::vector<Array2D<T>>& layers) {
  if (layers.empty()) throw ValidationError("cannot stack zero layers");
  const int h = layers[0].height(), w = layers[0].width();
  std::vector<T> values;
  values.reserve(layers.size() * layers[0].size());
  for (const auto& layer : layers) {
    if (layer.height() != h || layer.width() != w) {
      throw ValidationError("stacked layers differ in shape");
    }
    values.insert(values.end(), layer.data().begin(), layer.data().end());
  }
  return NpyArray::from_values<T>(
      {layers.size(), static_cast<std::size_t>(h), static_cast<std::size_t>(w)},
      values);
}

template <typename T>
Array2D<T> to_array2d(const NpyArray& a) {
  if (a.shape.size() != 2) throw ValidationError("expected a 2D array");
  return Array2D<T>(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]),
                    a.values<T>());
}

namespace {

template <typename Out, typename In>
std::vector<Out> widen(const NpyArray& a) {
  const auto in = a.values<In>();
  return std::vector<Out>(in.begin(), in.end());
}

template <typename T>
std::vector<Array2D<T>> split_layers(const NpyArray& a, std::vector<T> flat) {
  std::size_t layers = 1, h = 0, w = 0;
  if (a.shape.size() == 2) {
    h = a.shape[0];
    w = a.shape[1];
  } else if (a.shape.size() == 3) {
    layers = a.shape[0];
    h = a.shape[1];
    w = a.shape[2];
  } else {
    throw ValidationError("expected a 2D array or a 3D stack");
  }
  std::vector<Array2D<T>> out;
  const std::size_t plane = h * w;
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<T> data(flat.begin() + static_cast<std::ptrdiff_t>(l * plane),
                        flat.begin() + static_cast<std::ptrdiff_t>((l + 1) * plane));
    out.emplace_back(static_cast<int>(h), static_cast<int>(w), std::move(data));
  }
  return out;
}

}  // namespace

LabelImage to_label_image(const NpyArray& a) {
  if (a.shape.size() != 2) throw ValidationError("label raster must be 2D");
  std::vector<std::uint32_t> ids;
  switch (a.dtype) {
    case DType::kUint8: ids = widen<std::uint32_t, std::uint8_t>(a); break;
    case DType::kUint16: ids = widen<std::uint32_t, std::uint16_t>(a); break;
    case DType::kUint32: ids = a.values<std::uint32_t>(); break;
    case DType::kFloat32:
      throw ValidationError("label raster must have an unsigned integer dtype");
  }
  return LabelImage(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]),
                    std::move(ids));
}

std::vector<FloatImage> to_float_stack(const NpyArray& a) {
  if (a.dtype != DType::kFloat32) {
    throw ValidationError("probability stack must be float32");
  }
  return split_layers<float>(a, a.values<float>());
}

std::vector<Mask> to_mask_stack(const NpyArray& a) {
  if (a.dtype != DType::kUint8) throw ValidationError("mask stack must be uint8");
  auto flat = a.values<std::uint8_t>();
  for (auto& v : flat) v = v != 0;
  return split_layers<std::uint8_t>(a, std::move(flat));
}

#define ROOFKIT_INSTANTIATE(T)                                                   \
  template std::vector<T> NpyArray::values<T>() const;                          \
  template NpyArray NpyArray::from_values<T>(std::vector<std::size_t>,          \
                                             std::span<const T>);               \
  template NpyArray to_npy<T>(const std::vector<Array2D<T>>&);                   \
  template Array2D<T> to_array2d<T>(const NpyArray&);

ROOFKIT_INSTANTIATE(std::uint8_t)
ROOFKIT_INSTANTIATE(std::uint16_t)
ROOFKIT_INSTANTIATE(std::uint32_t)
ROOFKIT_INSTANTIATE(float)

#undef ROOFKIT_INSTANTIATE

}  // namespace roofkit
