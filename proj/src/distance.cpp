#include "roofkit/distance.hpp"

#include <algorithm>
#include <cmath>

namespace roofkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (q - v)^2 + f(v) over the finite samples of a
// strided 1D line. `v` and `z` are scratch buffers of size n and n + 1.
void envelope_1d(double* f, int n, std::ptrdiff_t stride, std::vector<double>& line,
                 std::vector<int>& v, std::vector<double>& z) {
  for (int q = 0; q < n; ++q) line[q] = f[q * stride];

  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (line[q] == kInf) continue;
    const double fq = line[q] + static_cast<double>(q) * q;
    double s = -kInf;
    while (k >= 0) {
      const int p = v[k];
      s = (fq - (line[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : s;
    z[k + 1] = kInf;
  }

  if (k < 0) {
    for (int q = 0; q < n; ++q) f[q * stride] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    f[q * stride] = dq * dq + line[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_to(const Mask& sources) {
  const int h = sources.height(), w = sources.width();
  std::vector<double> grid(sources.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = sources[i] ? 0.0 : kInf;
  }
  const int n = std::max(h, w);
  std::vector<double> line(n);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  for (int c = 0; c < w; ++c) envelope_1d(grid.data() + c, h, w, line, v, z);
  for (int r = 0; r < h; ++r) {
    envelope_1d(grid.data() + static_cast<std::ptrdiff_t>(r) * w, w, 1, line, v, z);
  }
  return grid;
}

DistanceField distance_transform(const Mask& mask, DistanceSource from) {
  if (mask.empty()) throw ValidationError("distance_transform: empty raster");
  Mask sources(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool fg = mask[i] != 0;
    sources[i] = from == DistanceSource::kForeground ? fg : !fg;
  }
  const auto sq = squared_distance_to(sources);
  DistanceField out(mask.height(), mask.width());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    out[i] = static_cast<float>(std::sqrt(sq[i]));
  }
  return out;
}

}  // namespace roofkit
