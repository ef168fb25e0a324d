#pragma once

// Kernel bodies shared by kernels_serial.cpp and kernels_parallel.cpp. Each
// body takes an executor `ex(n, f)` that calls f(i) for i in [0, n); the
// serial executor loops, the OpenMP one splits the range across threads.
// Work items never write to the same output element, so the result does not
// depend on the executor.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "finex/error.hpp"
#include "finex/kernels.hpp"

namespace finex::kernels::detail {

inline std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

template <class Exec>
Histogram histogram(const Exec& ex, const Image& gray) {
  const int h = gray.height();
  const int chunk_rows = 32;
  const int n_chunks = (h + chunk_rows - 1) / chunk_rows;
  std::vector<Histogram> partial(static_cast<std::size_t>(n_chunks));
  ex(n_chunks, [&](int c) {
    auto& hist = partial[static_cast<std::size_t>(c)];
    hist.fill(0);
    const int y1 = std::min(h, (c + 1) * chunk_rows);
    for (int y = c * chunk_rows; y < y1; ++y) {
      for (auto v : gray.row(y)) ++hist[v];
    }
  });
  Histogram total{};
  for (const auto& p : partial) {
    for (int i = 0; i < 256; ++i) total[i] += p[i];
  }
  return total;
}

template <class Exec>
Image binarize(const Exec& ex, const Image& gray, int threshold) {
  Image out(gray.width(), gray.height(), 1, std::uint8_t{0});
  ex(gray.height(), [&](int y) {
    auto src = gray.row(y);
    auto dst = out.row(y);
    for (std::size_t x = 0; x < src.size(); ++x) dst[x] = src[x] <= threshold ? 1 : 0;
  });
  return out;
}

template <class Exec>
Image gaussian_blur(const Exec& ex, const Image& gray, double sigma) {
  const int w = gray.width(), h = gray.height();
  const auto taps = gaussian_taps(sigma);
  std::vector<float> tmp(static_cast<std::size_t>(w) * h);
  ex(h, [&](int y) {
    auto src = gray.row(y);
    float* dst = tmp.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      float acc = 0.0F;
      for (int k = -2; k <= 2; ++k) {
        const int xx = std::clamp(x + k, 0, w - 1);
        acc += taps[k + 2] * static_cast<float>(src[xx]);
      }
      dst[x] = acc;
    }
  });
  Image out(w, h, 1, std::uint8_t{0});
  ex(h, [&](int y) {
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      float acc = 0.0F;
      for (int k = -2; k <= 2; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        acc += taps[k + 2] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      dst[x] = clamp_u8(acc);
    }
  });
  return out;
}

struct CubicTaps {
  std::vector<int> index;     // 4 per output coordinate
  std::vector<double> weight;  // 4 per output coordinate
};

inline CubicTaps cubic_taps(int in_len, int out_len, double a) {
  CubicTaps t;
  t.index.resize(static_cast<std::size_t>(out_len) * 4);
  t.weight.resize(static_cast<std::size_t>(out_len) * 4);
  const double ratio = static_cast<double>(in_len) / out_len;
  for (int o = 0; o < out_len; ++o) {
    const double src = (o + 0.5) * ratio - 0.5;
    const int base = static_cast<int>(std::floor(src));
    const double frac = src - base;
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double wgt = cubic_weight(frac - (k - 1), a);
      t.index[o * 4 + k] = std::clamp(base + k - 1, 0, in_len - 1);
      t.weight[o * 4 + k] = wgt;
      sum += wgt;
    }
    for (int k = 0; k < 4; ++k) t.weight[o * 4 + k] /= sum;
  }
  return t;
}

template <class Exec>
Image resize_bicubic(const Exec& ex, const Image& gray, int out_w, int out_h, double a) {
  const int w = gray.width(), h = gray.height();
  const auto tx = cubic_taps(w, out_w, a);
  const auto ty = cubic_taps(h, out_h, a);
  std::vector<double> tmp(static_cast<std::size_t>(out_w) * h);
  ex(h, [&](int y) {
    auto src = gray.row(y);
    double* dst = tmp.data() + static_cast<std::size_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tx.weight[x * 4 + k] * src[tx.index[x * 4 + k]];
      dst[x] = acc;
    }
  });
  Image out(out_w, out_h, 1, std::uint8_t{0});
  ex(out_h, [&](int y) {
    auto dst = out.row(y);
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        acc += ty.weight[y * 4 + k] * tmp[static_cast<std::size_t>(ty.index[y * 4 + k]) * out_w + x];
      }
      dst[x] = clamp_u8(acc);
    }
  });
  return out;
}

// Tile k spans [bound[k], bound[k+1]).
inline std::vector<int> tile_bounds(int len, int tiles) {
  std::vector<int> b(static_cast<std::size_t>(tiles) + 1);
  for (int k = 0; k <= tiles; ++k) b[k] = static_cast<int>(static_cast<long long>(k) * len / tiles);
  return b;
}

/// Clipped-histogram mapping for one tile. A tile holding a single grey
/// value maps to identity.
inline std::array<std::uint8_t, 256> clahe_tile_lut(const Histogram& hist, std::uint64_t area,
                                                    double clip_limit) {
  std::array<std::uint8_t, 256> lut{};
  const int populated =
      static_cast<int>(std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; }));
  if (populated <= 1) {
    for (int i = 0; i < 256; ++i) lut[i] = static_cast<std::uint8_t>(i);
    return lut;
  }
  std::array<std::uint64_t, 256> h = hist;
  const auto limit =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(clip_limit * static_cast<double>(area) / 256.0));
  std::uint64_t excess = 0;
  for (auto& c : h) {
    if (c > limit) {
      excess += c - limit;
      c = limit;
    }
  }
  const std::uint64_t batch = excess / 256;
  std::uint64_t residual = excess - batch * 256;
  for (auto& c : h) c += batch;
  if (residual > 0) {
    const std::uint64_t step = std::max<std::uint64_t>(256 / residual, 1);
    for (std::uint64_t i = 0; i < 256 && residual > 0; i += step, --residual) ++h[i];
  }
  const double scale = 255.0 / static_cast<double>(area);
  std::uint64_t sum = 0;
  for (int i = 0; i < 256; ++i) {
    sum += h[i];
    lut[i] = clamp_u8(static_cast<double>(sum) * scale);
  }
  return lut;
}

template <class Exec>
Image clahe(const Exec& ex, const Image& gray, int tiles_x, int tiles_y, double clip_limit) {
  const int w = gray.width(), h = gray.height();
  tiles_x = std::clamp(tiles_x, 1, w);
  tiles_y = std::clamp(tiles_y, 1, h);
  const auto bx = tile_bounds(w, tiles_x);
  const auto by = tile_bounds(h, tiles_y);
  std::vector<std::array<std::uint8_t, 256>> luts(static_cast<std::size_t>(tiles_x) * tiles_y);
  ex(tiles_x * tiles_y, [&](int t) {
    const int tx = t % tiles_x, ty = t / tiles_x;
    Histogram hist{};
    for (int y = by[ty]; y < by[ty + 1]; ++y) {
      auto r = gray.row(y);
      for (int x = bx[tx]; x < bx[tx + 1]; ++x) ++hist[r[x]];
    }
    const auto area = static_cast<std::uint64_t>(bx[tx + 1] - bx[tx]) * (by[ty + 1] - by[ty]);
    luts[t] = clahe_tile_lut(hist, area, clip_limit);
  });
  std::vector<double> cx(tiles_x), cy(tiles_y);
  for (int k = 0; k < tiles_x; ++k) cx[k] = 0.5 * (bx[k] + bx[k + 1] - 1);
  for (int k = 0; k < tiles_y; ++k) cy[k] = 0.5 * (by[k] + by[k + 1] - 1);

  // left tile index and weight of the right neighbour for every column
  auto locate = [](const std::vector<double>& centers, double p, int& i0, int& i1, double& wgt) {
    const int n = static_cast<int>(centers.size());
    if (p <= centers.front()) {
      i0 = i1 = 0;
      wgt = 0.0;
      return;
    }
    if (p >= centers.back()) {
      i0 = i1 = n - 1;
      wgt = 0.0;
      return;
    }
    int k = static_cast<int>(std::upper_bound(centers.begin(), centers.end(), p) - centers.begin()) - 1;
    i0 = k;
    i1 = k + 1;
    wgt = (p - centers[k]) / (centers[k + 1] - centers[k]);
  };
  std::vector<int> x0(w), x1(w);
  std::vector<double> xw(w);
  for (int x = 0; x < w; ++x) locate(cx, x, x0[x], x1[x], xw[x]);

  Image out(w, h, 1, std::uint8_t{0});
  ex(h, [&](int y) {
    int y0, y1;
    double yw;
    locate(cy, y, y0, y1, yw);
    auto src = gray.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      const auto v = src[x];
      const auto& l00 = luts[static_cast<std::size_t>(y0) * tiles_x + x0[x]];
      const auto& l01 = luts[static_cast<std::size_t>(y0) * tiles_x + x1[x]];
      const auto& l10 = luts[static_cast<std::size_t>(y1) * tiles_x + x0[x]];
      const auto& l11 = luts[static_cast<std::size_t>(y1) * tiles_x + x1[x]];
      const double top = (1.0 - xw[x]) * l00[v] + xw[x] * l01[v];
      const double bot = (1.0 - xw[x]) * l10[v] + xw[x] * l11[v];
      dst[x] = clamp_u8((1.0 - yw) * top + yw * bot);
    }
  });
  return out;
}

template <class Exec>
Image rotate_bilinear(const Exec& ex, const Image& img, double angle_deg, std::uint8_t fill) {
  const auto [ow, oh] = rotated_size(img.width(), img.height(), angle_deg);
  const int w = img.width(), h = img.height(), ch = img.channels();
  const double rad = deg2rad(angle_deg);
  const double c = std::cos(rad), s = std::sin(rad);
  const double icx = 0.5 * (w - 1), icy = 0.5 * (h - 1);
  const double ocx = 0.5 * (ow - 1), ocy = 0.5 * (oh - 1);
  Image out(ow, oh, ch, fill);
  ex(oh, [&](int v) {
    auto dst = out.row(v);
    const double dv = v - ocy;
    for (int u = 0; u < ow; ++u) {
      const double du = u - ocx;
      const double sx = c * du - s * dv + icx;
      const double sy = s * du + c * dv + icy;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) continue;
      const double ax = sx - fx, ay = sy - fy;
      for (int k = 0; k < ch; ++k) {
        auto px = [&](int x, int y) -> double {
          return (x < 0 || y < 0 || x >= w || y >= h) ? fill : img.at(x, y, k);
        };
        const double top = (1.0 - ax) * px(x0, y0) + ax * px(x0 + 1, y0);
        const double bot = (1.0 - ax) * px(x0, y0 + 1) + ax * px(x0 + 1, y0 + 1);
        dst[static_cast<std::size_t>(u) * ch + k] = clamp_u8((1.0 - ay) * top + ay * bot);
      }
    }
  });
  return out;
}

template <class Exec>
std::vector<std::uint32_t> gradient_energy(const Exec& ex, const Image& binary) {
  const int w = binary.width(), h = binary.height();
  std::vector<std::uint32_t> out(static_cast<std::size_t>(w) * h, 0);
  ex(h, [&](int y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    auto rm = binary.row(ym), r0 = binary.row(y), rp = binary.row(yp);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int gx = (rm[xp] + 2 * r0[xp] + rp[xp]) - (rm[xm] + 2 * r0[xm] + rp[xm]);
      const int gy = (rp[xm] + 2 * rp[x] + rp[xp]) - (rm[xm] + 2 * rm[x] + rm[xp]);
      out[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint32_t>(gx * gx + gy * gy);
    }
  });
  return out;
}

template <class Exec>
HoughAccumulator hough(const Exec& ex, const std::vector<EdgePixel>& edges, int width, int height,
                       double min_angle_deg, double max_angle_deg, double step_deg) {
  HoughAccumulator acc;
  acc.min_angle_deg = min_angle_deg;
  acc.step_deg = step_deg;
  acc.n_angles = static_cast<int>(std::lround((max_angle_deg - min_angle_deg) / step_deg)) + 1;
  const double max_sin =
      std::max(std::abs(std::sin(deg2rad(min_angle_deg))), std::abs(std::sin(deg2rad(max_angle_deg))));
  const int reach = static_cast<int>(std::ceil(width * max_sin)) + 2;
  acc.rho_offset = reach;
  acc.n_rho = height + 2 * reach + 2;
  acc.votes.assign(static_cast<std::size_t>(acc.n_angles) * acc.n_rho, 0);
  ex(acc.n_angles, [&](int a) {
    const double rad = deg2rad(acc.angle_deg(a));
    const double s = std::sin(rad), c = std::cos(rad);
    std::uint32_t* row = acc.votes.data() + static_cast<std::size_t>(a) * acc.n_rho;
    for (const auto& e : edges) {
      const long r = std::lround(e.x * s + e.y * c) + acc.rho_offset;
      if (r >= 0 && r < acc.n_rho) ++row[r];
    }
  });
  return acc;
}

template <class Exec>
Projection project(const Exec& ex, const Image& binary, double angle_deg) {
  const int w = binary.width(), h = binary.height();
  const double rad = deg2rad(angle_deg);
  const double s = std::sin(rad), c = std::cos(rad);
  const double corners_rho[] = {0.0, w * s, h * c, w * s + h * c};
  const double lo = *std::min_element(std::begin(corners_rho), std::end(corners_rho));
  const double hi = *std::max_element(std::begin(corners_rho), std::end(corners_rho));
  Projection p;
  p.offset = static_cast<int>(std::ceil(-lo)) + 1;
  const auto n = static_cast<std::size_t>(std::ceil(hi) + p.offset + 2);
  const int chunk_rows = 32;
  const int n_chunks = (h + chunk_rows - 1) / chunk_rows;
  std::vector<std::vector<std::uint32_t>> partial(static_cast<std::size_t>(n_chunks));
  ex(n_chunks, [&](int k) {
    auto& counts = partial[static_cast<std::size_t>(k)];
    counts.assign(n, 0);
    const int y1 = std::min(h, (k + 1) * chunk_rows);
    for (int y = k * chunk_rows; y < y1; ++y) {
      auto r = binary.row(y);
      for (int x = 0; x < w; ++x) {
        if (r[x]) ++counts[static_cast<std::size_t>(std::lround(x * s + y * c) + p.offset)];
      }
    }
  });
  p.counts.assign(n, 0);
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < n; ++i) p.counts[i] += part[i];
  }
  return p;
}

}  // namespace finex::kernels::detail
