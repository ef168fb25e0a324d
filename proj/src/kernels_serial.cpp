#include <cmath>

#include "kernels_impl.hpp"

namespace finex::kernels {

std::array<float, 5> gaussian_taps(double sigma) {
  std::array<double, 5> w{};
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i) {
    w[i + 2] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += w[i + 2];
  }
  std::array<float, 5> out{};
  for (int i = 0; i < 5; ++i) out[i] = static_cast<float>(w[i] / sum);
  return out;
}

double cubic_weight(double t, double a) {
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

int otsu_threshold(const Histogram& hist) {
  std::uint64_t total = 0;
  double sum_all = 0.0;
  int populated = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    sum_all += static_cast<double>(i) * hist[i];
    if (hist[i]) ++populated;
  }
  if (populated < 2) return -1;
  std::uint64_t w0 = 0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_t = -1;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += static_cast<double>(t) * hist[t];
    if (w0 == 0 || w0 == total) continue;
    const double w1 = static_cast<double>(total - w0);
    const double m0 = sum0 / static_cast<double>(w0);
    const double m1 = (sum_all - sum0) / w1;
    const double between = static_cast<double>(w0) * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

std::pair<int, int> rotated_size(int width, int height, double angle_deg) {
  const double rad = detail::deg2rad(angle_deg);
  const double c = std::abs(std::cos(rad)), s = std::abs(std::sin(rad));
  const int w = static_cast<int>(std::ceil(width * c + height * s - 1e-6));
  const int h = static_cast<int>(std::ceil(width * s + height * c - 1e-6));
  return {std::max(w, 1), std::max(h, 1)};
}

Image rotate_quarter_turns(const Image& img, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return img;
  const int w = img.width(), h = img.height(), ch = img.channels();
  const int ow = (k == 2) ? w : h;
  const int oh = (k == 2) ? h : w;
  Image out(ow, oh, ch, std::uint8_t{0});
  for (int v = 0; v < oh; ++v) {
    for (int u = 0; u < ow; ++u) {
      int sx = 0, sy = 0;
      switch (k) {
        case 1: sx = w - 1 - v; sy = u; break;          // 90 ccw
        case 2: sx = w - 1 - u; sy = h - 1 - v; break;  // 180
        case 3: sx = v; sy = h - 1 - u; break;          // 270 ccw
      }
      for (int c = 0; c < ch; ++c) out.at(u, v, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

namespace serial {

namespace {
struct Exec {
  template <class F>
  void operator()(int n, F&& f) const {
    for (int i = 0; i < n; ++i) f(i);
  }
};
constexpr Exec ex{};
}  // namespace

Histogram histogram(const Image& gray) { return detail::histogram(ex, gray); }
Image binarize(const Image& gray, int threshold) { return detail::binarize(ex, gray, threshold); }
Image gaussian_blur(const Image& gray, double sigma) { return detail::gaussian_blur(ex, gray, sigma); }
Image resize_bicubic(const Image& gray, int out_w, int out_h, double a) {
  return detail::resize_bicubic(ex, gray, out_w, out_h, a);
}
Image clahe(const Image& gray, int tiles_x, int tiles_y, double clip_limit) {
  return detail::clahe(ex, gray, tiles_x, tiles_y, clip_limit);
}
Image rotate_bilinear(const Image& img, double angle_deg, std::uint8_t fill) {
  return detail::rotate_bilinear(ex, img, angle_deg, fill);
}
std::vector<std::uint32_t> gradient_energy(const Image& binary) {
  return detail::gradient_energy(ex, binary);
}
HoughAccumulator hough(const std::vector<EdgePixel>& edges, int width, int height,
                       double min_angle_deg, double max_angle_deg, double step_deg) {
  return detail::hough(ex, edges, width, height, min_angle_deg, max_angle_deg, step_deg);
}
Projection project(const Image& binary, double angle_deg) {
  return detail::project(ex, binary, angle_deg);
}

}  // namespace serial
}  // namespace finex::kernels
