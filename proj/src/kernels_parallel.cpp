#include "kernels_impl.hpp"

namespace finex::kernels::parallel {

namespace {
struct Exec {
  template <class F>
  void operator()(int n, F&& f) const {
#pragma omp parallel for schedule(static)
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

}  // namespace finex::kernels::parallel
