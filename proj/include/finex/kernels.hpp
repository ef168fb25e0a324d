#pragma once

// Pixel kernels behind the preprocessing stage. Every kernel exists twice:
// `serial::` is the single-threaded reference, `parallel::` the OpenMP build
// used in production. Both produce bit-identical output for the same input;
// the test suite checks this and bench/ compares their speed.

#include <array>
#include <cstdint>
#include <vector>

#include "finex/image.hpp"

namespace finex::kernels {

using Histogram = std::array<std::uint64_t, 256>;

/// Hough votes over (angle, rho). Row a holds angle
/// `min_angle_deg + a * step_deg`; rho index r holds rho = r - rho_offset,
/// where rho = x*sin(angle) + y*cos(angle) (angle counterclockwise).
struct HoughAccumulator {
  double min_angle_deg = 0.0;
  double step_deg = 0.1;
  int n_angles = 0;
  int n_rho = 0;
  int rho_offset = 0;
  std::vector<std::uint32_t> votes;  // n_angles * n_rho

  std::uint32_t at(int angle_idx, int rho_idx) const {
    return votes[static_cast<std::size_t>(angle_idx) * n_rho + rho_idx];
  }
  double angle_deg(int angle_idx) const { return min_angle_deg + angle_idx * step_deg; }
};

/// Ink pixel count along lines rho = x*sin(angle) + y*cos(angle); bin i holds
/// rho = i - offset.
struct Projection {
  int offset = 0;
  std::vector<std::uint32_t> counts;
};

struct EdgePixel {
  int x;
  int y;
};

/// 5x5 Gaussian taps normalised to sum 1.
std::array<float, 5> gaussian_taps(double sigma);
/// Bicubic convolution kernel with parameter a.
double cubic_weight(double t, double a);
/// Otsu threshold from a histogram: values <= t form the dark class.
/// Returns -1 for a histogram with fewer than two populated bins.
int otsu_threshold(const Histogram& hist);
/// Output canvas size for a counterclockwise rotation by `angle_deg`.
std::pair<int, int> rotated_size(int width, int height, double angle_deg);
/// Lossless counterclockwise rotation by k * 90 degrees.
Image rotate_quarter_turns(const Image& img, int k);

#define FINEX_KERNEL_DECLS                                                                   \
  Histogram histogram(const Image& gray);                                                    \
  /* 1 where gray <= threshold, else 0 */                                                    \
  Image binarize(const Image& gray, int threshold);                                          \
  Image gaussian_blur(const Image& gray, double sigma);                                      \
  Image resize_bicubic(const Image& gray, int out_w, int out_h, double a);                   \
  /* tiles_x x tiles_y CLAHE; clip_limit is relative to the uniform bin height */            \
  Image clahe(const Image& gray, int tiles_x, int tiles_y, double clip_limit);               \
  /* counterclockwise about the centre, canvas expanded, bilinear, `fill` outside */         \
  Image rotate_bilinear(const Image& img, double angle_deg, std::uint8_t fill);              \
  /* squared Sobel magnitude of a 0/1 image */                                               \
  std::vector<std::uint32_t> gradient_energy(const Image& binary);                           \
  HoughAccumulator hough(const std::vector<EdgePixel>& edges, int width, int height,         \
                         double min_angle_deg, double max_angle_deg, double step_deg);       \
  Projection project(const Image& binary, double angle_deg);

namespace serial {
FINEX_KERNEL_DECLS
}  // namespace serial

namespace parallel {
FINEX_KERNEL_DECLS
}  // namespace parallel

#undef FINEX_KERNEL_DECLS

}  // namespace finex::kernels
