#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace finex {

inline constexpr int kMaxImageSide = 20000;

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
class Image {
 public:
  Image() = default;
  /// Allocates a width x height image filled with `fill`.
  Image(int width, int height, int channels = 1, std::uint8_t fill = 255);
  /// Takes ownership of `pixels`; throws InputError when the size disagrees.
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t size_bytes() const noexcept { return pixels_.size(); }

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<std::uint8_t> row(int y) {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }
  std::span<const std::uint8_t> row(int y) const {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }

  std::span<std::uint8_t> pixels() noexcept { return pixels_; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> pixels_;
};

/// Luma = 0.299R + 0.587G + 0.114B, rounded to nearest. Gray input is copied.
Image to_grayscale(const Image& img);

/// Replicates a gray channel into RGB. RGB input is copied.
Image to_rgb(const Image& img);

}  // namespace finex
