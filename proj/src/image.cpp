#include "finex/image.hpp"

#include <string>

#include "finex/error.hpp"

namespace finex {

namespace {

void check_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || width > kMaxImageSide || height > kMaxImageSide) {
    throw InputError("image dimensions out of range: " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw InputError("unsupported channel count: " + std::to_string(channels));
  }
}

}  // namespace

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_dims(width, height, channels);
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InputError("pixel buffer length " + std::to_string(pixels_.size()) +
                     " does not match " + std::to_string(width) + "x" +
                     std::to_string(height) + "x" + std::to_string(channels));
  }
}

Image to_grayscale(const Image& img) {
  if (img.channels() == 1) return img;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(img.width()) * img.height());
  auto src = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    // integer form of the luma weights; +500 rounds half up
    out[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
  return Image(img.width(), img.height(), 1, std::move(out));
}

Image to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(img.width()) * img.height() * 3);
  auto src = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = src[i];
  }
  return Image(img.width(), img.height(), 3, std::move(out));
}

}  // namespace finex
