#pragma once

// Deterministic stand-ins for a real OCR engine. Pages are rendered as rows of
// block glyphs (a solid body plus a thin ascender on the left, so upright and
// flipped pages are distinguishable) and the first line of every page is a
// width-coded barcode carrying a 20-bit page id. The synthetic backend reads
// that id back from the pixels, looks up the planted token layout and reports
// it in the coordinate system of whatever image it was handed.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "finex/geometry.hpp"
#include "finex/image.hpp"
#include "finex/ocr.hpp"

namespace finex::synthetic {

inline constexpr int kPageIdBits = 20;

struct PlantedToken {
  std::string text;
  double confidence = 0.99;
  int line = 0;
  Quad box{};  // layout coordinates
  std::optional<std::string> language;
};

struct PlantedPage {
  std::uint32_t page_id = 0;
  int width = 0;
  int height = 0;
  Rect content_box;  // bounding box of every inked pixel, barcode included
  std::vector<PlantedToken> tokens;
};

struct WordSpec {
  std::string text;
  double confidence = 0.99;
};
using LineSpec = std::vector<WordSpec>;

struct PageSpec {
  std::uint32_t page_id = 0;
  std::vector<LineSpec> lines;
  std::optional<std::string> language;
};

struct RenderStyle {
  int width = 850;
  int height = 1100;
  int margin_left = 60;
  int margin_top = 70;
  int line_pitch = 40;
  int body_height = 14;
  int ascender_height = 7;
  int ascender_width = 3;
  int char_gap = 3;
  int space_width = 12;
  int barcode_narrow = 6;
  int barcode_wide = 16;
  int barcode_gap = 7;
  std::uint8_t paper = 250;
  std::uint8_t ink = 20;
  /// peak amplitude of uniform background noise; 0 disables
  int noise = 0;
};

struct RenderedPage {
  Image image;
  PlantedPage layout;
};

/// Draws the page; words wrap onto the next line when they overflow.
RenderedPage render_page(const PageSpec& spec, const RenderStyle& style = {});

/// Decodes the barcode of an upright, level binary (1 = ink) page.
std::optional<std::uint32_t> decode_page_id(const Image& binary);

class SyntheticOcrBackend : public OcrBackend {
 public:
  explicit SyntheticOcrBackend(double flip_confidence_factor = 0.2)
      : flip_factor_(flip_confidence_factor) {}

  void add_page(PlantedPage page);
  std::size_t page_count() const;
  double flip_confidence_factor() const { return flip_factor_; }

  std::vector<OcrToken> recognize(const Image& page,
                                  const std::vector<std::string>& languages) override;

  /// Reads/writes the corpus spec (JSON) that maps page ids to layouts.
  static std::unique_ptr<SyntheticOcrBackend> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  double flip_factor_;
  mutable std::mutex mu_;
  std::map<std::uint32_t, PlantedPage> pages_;
};

/// Portable deterministic RNG helpers (std distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(static_cast<std::mt19937_64::result_type>(seed)) {}
  std::uint64_t next() { return gen_(); }
  /// uniform integer in [lo, hi]
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  /// uniform double in [lo, hi)
  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace finex::synthetic
