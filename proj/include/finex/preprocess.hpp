#pragma once

#include <string>
#include <vector>

#include "finex/document.hpp"
#include "finex/geometry.hpp"
#include "finex/image.hpp"
#include "finex/ocr.hpp"

namespace finex {

/// Every preprocessing constant, overridable from the pipeline config.
struct PreprocessConfig {
  // segmentation
  double crop_margin_frac = 0.02;
  double blank_ink_frac = 0.001;
  /// dark/light class means closer than this are treated as "no ink"
  int min_ink_contrast = 40;

  // coarse orientation
  int orientation_long_side_px = 1000;
  double orientation_sweep_deg = 15.0;
  double orientation_sweep_step_deg = 1.0;
  std::vector<std::string> orientation_languages = {"en", "zh", "id"};

  // fine skew
  double skew_range_deg = 15.0;
  double skew_step_deg = 0.1;
  double edge_percentile = 0.90;
  /// Hough peaks below this fraction of the strongest cell are ignored
  double hough_peak_fraction = 0.5;
  int hough_min_lines = 3;

  // re-normalisation
  int target_long_side_px = 1600;
  double bicubic_a = -0.5;
  int clahe_tiles = 8;
  double clahe_clip_limit = 2.0;
  bool apply_clahe = true;
  double blur_sigma = 0.8;
  bool apply_denoise = true;
};

/// Throws ConfigError on out-of-range values.
void validate_preprocess_config(const PreprocessConfig& cfg);

struct PreprocessReport {
  Rect crop_rect;
  int coarse_rotation_deg = 0;
  double fine_skew_deg = 0.0;
  double scale_factor = 1.0;
  bool applied_clahe = false;
  bool applied_denoise = false;
  /// enhancement order, e.g. {"clahe", "denoise"}
  std::vector<std::string> order;
  /// degenerate fallbacks: blank_page, orientation_ocr_failed, skew_low_confidence
  std::vector<std::string> flags;
  int output_width = 0;
  int output_height = 0;
};

/// Ink bounding box grown by the crop margin, or the whole page when the
/// ink covers less than blank_ink_frac of it.
struct Segmentation {
  Rect rect;
  bool blank = false;
};
Segmentation segment_content(const Image& gray, const PreprocessConfig& cfg = {});

/// Ink threshold (values <= threshold are ink) or -1 when the page is not
/// bimodal enough to hold ink.
int ink_threshold(const Image& gray, int min_contrast);

struct OrientationResult {
  int rotation_deg = 0;  // counterclockwise correction
  bool ocr_failed = false;
  double horizontal_score = 0.0;
  double vertical_score = 0.0;
  double first_confidence = 0.0;
  double second_confidence = 0.0;
};
OrientationResult classify_orientation(const Image& gray, OcrBackend& ocr,
                                       const PreprocessConfig& cfg = {});

struct SkewEstimate {
  double angle_deg = 0.0;  // counterclockwise tilt of the text lines
  bool low_confidence = false;
  int candidate_lines = 0;
};
SkewEstimate estimate_skew(const Image& gray, const PreprocessConfig& cfg = {});

/// Counterclockwise rotation about the centre on an expanded white canvas;
/// exact for multiples of 90 degrees. |angle_deg| must be <= 360.
Image rotate(const Image& img, double angle_deg);

/// Bicubic resample to the target long side, then CLAHE, then Gaussian
/// denoise. Throws ConfigError when target_long_side_px < 64.
Image renormalize(const Image& gray, int target_long_side_px, const PreprocessConfig& cfg = {},
                  PreprocessReport* report = nullptr);

struct PreprocessedPage {
  Image image;
  PreprocessReport report;
};

PreprocessedPage preprocess_page(const PageImage& page, OcrBackend& ocr,
                                 const PreprocessConfig& cfg = {});

}  // namespace finex
