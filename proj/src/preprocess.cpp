#include "finex/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "finex/error.hpp"
#include "finex/kernels.hpp"

namespace finex {

namespace k = kernels::parallel;

void validate_preprocess_config(const PreprocessConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("preprocess: ") + what);
  };
  require(cfg.crop_margin_frac >= 0.0 && cfg.crop_margin_frac < 0.5, "crop_margin_frac out of range");
  require(cfg.blank_ink_frac >= 0.0 && cfg.blank_ink_frac < 1.0, "blank_ink_frac out of range");
  require(cfg.orientation_long_side_px >= 64, "orientation_long_side_px must be >= 64");
  require(cfg.orientation_sweep_step_deg > 0.0, "orientation_sweep_step_deg must be positive");
  require(cfg.skew_range_deg > 0.0 && cfg.skew_range_deg <= 15.0, "skew_range_deg must be in (0, 15]");
  require(cfg.skew_step_deg > 0.0, "skew_step_deg must be positive");
  require(cfg.edge_percentile >= 0.0 && cfg.edge_percentile < 1.0, "edge_percentile out of range");
  require(cfg.target_long_side_px >= 64, "target_long_side_px must be >= 64");
  require(cfg.clahe_tiles >= 1, "clahe_tiles must be >= 1");
  require(cfg.clahe_clip_limit > 0.0, "clahe_clip_limit must be positive");
  require(cfg.blur_sigma > 0.0, "blur_sigma must be positive");
  require(!cfg.orientation_languages.empty(), "orientation_languages must not be empty");
}

int ink_threshold(const Image& gray, int min_contrast) {
  const auto hist = k::histogram(gray);
  const int t = kernels::otsu_threshold(hist);
  if (t < 0) return -1;
  double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
  for (int i = 0; i < 256; ++i) {
    const auto c = static_cast<double>(hist[i]);
    if (i <= t) {
      n0 += c;
      s0 += c * i;
    } else {
      n1 += c;
      s1 += c * i;
    }
  }
  if (n0 == 0 || n1 == 0) return -1;
  if (s1 / n1 - s0 / n0 < min_contrast) return -1;
  return t;
}

Segmentation segment_content(const Image& gray, const PreprocessConfig& cfg) {
  const int w = gray.width(), h = gray.height();
  Segmentation seg{Rect{0, 0, w, h}, true};
  const int t = ink_threshold(gray, cfg.min_ink_contrast);
  if (t < 0) return seg;

  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  long long ink = 0;
  for (int y = 0; y < h; ++y) {
    auto r = gray.row(y);
    for (int x = 0; x < w; ++x) {
      if (r[x] <= t) {
        ++ink;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (ink == 0 || static_cast<double>(ink) < cfg.blank_ink_frac * static_cast<double>(w) * h) {
    return seg;
  }
  const int mx = static_cast<int>(std::lround(cfg.crop_margin_frac * w));
  const int my = static_cast<int>(std::lround(cfg.crop_margin_frac * h));
  const int rx0 = std::max(0, x0 - mx), ry0 = std::max(0, y0 - my);
  const int rx1 = std::min(w - 1, x1 + mx), ry1 = std::min(h - 1, y1 + my);
  seg.rect = Rect{rx0, ry0, rx1 - rx0 + 1, ry1 - ry0 + 1};
  seg.blank = false;
  return seg;
}

namespace {

Image crop(const Image& img, const Rect& r) {
  if (r.x == 0 && r.y == 0 && r.w == img.width() && r.h == img.height()) return img;
  Image out(r.w, r.h, img.channels(), std::uint8_t{0});
  for (int y = 0; y < r.h; ++y) {
    auto src = img.row(r.y + y);
    auto dst = out.row(y);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r.x) * img.channels(), dst.size(),
                dst.begin());
  }
  return out;
}

Image downscale_to(const Image& gray, int long_side) {
  const int cur = std::max(gray.width(), gray.height());
  if (cur <= long_side) return gray;
  const double s = static_cast<double>(long_side) / cur;
  const int w = std::max(1, static_cast<int>(std::lround(gray.width() * s)));
  const int h = std::max(1, static_cast<int>(std::lround(gray.height() * s)));
  return k::resize_bicubic(gray, w, h, -0.5);
}

// Population variance of the profile over the span of non-empty bins,
// divided by the squared mean. Without the division a short-lined page
// (CJK text, narrow columns) scores higher across its lines than along them.
double profile_dispersion(const kernels::Projection& p) {
  std::size_t lo = 0, hi = p.counts.size();
  while (lo < hi && p.counts[lo] == 0) ++lo;
  while (hi > lo && p.counts[hi - 1] == 0) --hi;
  if (hi <= lo) return 0.0;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sum += p.counts[i];
    sq += static_cast<double>(p.counts[i]) * p.counts[i];
  }
  const double n = static_cast<double>(hi - lo);
  const double mean = sum / n;
  if (mean <= 0.0) return 0.0;
  return (sq / n - mean * mean) / (mean * mean);
}

// Best projection dispersion for text lines running along `axis_deg`, allowing
// for residual skew within the sweep.
double axis_score(const Image& binary, double axis_deg, const PreprocessConfig& cfg) {
  double best = 0.0;
  const int steps = static_cast<int>(std::lround(cfg.orientation_sweep_deg / cfg.orientation_sweep_step_deg));
  for (int i = -steps; i <= steps; ++i) {
    const double a = axis_deg + i * cfg.orientation_sweep_step_deg;
    best = std::max(best, profile_dispersion(k::project(binary, a)));
  }
  return best;
}

}  // namespace

OrientationResult classify_orientation(const Image& gray_in, OcrBackend& ocr,
                                       const PreprocessConfig& cfg) {
  OrientationResult res;
  const Image gray = downscale_to(to_grayscale(gray_in), cfg.orientation_long_side_px);
  const int t = ink_threshold(gray, cfg.min_ink_contrast);
  if (t >= 0) {
    const Image binary = k::binarize(gray, t);
    res.horizontal_score = axis_score(binary, 0.0, cfg);
    res.vertical_score = axis_score(binary, 90.0, cfg);
  }
  const int first = res.horizontal_score >= res.vertical_score ? 0 : 90;
  const int second = first + 180;
  try {
    auto mean_conf = [&](int deg) {
      const auto tokens = ocr.recognize(kernels::rotate_quarter_turns(gray, deg / 90),
                                        cfg.orientation_languages);
      return make_transcript(0, tokens).mean_confidence;
    };
    res.first_confidence = mean_conf(first);
    res.second_confidence = mean_conf(second);
    res.rotation_deg = res.second_confidence > res.first_confidence ? second : first;
  } catch (const Error&) {
    res.ocr_failed = true;
    res.rotation_deg = first;
  }
  return res;
}

SkewEstimate estimate_skew(const Image& gray_in, const PreprocessConfig& cfg) {
  SkewEstimate est;
  est.low_confidence = true;
  const Image gray = to_grayscale(gray_in);
  const int t = ink_threshold(gray, cfg.min_ink_contrast);
  if (t < 0) return est;
  const Image binary = k::binarize(gray, t);
  const auto energy = k::gradient_energy(binary);

  std::vector<std::uint32_t> sorted = energy;
  const auto nth = static_cast<std::size_t>(cfg.edge_percentile * static_cast<double>(sorted.size() - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(nth), sorted.end());
  const std::uint32_t thr = sorted[nth];

  std::vector<kernels::EdgePixel> edges;
  const int w = gray.width();
  for (std::size_t i = 0; i < energy.size(); ++i) {
    if (energy[i] > thr) edges.push_back({static_cast<int>(i % w), static_cast<int>(i / w)});
  }
  if (edges.empty()) return est;

  const auto acc = k::hough(edges, gray.width(), gray.height(), -cfg.skew_range_deg,
                            cfg.skew_range_deg, cfg.skew_step_deg);
  const std::uint32_t global_max = *std::max_element(acc.votes.begin(), acc.votes.end());
  const double floor_votes = cfg.hough_peak_fraction * global_max;

  // An angle's mass is the energy (sum of squared votes) of its bins above
  // the floor, which peaks when lines fall into single rho bins. Candidate
  // lines are rho-local maxima (within +-2 bins) above the floor.
  double best_mass = -1.0;
  int best_idx = -1, best_lines = 0;
  for (int a = 0; a < acc.n_angles; ++a) {
    double mass = 0.0;
    int lines = 0;
    for (int r = 0; r < acc.n_rho; ++r) {
      const auto v = acc.at(a, r);
      if (v == 0 || v < floor_votes) continue;
      mass += static_cast<double>(v) * v;
      bool peak = true;
      for (int d = -2; d <= 2 && peak; ++d) {
        const int rr = r + d;
        if (d == 0 || rr < 0 || rr >= acc.n_rho) continue;
        const auto u = acc.at(a, rr);
        peak = d < 0 ? v > u : v >= u;
      }
      if (peak) ++lines;
    }
    const double angle = acc.angle_deg(a);
    const bool better =
        mass > best_mass ||
        (mass == best_mass && best_idx >= 0 && std::abs(angle) < std::abs(acc.angle_deg(best_idx)));
    if (better) {
      best_mass = mass;
      best_idx = a;
      best_lines = lines;
    }
  }
  est.candidate_lines = best_lines;
  if (best_idx < 0 || best_lines < cfg.hough_min_lines) return est;
  // snap to the 0.1 degree grid to avoid -0.0 and float residue
  est.angle_deg = std::round(acc.angle_deg(best_idx) / cfg.skew_step_deg) * cfg.skew_step_deg;
  if (est.angle_deg == 0.0) est.angle_deg = 0.0;
  est.low_confidence = false;
  return est;
}

Image rotate(const Image& img, double angle_deg) {
  if (std::abs(angle_deg) > 360.0) throw InputError("rotation angle beyond +-360 degrees");
  const double quarters = angle_deg / 90.0;
  if (quarters == std::round(quarters)) {
    return kernels::rotate_quarter_turns(img, static_cast<int>(std::lround(quarters)));
  }
  return k::rotate_bilinear(img, angle_deg, 255);
}

Image renormalize(const Image& gray_in, int target_long_side_px, const PreprocessConfig& cfg,
                  PreprocessReport* report) {
  if (target_long_side_px < 64) {
    throw ConfigError("target_long_side_px must be >= 64, got " + std::to_string(target_long_side_px));
  }
  const Image gray = to_grayscale(gray_in);
  const int long_side = std::max(gray.width(), gray.height());
  const double scale = static_cast<double>(target_long_side_px) / long_side;
  int w = target_long_side_px, h = target_long_side_px;
  if (gray.width() >= gray.height()) {
    h = std::max(1, static_cast<int>(std::lround(gray.height() * scale)));
  } else {
    w = std::max(1, static_cast<int>(std::lround(gray.width() * scale)));
  }
  Image out = k::resize_bicubic(gray, w, h, cfg.bicubic_a);
  if (report) {
    report->scale_factor = scale;
    report->order.clear();
  }
  if (cfg.apply_clahe) {
    out = k::clahe(out, cfg.clahe_tiles, cfg.clahe_tiles, cfg.clahe_clip_limit);
    if (report) report->order.push_back("clahe");
  }
  if (cfg.apply_denoise) {
    out = k::gaussian_blur(out, cfg.blur_sigma);
    if (report) report->order.push_back("denoise");
  }
  if (report) {
    report->applied_clahe = cfg.apply_clahe;
    report->applied_denoise = cfg.apply_denoise;
    report->output_width = out.width();
    report->output_height = out.height();
  }
  return out;
}

PreprocessedPage preprocess_page(const PageImage& page, OcrBackend& ocr, const PreprocessConfig& cfg) {
  PreprocessedPage out;
  auto& rep = out.report;
  const Image gray = to_grayscale(page.image);

  const auto seg = segment_content(gray, cfg);
  rep.crop_rect = seg.rect;
  if (seg.blank) rep.flags.push_back("blank_page");
  Image work = crop(gray, seg.rect);

  const auto orient = classify_orientation(work, ocr, cfg);
  rep.coarse_rotation_deg = orient.rotation_deg;
  if (orient.ocr_failed) rep.flags.push_back("orientation_ocr_failed");
  work = kernels::rotate_quarter_turns(work, orient.rotation_deg / 90);

  const auto skew = estimate_skew(work, cfg);
  rep.fine_skew_deg = skew.angle_deg;
  if (skew.low_confidence) rep.flags.push_back("skew_low_confidence");
  if (skew.angle_deg != 0.0) work = rotate(work, -skew.angle_deg);

  out.image = renormalize(work, cfg.target_long_side_px, cfg, &rep);
  return out;
}

}  // namespace finex
