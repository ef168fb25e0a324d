#include "finex/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"

#include "finex/error.hpp"
#include "finex/kernels.hpp"
#include "finex/preprocess.hpp"
#include "finex/utf8.hpp"

using json = nlohmann::json;

namespace finex::synthetic {

namespace k = kernels::parallel;

namespace {

std::vector<char32_t> utf8_codepoints(const std::string& s) { return utf8::decode(s); }

int glyph_width(char32_t cp) {
  if (cp >= 0x2E80) return 15;  // CJK and friends
  return 7 + static_cast<int>(cp % 5);
}

int word_width(const std::string& word, const RenderStyle& st) {
  const auto cps = utf8_codepoints(word);
  int w = 0;
  for (auto cp : cps) w += glyph_width(cp) + st.char_gap;
  return cps.empty() ? 0 : w - st.char_gap;
}

class Canvas {
 public:
  Canvas(const RenderStyle& st) : img_(st.width, st.height, 1, st.paper), st_(st) {}

  void fill(int x0, int y0, int x1, int y1) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img_.width());
    y1 = std::min(y1, img_.height());
    if (x0 >= x1 || y0 >= y1) return;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) img_.at(x, y) = st_.ink;
    }
    bx0_ = std::min(bx0_, x0);
    by0_ = std::min(by0_, y0);
    bx1_ = std::max(bx1_, x1);
    by1_ = std::max(by1_, y1);
  }

  // body [x, x+w) x [baseline-body, baseline) plus ascender on the left
  void glyph(int x, int baseline, int w) {
    fill(x, baseline - st_.body_height, x + w, baseline);
    fill(x, baseline - st_.body_height - st_.ascender_height, x + std::min(st_.ascender_width, w),
         baseline - st_.body_height);
  }

  Rect ink_box() const {
    if (bx1_ <= bx0_) return Rect{0, 0, img_.width(), img_.height()};
    return Rect{bx0_, by0_, bx1_ - bx0_, by1_ - by0_};
  }
  Image& image() { return img_; }

 private:
  Image img_;
  const RenderStyle& st_;
  int bx0_ = 1 << 30, by0_ = 1 << 30, bx1_ = -1, by1_ = -1;
};

std::vector<int> barcode_bits(std::uint32_t id) {
  std::vector<int> bits = {1, 0, 1};
  int parity = 0;
  for (int i = 0; i < kPageIdBits; ++i) {
    const int b = static_cast<int>((id >> i) & 1U);
    bits.push_back(b);
    parity ^= b;
  }
  bits.push_back(parity);
  return bits;
}

struct Band {
  int y0;
  int y1;  // exclusive
};

std::vector<Band> row_bands(const Image& binary) {
  std::vector<Band> bands;
  int start = -1;
  for (int y = 0; y <= binary.height(); ++y) {
    bool inked = false;
    if (y < binary.height()) {
      auto r = binary.row(y);
      inked = std::any_of(r.begin(), r.end(), [](auto v) { return v != 0; });
    }
    if (inked && start < 0) start = y;
    if (!inked && start >= 0) {
      if (y - start >= 3) bands.push_back({start, y});
      start = -1;
    }
  }
  return bands;
}

// Projection dispersion (variance over squared mean, across the non-empty
// span) of the ink pixel set along lines tilted by angle_deg. Scale-free, so
// short CJK lines do not look like columns.
double tilt_score(const std::vector<kernels::EdgePixel>& ink, int w, int h, double angle_deg) {
  const double rad = angle_deg * 3.14159265358979323846 / 180.0;
  const double s = std::sin(rad), c = std::cos(rad);
  const int offset = w + h + 2;
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(w + h) * 2 + 8, 0);
  for (const auto& p : ink) {
    ++counts[static_cast<std::size_t>(static_cast<long>(std::floor(p.x * s + p.y * c + 0.5)) + offset)];
  }
  std::size_t lo = 0, hi = counts.size();
  while (lo < hi && counts[lo] == 0) ++lo;
  while (hi > lo && counts[hi - 1] == 0) --hi;
  if (hi <= lo) return 0.0;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sum += counts[i];
    sq += static_cast<double>(counts[i]) * counts[i];
  }
  const double n = static_cast<double>(hi - lo);
  const double mean = sum / n;
  return (sq / n - mean * mean) / (mean * mean);
}

double best_tilt(const std::vector<kernels::EdgePixel>& ink, int w, int h, double center,
                 double range, double step, double* score) {
  double best_angle = center, best = -1.0;
  const int n = static_cast<int>(std::lround(range / step));
  for (int i = -n; i <= n; ++i) {
    const double a = center + i * step;
    const double v = tilt_score(ink, w, h, a);
    if (v > best || (v == best && std::abs(a) < std::abs(best_angle))) {
      best = v;
      best_angle = a;
    }
  }
  if (score) *score = best;
  return best_angle;
}

}  // namespace

RenderedPage render_page(const PageSpec& spec, const RenderStyle& st) {
  if (spec.page_id >= (1U << kPageIdBits)) throw InputError("page id exceeds 20 bits");
  Canvas canvas(st);
  RenderedPage out;
  out.layout.page_id = spec.page_id;
  out.layout.width = st.width;
  out.layout.height = st.height;

  auto baseline_of = [&](int line) {
    return st.margin_top + st.ascender_height + st.body_height + line * st.line_pitch;
  };

  int x = st.margin_left;
  for (int bit : barcode_bits(spec.page_id)) {
    const int w = bit ? st.barcode_wide : st.barcode_narrow;
    canvas.glyph(x, baseline_of(0), w);
    x += w + st.barcode_gap;
  }

  int line = 1;
  for (const auto& words : spec.lines) {
    x = st.margin_left;
    for (const auto& word : words) {
      const int ww = word_width(word.text, st);
      if (ww == 0) continue;
      if (x > st.margin_left && x + ww > st.width - st.margin_left) {
        ++line;
        x = st.margin_left;
      }
      const int base = baseline_of(line);
      if (base + st.margin_top / 2 > st.height) throw InputError("page content overflows the page");
      int gx = x;
      for (auto cp : utf8_codepoints(word.text)) {
        canvas.glyph(gx, base, glyph_width(cp));
        gx += glyph_width(cp) + st.char_gap;
      }
      PlantedToken tok;
      tok.text = word.text;
      tok.confidence = word.confidence;
      tok.line = line;
      tok.language = spec.language;
      tok.box = quad_from_box(x, base - st.body_height - st.ascender_height, x + ww, base);
      out.layout.tokens.push_back(std::move(tok));
      x += ww + st.space_width;
    }
    ++line;
  }
  out.layout.content_box = canvas.ink_box();

  out.image = std::move(canvas.image());
  if (st.noise > 0) {
    Rng rng(0x9E3779B97F4A7C15ULL ^ spec.page_id);
    for (auto& px : out.image.pixels()) {
      const auto n = rng.uniform(-st.noise, st.noise);
      px = static_cast<std::uint8_t>(std::clamp<std::int64_t>(px + n, 0, 255));
    }
  }
  return out;
}

std::optional<std::uint32_t> decode_page_id(const Image& binary) {
  const auto bands = row_bands(binary);
  if (bands.empty()) return std::nullopt;
  const auto& band = bands.front();
  std::vector<int> widths;
  int run = 0;
  for (int x = 0; x <= binary.width(); ++x) {
    bool inked = false;
    if (x < binary.width()) {
      for (int y = band.y0; y < band.y1 && !inked; ++y) inked = binary.at(x, y) != 0;
    }
    if (inked) {
      ++run;
    } else if (run > 0) {
      widths.push_back(run);
      run = 0;
    }
  }
  if (widths.size() != static_cast<std::size_t>(kPageIdBits + 4)) return std::nullopt;
  const auto [mn, mx] = std::minmax_element(widths.begin(), widths.end());
  if (*mx < 2 * *mn) return std::nullopt;
  const double thr = 0.5 * (*mn + *mx);
  std::vector<int> bits;
  for (int w : widths) bits.push_back(w > thr ? 1 : 0);
  if (bits[0] != 1 || bits[1] != 0 || bits[2] != 1) return std::nullopt;
  std::uint32_t id = 0;
  int parity = 0;
  for (int i = 0; i < kPageIdBits; ++i) {
    id |= static_cast<std::uint32_t>(bits[3 + i]) << i;
    parity ^= bits[3 + i];
  }
  if (parity != bits.back()) return std::nullopt;
  return id;
}

void SyntheticOcrBackend::add_page(PlantedPage page) {
  std::lock_guard lock(mu_);
  pages_[page.page_id] = std::move(page);
}

std::size_t SyntheticOcrBackend::page_count() const {
  std::lock_guard lock(mu_);
  return pages_.size();
}

std::vector<OcrToken> SyntheticOcrBackend::recognize(const Image& page,
                                                     const std::vector<std::string>& /*languages*/) {
  const Image gray = to_grayscale(page);
  const int t = ink_threshold(gray, 40);
  if (t < 0) return {};
  const Image binary = k::binarize(gray, t);
  const int w = gray.width(), h = gray.height();

  std::vector<kernels::EdgePixel> ink;
  for (int y = 0; y < h; ++y) {
    auto r = binary.row(y);
    for (int x = 0; x < w; ++x) {
      if (r[x]) ink.push_back({x, y});
    }
  }
  // coarse sweeps on an evenly strided sample, refinement on every pixel
  std::vector<kernels::EdgePixel> sample;
  const std::size_t stride = ink.size() / 20000 + 1;
  for (std::size_t i = 0; i < ink.size(); i += stride) sample.push_back(ink[i]);
  double horizontal = 0.0, vertical = 0.0;
  double angle = best_tilt(sample, w, h, 0.0, 15.0, 0.5, &horizontal);
  best_tilt(sample, w, h, 90.0, 15.0, 1.0, &vertical);
  if (vertical > horizontal) return {};  // text runs sideways: unreadable
  angle = best_tilt(ink, w, h, angle, 0.5, 0.1, nullptr);

  Image level = std::abs(angle) < 1e-9 ? binary : k::binarize(k::rotate_bilinear(gray, -angle, 255), t);
  const int lw = level.width(), lh = level.height();

  long long top = 0, bottom = 0;
  for (const auto& b : row_bands(level)) {
    const int q = std::max(1, (b.y1 - b.y0) / 4);
    for (int y = b.y0; y < b.y0 + q; ++y) {
      for (auto v : level.row(y)) top += v;
    }
    for (int y = b.y1 - q; y < b.y1; ++y) {
      for (auto v : level.row(y)) bottom += v;
    }
  }
  const bool flipped = top > bottom;
  if (flipped) level = kernels::rotate_quarter_turns(level, 2);

  const auto id = decode_page_id(level);
  if (!id) return {};
  PlantedPage layout;
  {
    std::lock_guard lock(mu_);
    auto it = pages_.find(*id);
    if (it == pages_.end()) return {};
    layout = it->second;
  }

  int ox0 = lw, oy0 = lh, ox1 = -1, oy1 = -1;
  for (int y = 0; y < lh; ++y) {
    auto r = level.row(y);
    for (int x = 0; x < lw; ++x) {
      if (r[x]) {
        ox0 = std::min(ox0, x);
        ox1 = std::max(ox1, x);
        oy0 = std::min(oy0, y);
        oy1 = std::max(oy1, y);
      }
    }
  }
  const auto& cb = layout.content_box;
  const double sx = static_cast<double>(ox1 + 1 - ox0) / cb.w;
  const double sy = static_cast<double>(oy1 + 1 - oy0) / cb.h;
  const double rad = -angle * 3.14159265358979323846 / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);

  // layout -> upright level image -> level image -> input page (edge coords)
  auto map_point = [&](Point p) {
    double u = ox0 + (p.x - cb.x) * sx;
    double v = oy0 + (p.y - cb.y) * sy;
    if (flipped) {
      u = lw - u;
      v = lh - v;
    }
    const double du = u - 0.5 * lw, dv = v - 0.5 * lh;
    const double x = c * du - s * dv + 0.5 * w;
    const double y = s * du + c * dv + 0.5 * h;
    return Point{std::clamp(x, 0.0, static_cast<double>(w)), std::clamp(y, 0.0, static_cast<double>(h))};
  };

  std::vector<OcrToken> tokens;
  tokens.reserve(layout.tokens.size());
  for (const auto& pt : layout.tokens) {
    OcrToken tok;
    tok.text = pt.text;
    tok.confidence = flipped ? pt.confidence * flip_factor_ : pt.confidence;
    tok.line_id = pt.line;
    tok.language = pt.language;
    for (int i = 0; i < 4; ++i) tok.box[i] = map_point(pt.box[i]);
    if (!is_simple_quad(tok.box)) continue;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

namespace {

json quad_to_json(const Quad& q) {
  json a = json::array();
  for (const auto& p : q) a.push_back({p.x, p.y});
  return a;
}

Quad quad_from_json(const json& j) {
  Quad q{};
  if (!j.is_array() || j.size() != 4) throw InputError("box must have four points");
  for (int i = 0; i < 4; ++i) q[i] = Point{j[i].at(0).get<double>(), j[i].at(1).get<double>()};
  return q;
}

}  // namespace

void SyntheticOcrBackend::save(const std::filesystem::path& path) const {
  json root;
  root["flip_confidence_factor"] = flip_factor_;
  root["pages"] = json::array();
  std::lock_guard lock(mu_);
  for (const auto& [id, p] : pages_) {
    json jp;
    jp["page_id"] = id;
    jp["width"] = p.width;
    jp["height"] = p.height;
    jp["content_box"] = {p.content_box.x, p.content_box.y, p.content_box.w, p.content_box.h};
    jp["tokens"] = json::array();
    for (const auto& t : p.tokens) {
      jp["tokens"].push_back({{"text", t.text},
                              {"confidence", t.confidence},
                              {"line", t.line},
                              {"box", quad_to_json(t.box)},
                              {"language", t.language ? json(*t.language) : json(nullptr)}});
    }
    root["pages"].push_back(std::move(jp));
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus spec: " + path.string());
  out << root.dump() << '\n';
}

std::unique_ptr<SyntheticOcrBackend> SyntheticOcrBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read synthetic OCR corpus: " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("synthetic OCR corpus " + path.string() + ": " + e.what());
  }
  auto backend = std::make_unique<SyntheticOcrBackend>(root.value("flip_confidence_factor", 0.2));
  for (const auto& jp : root.at("pages")) {
    PlantedPage p;
    p.page_id = jp.at("page_id").get<std::uint32_t>();
    p.width = jp.at("width").get<int>();
    p.height = jp.at("height").get<int>();
    const auto& cb = jp.at("content_box");
    p.content_box = Rect{cb.at(0).get<int>(), cb.at(1).get<int>(), cb.at(2).get<int>(), cb.at(3).get<int>()};
    for (const auto& jt : jp.at("tokens")) {
      PlantedToken t;
      t.text = jt.at("text").get<std::string>();
      t.confidence = jt.at("confidence").get<double>();
      t.line = jt.at("line").get<int>();
      t.box = quad_from_json(jt.at("box"));
      if (jt.contains("language") && jt["language"].is_string()) t.language = jt["language"].get<std::string>();
      p.tokens.push_back(std::move(t));
    }
    backend->add_page(std::move(p));
  }
  return backend;
}

}  // namespace finex::synthetic
