#include "finex/ocr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "finex/error.hpp"

namespace finex {

const std::vector<std::string>& default_ocr_languages() {
  static const std::vector<std::string> langs = {"en", "zh", "id"};
  return langs;
}

namespace {

double center_y(const OcrToken& t) { return 0.5 * (quad_min_y(t.box) + quad_max_y(t.box)); }
double height(const OcrToken& t) { return quad_max_y(t.box) - quad_min_y(t.box); }

// Groups tokens into lines by vertical centre; a new line starts when the
// gap to the previous centre exceeds the median token height.
void assign_lines(std::vector<OcrToken>& tokens) {
  if (tokens.empty()) return;
  std::vector<double> heights;
  heights.reserve(tokens.size());
  for (const auto& t : tokens) heights.push_back(height(t));
  std::nth_element(heights.begin(), heights.begin() + heights.size() / 2, heights.end());
  const double gap = std::max(heights[heights.size() / 2], 1.0);

  std::vector<std::size_t> order(tokens.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return center_y(tokens[a]) < center_y(tokens[b]);
  });
  int line = 0;
  double prev = center_y(tokens[order.front()]);
  for (auto idx : order) {
    const double cy = center_y(tokens[idx]);
    if (cy - prev > gap) ++line;
    tokens[idx].line_id = line;
    prev = cy;
  }
}

std::string build_full_text(const std::vector<OcrToken>& tokens) {
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) text += tokens[i].line_id == tokens[i - 1].line_id ? ' ' : '\n';
    text += tokens[i].text;
  }
  return text;
}

double mean_conf(const std::vector<OcrToken>& tokens) {
  if (tokens.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : tokens) sum += t.confidence;
  return sum / static_cast<double>(tokens.size());
}

}  // namespace

PageTranscript make_transcript(int page_no, std::vector<OcrToken> tokens) {
  const bool missing = std::any_of(tokens.begin(), tokens.end(),
                                   [](const OcrToken& t) { return t.line_id == kUnassignedLine; });
  if (missing) assign_lines(tokens);
  std::stable_sort(tokens.begin(), tokens.end(), [](const OcrToken& a, const OcrToken& b) {
    if (a.line_id != b.line_id) return a.line_id < b.line_id;
    return quad_min_x(a.box) < quad_min_x(b.box);
  });
  PageTranscript t;
  t.page_no = page_no;
  t.full_text = build_full_text(tokens);
  t.mean_confidence = mean_conf(tokens);
  t.tokens = std::move(tokens);
  return t;
}

void validate_tokens(const std::vector<OcrToken>& tokens, int width, int height) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const std::string where = "token " + std::to_string(i) + " ('" + excerpt(t.text, 40) + "')";
    if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) {
      throw ProtocolError(where + ": confidence " + std::to_string(t.confidence) +
                          " outside [0,1]");
    }
    for (const auto& p : t.box) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0 || p.x > width ||
          p.y > height) {
        throw ProtocolError(where + ": box corner outside the " + std::to_string(width) + "x" +
                            std::to_string(height) + " page");
      }
    }
    if (!is_simple_quad(t.box)) throw ProtocolError(where + ": box is not a simple quadrilateral");
  }
}

PageTranscript transcribe(OcrBackend& backend, const PageImage& page,
                          const std::vector<std::string>& languages) {
  if (languages.empty()) throw ConfigError("transcribe needs at least one language");
  auto tokens = backend.recognize(page.image, languages);
  validate_tokens(tokens, page.image.width(), page.image.height());
  return make_transcript(page.page_no, std::move(tokens));
}

PageTranscript filter_tokens(const PageTranscript& t, double min_confidence) {
  std::vector<OcrToken> kept;
  kept.reserve(t.tokens.size());
  for (const auto& tok : t.tokens) {
    if (tok.confidence >= min_confidence) kept.push_back(tok);
  }
  PageTranscript out;
  out.page_no = t.page_no;
  out.full_text = build_full_text(kept);
  out.mean_confidence = mean_conf(kept);
  out.tokens = std::move(kept);
  return out;
}

}  // namespace finex
