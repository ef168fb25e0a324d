#include <gtest/gtest.h>

#include <algorithm>

#include "finex/error.hpp"
#include "finex/geometry.hpp"
#include "finex/kernels.hpp"
#include "finex/ocr.hpp"
#include "finex/synthetic.hpp"
#include "test_support.hpp"

using namespace finex;

namespace {

OcrToken tok(std::string text, double conf, double x, double y, int line = kUnassignedLine) {
  return {std::move(text), quad_from_box(x, y, x + 30, y + 12), conf, line, std::nullopt};
}

PageTranscript random_transcript(synthetic::Rng& rng) {
  std::vector<OcrToken> tokens;
  const int n = static_cast<int>(rng.uniform(0, 30));
  for (int i = 0; i < n; ++i) {
    tokens.push_back(tok("w" + std::to_string(i), rng.uniform_real(0.0, 1.0),
                         rng.uniform_real(0, 500), rng.uniform_real(0, 500)));
  }
  return make_transcript(1, std::move(tokens));
}

class FixedBackend : public OcrBackend {
 public:
  explicit FixedBackend(std::vector<OcrToken> t) : tokens_(std::move(t)) {}
  std::vector<OcrToken> recognize(const Image&, const std::vector<std::string>&) override {
    return tokens_;
  }

 private:
  std::vector<OcrToken> tokens_;
};

}  // namespace

TEST(Geometry, SimpleQuads) {
  EXPECT_TRUE(is_simple_quad(quad_from_box(0, 0, 10, 5)));
  Quad bowtie{Point{0, 0}, Point{10, 10}, Point{10, 0}, Point{0, 10}};
  EXPECT_FALSE(is_simple_quad(bowtie));
  Quad collapsed{Point{0, 0}, Point{0, 0}, Point{10, 10}, Point{0, 10}};
  EXPECT_FALSE(is_simple_quad(collapsed));
}

TEST(Geometry, PointInQuad) {
  const auto q = quad_from_box(0, 0, 10, 10);
  EXPECT_TRUE(point_in_quad(q, {5, 5}));
  EXPECT_TRUE(point_in_quad(q, {0, 5}));
  EXPECT_FALSE(point_in_quad(q, {11, 5}));
  EXPECT_DOUBLE_EQ(point_segment_distance({5, 3}, {0, 0}, {10, 0}), 3.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({13, 4}, {0, 0}, {10, 0}), 5.0);
}

TEST(Transcript, OrdersByLineThenX) {
  const auto t = make_transcript(4, {tok("b", 0.9, 100, 10, 0), tok("c", 0.9, 0, 50, 1),
                                     tok("a", 0.9, 0, 10, 0)});
  EXPECT_EQ(t.page_no, 4);
  EXPECT_EQ(t.full_text, "a b\nc");
}

TEST(Transcript, AssignsMissingLines) {
  const auto t = make_transcript(1, {tok("Revenue", 0.9, 10, 100), tok("4,500", 0.9, 200, 101),
                                     tok("Profit", 0.9, 10, 140)});
  EXPECT_EQ(t.tokens[0].line_id, t.tokens[1].line_id);
  EXPECT_NE(t.tokens[0].line_id, t.tokens[2].line_id);
  EXPECT_EQ(t.full_text, "Revenue 4,500\nProfit");
}

TEST(Transcript, EmptyPage) {
  const auto t = make_transcript(2, {});
  EXPECT_TRUE(t.tokens.empty());
  EXPECT_EQ(t.mean_confidence, 0.0);
  EXPECT_EQ(t.full_text, "");
}

TEST(Filter, ThresholdArithmetic) {
  const auto t = make_transcript(1, {tok("a", 0.3, 0, 0, 0), tok("b", 0.6, 40, 0, 0), tok("c", 0.9, 80, 0, 0)});
  const auto f = filter_tokens(t, 0.5);
  ASSERT_EQ(f.tokens.size(), 2u);
  EXPECT_DOUBLE_EQ(f.mean_confidence, 0.75);
  EXPECT_EQ(f.full_text, "b c");
}

TEST(Filter, ZeroKeepsEverythingAndOneDropsLowTokens) {
  const auto t = make_transcript(1, {tok("a", 0.9, 0, 0, 0), tok("b", 0.9, 40, 0, 0)});
  EXPECT_EQ(filter_tokens(t, 0.0), t);
  const auto empty = filter_tokens(t, 1.0);
  EXPECT_TRUE(empty.tokens.empty());
  EXPECT_EQ(empty.mean_confidence, 0.0);
}

TEST(Filter, MonotoneInTheThreshold) {
  synthetic::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = random_transcript(rng);
    double a = rng.uniform_real(0, 1), b = rng.uniform_real(0, 1);
    if (a > b) std::swap(a, b);
    const auto fa = filter_tokens(t, a);
    const auto fb = filter_tokens(t, b);
    ASSERT_LE(fb.tokens.size(), fa.tokens.size());
    // Every token kept at the higher threshold is kept at the lower one.
    for (const auto& tk : fb.tokens) {
      EXPECT_NE(std::find(fa.tokens.begin(), fa.tokens.end(), tk), fa.tokens.end());
      EXPECT_GE(tk.confidence, b);
    }
    // Filtering is idempotent and composes as the stricter threshold.
    EXPECT_EQ(filter_tokens(fa, b), fb);
    EXPECT_EQ(filter_tokens(fb, b), fb);
  }
}

TEST(ValidateTokens, Violations) {
  EXPECT_NO_THROW(validate_tokens({tok("ok", 1.0, 0, 0)}, 100, 100));
  EXPECT_THROW(validate_tokens({tok("x", 1.7, 0, 0)}, 100, 100), ProtocolError);
  EXPECT_THROW(validate_tokens({tok("x", -0.1, 0, 0)}, 100, 100), ProtocolError);
  EXPECT_THROW(validate_tokens({tok("x", 0.5, 90, 0)}, 100, 100), ProtocolError);
  auto bad = tok("x", 0.5, 0, 0);
  bad.box = {Point{0, 0}, Point{10, 10}, Point{10, 0}, Point{0, 10}};
  EXPECT_THROW(validate_tokens({bad}, 100, 100), ProtocolError);
}

TEST(Transcribe, RejectsBackendConfidenceOutOfRange) {
  FixedBackend b({tok("x", 1.7, 0, 0)});
  const PageImage page{1, Image(100, 100), std::nullopt};
  EXPECT_THROW(transcribe(b, page, {"en"}), ProtocolError);
  EXPECT_THROW(transcribe(b, page, {}), ConfigError);
}

// -- synthetic backend -------------------------------------------------------

namespace {

synthetic::RenderedPage planted_page(std::uint32_t id) {
  synthetic::PageSpec spec;
  spec.page_id = id;
  spec.lines = {{{"Revenue"}, {"4,500"}}};
  // Lines differ in length and wording; identical lines stack glyphs into
  // columns, which the sideways check reads as rotated text.
  const std::vector<std::string> words = {"the", "board", "approved", "annual", "report", "of",
                                          "operations", "for", "fiscal", "year", "ended", "statements"};
  for (int i = 0; i < 12; ++i) {
    synthetic::LineSpec line;
    for (int k = 0; k < 3 + (i * 5) % 7; ++k) line.push_back({words[static_cast<std::size_t>((i * 7 + k * 5) % 12)]});
    spec.lines.push_back(std::move(line));
  }
  return synthetic::render_page(spec);
}

}  // namespace

TEST(SyntheticBackend, PlantedTokensComeBackVerbatim) {
  const auto page = planted_page(42);
  synthetic::SyntheticOcrBackend ocr;
  ocr.add_page(page.layout);
  const auto t = transcribe(ocr, PageImage{1, page.image, std::nullopt}, {"en"});
  ASSERT_GE(t.tokens.size(), 2u);
  EXPECT_EQ(t.tokens[0].text, "Revenue");
  EXPECT_EQ(t.tokens[1].text, "4,500");
  EXPECT_DOUBLE_EQ(t.tokens[0].confidence, 0.99);
  EXPECT_DOUBLE_EQ(t.tokens[1].confidence, 0.99);
  EXPECT_EQ(t.tokens.size(), page.layout.tokens.size());
}

TEST(SyntheticBackend, FlippedPageScalesConfidence) {
  const auto page = planted_page(43);
  synthetic::SyntheticOcrBackend ocr;
  ocr.add_page(page.layout);
  const auto tokens = ocr.recognize(kernels::rotate_quarter_turns(page.image, 2), {"en"});
  ASSERT_EQ(tokens.size(), page.layout.tokens.size());
  std::vector<std::string> texts;
  for (const auto& t : tokens) {
    EXPECT_NEAR(t.confidence, 0.99 * 0.2, 1e-12);
    texts.push_back(t.text);
  }
  EXPECT_NE(std::find(texts.begin(), texts.end(), "4,500"), texts.end());
  // Boxes land inside the flipped raster.
  EXPECT_NO_THROW(validate_tokens(tokens, page.image.width(), page.image.height()));
}

TEST(SyntheticBackend, UnknownAndBlankPagesAreEmpty) {
  const auto page = planted_page(44);
  synthetic::SyntheticOcrBackend ocr;  // nothing registered
  EXPECT_TRUE(ocr.recognize(page.image, {"en"}).empty());
  const auto blank = transcribe(ocr, PageImage{1, Image(850, 1100, 1, 250), std::nullopt}, {"en"});
  EXPECT_TRUE(blank.tokens.empty());
  EXPECT_EQ(blank.mean_confidence, 0.0);
}

TEST(SyntheticBackend, PageIdSurvivesTheRoundTrip) {
  for (std::uint32_t id : {0u, 1u, 77777u, (1u << synthetic::kPageIdBits) - 1}) {
    const auto page = planted_page(id);
    const auto t = kernels::serial::binarize(page.image, 128);
    EXPECT_EQ(synthetic::decode_page_id(t), id);
  }
}

TEST(SyntheticBackend, SaveLoadRoundTrip) {
  testkit::TempDir dir;
  const auto page = planted_page(45);
  synthetic::SyntheticOcrBackend ocr(0.3);
  ocr.add_page(page.layout);
  ocr.save(dir / "corpus.json");
  const auto loaded = synthetic::SyntheticOcrBackend::load(dir / "corpus.json");
  EXPECT_EQ(loaded->page_count(), 1u);
  EXPECT_DOUBLE_EQ(loaded->flip_confidence_factor(), 0.3);
  EXPECT_EQ(loaded->recognize(page.image, {"en"}), ocr.recognize(page.image, {"en"}));
}
