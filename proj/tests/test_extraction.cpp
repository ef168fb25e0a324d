#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <mutex>
#include <set>

#include "finex/error.hpp"
#include "finex/extraction.hpp"
#include "finex/retrieval.hpp"
#include "finex/utf8.hpp"
#include "test_support.hpp"

using namespace finex;

namespace {

OcrToken tok(std::string text, double x, double y, int line, double conf = 0.95) {
  return {std::move(text), quad_from_box(x, y, x + 60, y + 14), conf, line, std::nullopt};
}

PageTranscript page(int no, std::vector<OcrToken> tokens) { return make_transcript(no, std::move(tokens)); }

PageTranscript income_page(int no, const std::string& header = "IDR'000") {
  return page(no, {tok("Income", 10, 10, 0), tok("statement", 80, 10, 0), tok(header, 160, 10, 0),
                   tok("Revenue", 10, 40, 1), tok("4,500", 200, 40, 1),
                   tok("Net", 10, 70, 2), tok("profit", 80, 70, 2), tok("(1,200)", 200, 70, 2)});
}

// Replies from a queue, remembering every prompt.
class QueueBackend : public VlmBackend {
 public:
  explicit QueueBackend(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}
  std::string generate(const VlmRequest& r) override {
    std::lock_guard lock(mu_);
    prompts.push_back(r.prompt);
    images.push_back(r.images.size());
    if (replies_.empty()) return "no more replies";
    auto s = replies_.front();
    replies_.pop_front();
    return s;
  }
  std::vector<std::string> prompts;
  std::vector<std::size_t> images;

 private:
  std::mutex mu_;
  std::deque<std::string> replies_;
};

class DownBackend : public VlmBackend {
 public:
  int calls = 0;
  std::string generate(const VlmRequest&) override {
    ++calls;
    throw TransportError("connection refused");
  }
};

struct Harness {
  std::vector<PageTranscript> all;
  ExtractionRequest req;
  ExtractOptions opts;

  Harness(const std::string& field, std::vector<PageTranscript> pages, int n_pages, std::vector<int> retained) {
    all = std::move(pages);
    auto spec = default_field_shape(field);
    spec.keywords["en"] = {field};
    PromptTemplates t;
    t.add(field, "en", "Target field: {{field}}\n{{ocr_text}}");
    std::vector<ExtractionPage> ep;
    for (int no : retained) {
      for (const auto& p : all)
        if (p.page_no == no) ep.push_back({no, Image(50, 50), p});
    }
    req = build_prompt(spec, ep, "en", t);
    opts.retry = RetryPolicy{2, 0.0, 0.0};
    opts.n_pages = n_pages;
    opts.retained = retained;
    opts.all_pages = all;
  }
};

bool has_warning(const std::vector<std::string>& ws, const std::string& needle) {
  return std::any_of(ws.begin(), ws.end(), [&](const auto& w) { return w.find(needle) != std::string::npos; });
}

}  // namespace

// -- overlay -------------------------------------------------------------------

TEST(Overlay, EmptyTranscriptIsACopy) {
  const Image img(40, 30, 3, 180);
  EXPECT_EQ(render_overlay(img, PageTranscript{}), img);
}

TEST(Overlay, OneBoxChangesExactlyItsStroke) {
  const Image img(60, 40, 3, 200);
  PageTranscript t;
  t.tokens.push_back({"x", quad_from_box(10, 10, 30, 20), 0.9, 0, std::nullopt});
  const auto out = render_overlay(img, t);
  // Oracle: pixel centres inside [10,30]x[10,20] closer than 2 px to an edge.
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 60; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool inside = cx >= 10 && cx <= 30 && cy >= 10 && cy <= 20;
      const double d = std::min({cx - 10, 30 - cx, cy - 10, 20 - cy});
      const bool stroke = inside && d < 2.0;
      for (int c = 0; c < 3; ++c) {
        const int want = stroke ? kHighlightRgb[c] : 200;
        ASSERT_EQ(out.at(x, y, c), want) << x << "," << y;
      }
    }
  }
}

TEST(Overlay, GrayPagesGetBlackStrokes) {
  const Image img(30, 30, 1, 200);
  PageTranscript t;
  t.tokens.push_back({"x", quad_from_box(5, 5, 25, 25), 0.9, 0, std::nullopt});
  const auto out = render_overlay(img, t);
  EXPECT_EQ(out.at(5, 5), 0);
  EXPECT_EQ(out.at(15, 15), 200);
}

TEST(Overlay, LowConfidenceTokensAreSkipped) {
  const Image img(30, 30, 3, 200);
  PageTranscript t;
  t.tokens.push_back({"x", quad_from_box(5, 5, 25, 25), 0.3, 0, std::nullopt});
  EXPECT_EQ(render_overlay(img, t, 0.5), img);
  EXPECT_NE(render_overlay(img, t, 0.2), img);
}

TEST(Overlay, OverlappingBoxesBothDrawnInAnyOrder) {
  const Image img(80, 60, 3, 200);
  PageTranscript ab, ba;
  const OcrToken a{"a", quad_from_box(5, 5, 40, 30), 0.9, 0, std::nullopt};
  const OcrToken b{"b", quad_from_box(20, 15, 70, 50), 0.9, 0, std::nullopt};
  ab.tokens = {a, b};
  ba.tokens = {b, a};
  const auto out = render_overlay(img, ab);
  EXPECT_EQ(out, render_overlay(img, ba));
  EXPECT_EQ(out.at(5, 5, 1), 0);    // corner of a
  EXPECT_EQ(out.at(69, 49, 1), 0);  // corner of b
  PageTranscript only_a;
  only_a.tokens = {a};
  EXPECT_NE(out, render_overlay(img, only_a));
}

TEST(Overlay, RotatedQuad) {
  const Image img(60, 60, 1, 255);
  PageTranscript t;
  t.tokens.push_back({"d", Quad{Point{30, 5}, Point{55, 30}, Point{30, 55}, Point{5, 30}}, 0.9, 0, std::nullopt});
  const auto out = render_overlay(img, t);
  EXPECT_EQ(out.at(30, 30), 255);  // centre untouched
  EXPECT_EQ(out.at(30, 6), 0);     // near the top vertex
  EXPECT_EQ(out.at(2, 2), 255);    // outside
}

// -- prompts -------------------------------------------------------------------

namespace {

PromptTemplates shipped_templates() {
  return PromptTemplates::load(testkit::resources_dir() / "templates", known_field_names());
}

FieldSpec shipped_field(const std::string& name, const std::vector<std::string>& langs = {"en", "id", "zh"}) {
  const auto kw = load_keywords(testkit::resources_dir() / "keywords.json", langs);
  return make_field_specs({name}, kw, langs).front();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

TEST(Prompt, RevenueTemplateCarriesSynonymsAndSchema) {
  const auto req = build_prompt(shipped_field("revenue"), {{7, Image(10, 10), income_page(7)}}, "en",
                                shipped_templates());
  for (const char* w : {"\"revenue\"", "\"sales\"", "\"income\""}) EXPECT_NE(req.prompt.find(w), std::string::npos) << w;
  for (const auto& key : response_schema_keys()) EXPECT_NE(req.prompt.find(key), std::string::npos) << key;
  EXPECT_NE(req.prompt.find("Target field: revenue (money)"), std::string::npos);
  EXPECT_NE(req.prompt.find("--- page 7 ---\nIncome statement IDR'000\nRevenue 4,500"), std::string::npos);
  EXPECT_EQ(req.prompt.find("{{"), std::string::npos);
  EXPECT_EQ(req.response_schema, response_schema_keys());
}

TEST(Prompt, ProfitTemplatePrefersNetProfit) {
  const auto text = lower(shipped_templates().get("profit", "en"));
  EXPECT_NE(text.find("net profit"), std::string::npos);
  EXPECT_NE(text.find("over \"profit before tax\""), std::string::npos);
}

TEST(Prompt, IndonesianTemplatesExplainRupiahMultipliers) {
  const auto t = shipped_templates();
  for (const char* field : {"revenue", "profit", "dividends", "currency"}) {
    const auto text = lower(t.get(field, "id"));
    EXPECT_NE(text.find("ribuan rupiah"), std::string::npos) << field;
    EXPECT_NE(text.find("juta rupiah"), std::string::npos) << field;
  }
  EXPECT_NE(t.get("revenue", "id").find("unit_scale 1000;"), std::string::npos);
}

TEST(Prompt, EveryShippedTemplateLoads) {
  const auto t = shipped_templates();
  for (const auto& f : known_field_names())
    for (const char* lang : {"en", "id", "zh"}) EXPECT_TRUE(t.has(f, lang)) << f << "." << lang;
}

TEST(Prompt, EmptyPagesIsAnInputError) {
  EXPECT_THROW(build_prompt(shipped_field("revenue"), {}, "en", shipped_templates()), InputError);
}

TEST(Prompt, LanguageFallsBackToEnglish) {
  PromptTemplates t;
  t.add("year", "en", "english {{ocr_text}}");
  EXPECT_EQ(t.get("year", "fr"), "english {{ocr_text}}");
  EXPECT_THROW(t.get("profit", "en"), ConfigError);
}

TEST(Templates, LoadRejectsBrokenDirectories) {
  testkit::TempDir dir;
  EXPECT_THROW(PromptTemplates::load(dir / "absent", {"year"}), ConfigError);
  testkit::spit(dir / "year.en.txt", "value unit_scale currency page_no quote {{ocr_text}}");
  EXPECT_NO_THROW(PromptTemplates::load(dir.path(), {"year"}));
  EXPECT_THROW(PromptTemplates::load(dir.path(), {"year", "profit"}), ConfigError);
  testkit::spit(dir / "year.id.txt", "value unit_scale currency page_no quote");
  EXPECT_THROW(PromptTemplates::load(dir.path(), {"year"}), ConfigError);
  testkit::spit(dir / "year.id.txt", "value currency page_no quote {{ocr_text}}");
  EXPECT_THROW(PromptTemplates::load(dir.path(), {"year"}), ConfigError);
}

// -- reply parsing -------------------------------------------------------------

TEST(ReplyParsing, FirstBalancedObject) {
  EXPECT_EQ(extract_json_object("Sure! {\"value\": 1} hope that helps"), "{\"value\": 1}");
  EXPECT_EQ(extract_json_object("```json\n{\"a\": {\"b\": \"}\"}}\n```"), "{\"a\": {\"b\": \"}\"}}");
  EXPECT_FALSE(extract_json_object("no json here").has_value());
  EXPECT_FALSE(extract_json_object("{\"value\": }").has_value());
  EXPECT_FALSE(extract_json_object("{\"value\": 1").has_value());
}

// -- extract_field -------------------------------------------------------------

TEST(ExtractField, ScriptedReplyWithThousandScale) {
  Harness s("revenue", {income_page(3), income_page(7)}, 10, {7});
  ScriptedVlmBackend vlm(std::vector<ScriptedVlmBackend::Rule>
      {{{"Target field: revenue"},
        R"({"value": 4500, "unit_scale": 1000, "currency": "IDR", "page_no": 7, "quote": "4,500"})"}});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value.has_value()) << (r.warnings.empty() ? "" : r.warnings[0]);
  EXPECT_EQ(std::get<ScaledDecimal>(r.value->value), ScaledDecimal(4500000));
  EXPECT_EQ(r.value->currency, "IDR");
  EXPECT_EQ(r.value->unit_scale, 1000);
  ASSERT_EQ(r.value->provenance.size(), 1u);
  EXPECT_EQ(r.value->provenance[0].page_no, 7);
  EXPECT_EQ(r.value->provenance[0].token_indices, std::vector<int>{4});
  EXPECT_EQ(r.value->provenance[0].tokens[0].text, "4,500");
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ExtractField, ScaleAndCurrencyFallBackToThePage) {
  Harness s("revenue", {income_page(2, "Rp'000")}, 4, {2});
  QueueBackend vlm({R"({"value": "4,500", "unit_scale": null, "currency": null, "page_no": 2, "quote": "4,500"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(std::get<ScaledDecimal>(r.value->value), ScaledDecimal(4500000));
  EXPECT_EQ(r.value->currency, "IDR");
}

TEST(ExtractField, ReplyScaleBeatsTheHeader) {
  Harness s("revenue", {income_page(2)}, 4, {2});
  QueueBackend vlm({R"({"value": "4,500", "unit_scale": 1000000, "currency": "SGD", "page_no": 2, "quote": "4,500"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(std::get<ScaledDecimal>(r.value->value), ScaledDecimal(4500000000));
  EXPECT_EQ(r.value->currency, "SGD");
}

TEST(ExtractField, InvalidScaleIsIgnoredWithAWarning) {
  Harness s("revenue", {income_page(2)}, 4, {2});
  QueueBackend vlm({R"({"value": "4,500", "unit_scale": 250, "page_no": 2, "quote": "4,500"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(std::get<ScaledDecimal>(r.value->value), ScaledDecimal(4500000));
  EXPECT_TRUE(has_warning(r.warnings, "ignored unit_scale 250"));
}

TEST(ExtractField, NegativeAmountInParentheses) {
  Harness s("profit", {income_page(5)}, 5, {5});
  QueueBackend vlm({R"j({"value": "(1,200)", "unit_scale": 1000, "currency": "IDR", "page_no": 5, "quote": "(1,200)"})j"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(std::get<ScaledDecimal>(r.value->value), ScaledDecimal(-1200000));
}

TEST(ExtractField, RepairPromptRecoversAnUnparseableReply) {
  Harness s("year", {page(1, {tok("Annual", 0, 0, 0), tok("report", 70, 0, 0), tok("2023", 140, 0, 0)})}, 1, {1});
  QueueBackend vlm({"I think it is twenty twenty-three", R"({"value": 2023, "page_no": 1, "quote": "2023"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(std::get<std::int64_t>(r.value->value), 2023);
  ASSERT_EQ(vlm.prompts.size(), 2u);
  EXPECT_EQ(vlm.prompts[1], vlm.prompts[0] + repair_instruction());
  EXPECT_TRUE(has_warning(r.warnings, "unparseable reply, retrying"));
}

TEST(ExtractField, TwoUnparseableRepliesAreNotFound) {
  Harness s("year", {income_page(1)}, 1, {1});
  QueueBackend vlm({"nope", "still nope"});
  const auto r = extract_field(vlm, s.req, s.opts);
  EXPECT_FALSE(r.value);
  EXPECT_TRUE(has_warning(r.warnings, "not found"));
  EXPECT_EQ(vlm.prompts.size(), 2u);
}

TEST(ExtractField, NullValueIsNotFound) {
  Harness s("dividends", {income_page(1)}, 1, {1});
  QueueBackend vlm({R"({"value": null})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  EXPECT_FALSE(r.value);
  EXPECT_TRUE(has_warning(r.warnings, "model reported no value"));
}

TEST(ExtractField, PageOutsideTheRetainedSetIsFlagged) {
  Harness s("revenue", {income_page(3), income_page(4)}, 9, {3});
  QueueBackend vlm({R"({"value": "4,500", "unit_scale": 1000, "currency": "IDR", "page_no": 4, "quote": "4,500"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(r.value->provenance[0].page_no, 4);
  EXPECT_FALSE(r.value->provenance[0].token_indices.empty());
  EXPECT_TRUE(has_warning(r.warnings, "outside the retained pages"));
}

TEST(ExtractField, NonexistentPageFallsBackToSearchingTheQuote) {
  Harness s("revenue", {income_page(3)}, 5, {3});
  QueueBackend vlm({R"({"value": "4,500", "unit_scale": 1000, "currency": "IDR", "page_no": 40, "quote": "4,500"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_TRUE(has_warning(r.warnings, "cited page 40 does not exist"));
  EXPECT_EQ(r.value->provenance[0].page_no, 3);
}

TEST(ExtractField, MissingQuoteIsFlagged) {
  Harness s("revenue", {income_page(3)}, 5, {3});
  QueueBackend vlm({R"({"value": "9,999", "unit_scale": 1000, "currency": "IDR", "page_no": 3, "quote": "9,999"})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  ASSERT_TRUE(r.value);
  EXPECT_TRUE(has_warning(r.warnings, "quote not found on page 3"));
}

TEST(ExtractField, UnreadableValueIsNotFound) {
  Harness s("revenue", {income_page(3)}, 5, {3});
  QueueBackend vlm({R"({"value": "about a lot", "page_no": 3})"});
  const auto r = extract_field(vlm, s.req, s.opts);
  EXPECT_FALSE(r.value);
  EXPECT_TRUE(has_warning(r.warnings, "not found"));
}

TEST(ExtractField, BackendOutageIsNotFoundAfterRetries) {
  Harness s("revenue", {income_page(3)}, 5, {3});
  DownBackend vlm;
  s.opts.retry = RetryPolicy{3, 0.0, 0.0};
  const auto r = extract_field(vlm, s.req, s.opts);
  EXPECT_FALSE(r.value);
  EXPECT_EQ(vlm.calls, 3);
  EXPECT_TRUE(has_warning(r.warnings, "backend unavailable"));
}

TEST(ExtractField, ModelConfidenceIsKeptWhenInRange) {
  Harness s("year", {income_page(1)}, 1, {1});
  QueueBackend vlm({R"({"value": "2023", "confidence": 0.8})", R"({"value": "2023", "confidence": 3})"});
  EXPECT_EQ(extract_field(vlm, s.req, s.opts).value->model_confidence, 0.8);
  EXPECT_FALSE(extract_field(vlm, s.req, s.opts).value->model_confidence.has_value());
}

// -- summary -------------------------------------------------------------------

TEST(Summary, PassthroughWithPages) {
  Harness s("background_summary", {income_page(2), income_page(5)}, 6, {5, 2});
  QueueBackend vlm({R"({"value": "The group makes paper in Java."})"});
  const auto r = summarize_background(vlm, s.req, s.opts);
  ASSERT_TRUE(r.summary);
  EXPECT_EQ(r.summary->text, "The group makes paper in Java.");
  EXPECT_EQ(r.summary->pages, (std::vector<int>{2, 5}));
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(vlm.images.back(), 2u);
}

TEST(Summary, NothingRetainedIsNotFound) {
  QueueBackend vlm({});
  const auto r = summarize_background(vlm, std::nullopt, {});
  EXPECT_FALSE(r.summary);
  EXPECT_TRUE(has_warning(r.warnings, "not found"));
  EXPECT_TRUE(vlm.prompts.empty());
}

TEST(Summary, LongRepliesAreCutAtTheCharacterLimit) {
  Harness s("background_summary", {income_page(1)}, 1, {1});
  std::string text;
  for (int i = 0; i < 1500; ++i) text += i % 2 ? "a" : "集";
  QueueBackend vlm({"{\"value\": \"" + text + "\"}"});
  const auto r = summarize_background(vlm, s.req, s.opts);
  ASSERT_TRUE(r.summary);
  EXPECT_EQ(utf8::decode(r.summary->text).size(), 1200u);
  const auto cps = utf8::decode(text);
  EXPECT_EQ(r.summary->text, utf8::encode({cps.begin(), cps.begin() + 1200}));
  EXPECT_TRUE(has_warning(r.warnings, "truncated from 1500 to 1200"));
}

// -- merge ---------------------------------------------------------------------

namespace {

FieldResult found(const std::string& f) {
  FieldResult r;
  r.field = f;
  r.value = FieldValue{f, "1", ScaledDecimal(1), 1, std::nullopt, {}, std::nullopt};
  return r;
}

}  // namespace

TEST(Merge, CompleteOutputHasNoWarnings) {
  std::vector<FieldResult> rs;
  for (const auto& f : known_field_names()) rs.push_back(found(f));
  std::reverse(rs.begin(), rs.end());
  const auto out = merge_results("d", known_field_names(), rs, BackgroundSummary{"text", {1}});
  ASSERT_EQ(out.fields.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(out.fields[i].field, known_field_names()[i]);
  EXPECT_TRUE(out.warnings.empty());
  EXPECT_EQ(out.background_summary->text, "text");
}

TEST(Merge, NotFoundFieldIsExplicit) {
  std::vector<FieldResult> rs = {found("year"), FieldResult{"revenue", std::nullopt, {"not found: model reported no value"}}};
  const auto out = merge_results("d", {"year", "revenue"}, rs);
  ASSERT_NE(out.find("revenue"), nullptr);
  EXPECT_FALSE(out.find("revenue")->value.has_value());
  EXPECT_EQ(out.warnings, std::vector<std::string>{"revenue: not found: model reported no value"});
}

TEST(Merge, WarningsKeepTheirFieldAndOrder) {
  std::vector<FieldResult> rs = {FieldResult{"profit", std::nullopt, {"p1", "p2"}}, found("year"),
                                 FieldResult{"currency", std::nullopt, {"c1"}}};
  rs[1].warnings = {"y1"};
  const auto out = merge_results("d", {"year", "profit", "currency"}, rs);
  EXPECT_EQ(out.warnings, (std::vector<std::string>{"year: y1", "profit: p1", "profit: p2", "currency: c1"}));
  EXPECT_EQ(out.find("profit")->warnings, (std::vector<std::string>{"p1", "p2"}));
}

TEST(Merge, BookkeepingErrorsAreInternal) {
  EXPECT_THROW(merge_results("d", {"year"}, {found("year"), found("year")}), InternalError);
  EXPECT_THROW(merge_results("d", {"year", "profit"}, {found("year")}), InternalError);
  EXPECT_THROW(merge_results("d", {"year"}, {found("year"), found("profit")}), InternalError);
}

TEST(Merge, SummaryFieldResult) {
  SummaryResult s;
  s.summary = BackgroundSummary{"abc", {2, 4}};
  const auto r = summary_field_result(s);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(std::get<std::string>(r.value->value), "abc");
  EXPECT_EQ(r.value->provenance.size(), 2u);
  EXPECT_FALSE(summary_field_result(SummaryResult{std::nullopt, {"not found"}}).value);
}
