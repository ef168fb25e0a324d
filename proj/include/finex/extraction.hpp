#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finex/document.hpp"
#include "finex/http.hpp"
#include "finex/image.hpp"
#include "finex/ocr.hpp"
#include "finex/vlm.hpp"

namespace finex {

inline constexpr std::uint8_t kHighlightRgb[3] = {255, 0, 0};

/// Copy of `page` with the outline of every token at or above
/// min_confidence drawn as a 2-px stroke on the inside of its box (pure red
/// on RGB pages, black on gray ones).
Image render_overlay(const Image& page, const PageTranscript& transcript,
                     double min_confidence = 0.5);

/// Keys every reply object must use.
const std::vector<std::string>& response_schema_keys();

/// Prompt templates stored as <dir>/<field>.<lang>.txt. Placeholders:
/// {{field}}, {{keywords}}, {{value_kind}}, {{language}}, {{pages}},
/// {{ocr_text}}.
class PromptTemplates {
 public:
  PromptTemplates() = default;

  /// Loads every template in `dir`. Throws ConfigError when a field lacks
  /// an English template or a template misses {{ocr_text}} or a schema key.
  static PromptTemplates load(const std::filesystem::path& dir,
                              const std::vector<std::string>& fields);

  void add(const std::string& field, const std::string& language, std::string text);
  /// Template for (field, language), falling back to English.
  const std::string& get(const std::string& field, const std::string& language) const;
  bool has(const std::string& field, const std::string& language) const;

 private:
  std::map<std::pair<std::string, std::string>, std::string> templates_;
};

struct ExtractionPage {
  int page_no = 0;
  Image image;  // annotated
  PageTranscript transcript;
};

struct ExtractionRequest {
  std::string field;
  ValueKind kind = ValueKind::text;
  std::string prompt;
  /// in retrieval rank order
  std::vector<ExtractionPage> pages;
  std::vector<std::string> response_schema;
  int max_tokens = 512;
};

/// Fills the field's template with its keywords, value kind and the OCR
/// text of `pages`. Throws InputError when pages is empty.
ExtractionRequest build_prompt(const FieldSpec& field, std::vector<ExtractionPage> pages,
                               const std::string& language, const PromptTemplates& templates);

/// Appended to the prompt when the first reply could not be parsed.
const std::string& repair_instruction();

/// First balanced {...} block of a reply, parsed; nullopt when there is
/// none or it is not valid JSON.
std::optional<std::string> extract_json_object(const std::string& reply);

struct ExtractOptions {
  RetryPolicy retry;
  int n_pages = 0;
  /// pages retrieval kept for this field (cited pages outside are flagged)
  std::vector<int> retained;
  /// every page of the document, looked up by page_no for provenance
  std::span<const PageTranscript> all_pages;
  std::size_t summary_max_chars = 1200;
};

struct FieldResult {
  std::string field;
  std::optional<FieldValue> value;  // nullopt = not found
  std::vector<std::string> warnings;
};

/// Asks the model, parses and normalizes the reply and attaches provenance.
/// Backend failures and unusable replies end as not-found with warnings.
FieldResult extract_field(VlmBackend& backend, const ExtractionRequest& request,
                          const ExtractOptions& opts);

struct BackgroundSummary {
  std::string text;
  std::vector<int> pages;
};

struct SummaryResult {
  std::optional<BackgroundSummary> summary;
  std::vector<std::string> warnings;
};

/// Free-text summary capped at opts.summary_max_chars code points. A
/// missing request (nothing retained) is not-found.
SummaryResult summarize_background(VlmBackend& backend,
                                   const std::optional<ExtractionRequest>& request,
                                   const ExtractOptions& opts);

struct StructuredOutput {
  std::string doc_id;
  bool failed = false;
  std::optional<std::string> error;
  std::vector<FieldResult> fields;  // configured order
  std::optional<BackgroundSummary> background_summary;
  std::vector<std::string> warnings;
  std::optional<std::string> language;
  std::vector<std::string> sources;
  int n_pages = 0;
  std::vector<int> retained_pages;
  double reduction_ratio = 0.0;
  std::string timestamp;
  std::string pipeline_version;

  const FieldResult* find(const std::string& field) const;
};

/// Joins per-field results in configured order and gathers their warnings.
/// Throws InternalError on a duplicate or missing field.
StructuredOutput merge_results(const std::string& doc_id,
                               const std::vector<std::string>& field_order,
                               std::vector<FieldResult> results,
                               std::optional<BackgroundSummary> summary = std::nullopt);

/// FieldResult for background_summary built from a SummaryResult.
FieldResult summary_field_result(const SummaryResult& s);

}  // namespace finex
