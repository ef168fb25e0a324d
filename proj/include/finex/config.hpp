#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "finex/http.hpp"
#include "finex/preprocess.hpp"
#include "finex/retrieval.hpp"

namespace finex {

inline constexpr const char* kPipelineVersion = "finex/1.0.0";

struct OcrSettings {
  std::string backend = "http";  // "http" | "synthetic"
  HttpEndpoint endpoint{"http://127.0.0.1:8080", 4, 60.0};
  /// synthetic backend corpus spec
  std::filesystem::path corpus;
  std::vector<std::string> languages = {"en", "zh", "id"};
};

struct VlmSettings {
  std::string backend = "http";  // "http" | "scripted"
  HttpEndpoint endpoint{"http://127.0.0.1:8081", 2, 120.0};
  /// scripted backend rule file
  std::filesystem::path script;
  int max_tokens = 512;
};

struct PipelineConfig {
  std::vector<std::string> fields = {"year", "revenue", "profit", "dividends", "currency",
                                     "background_summary"};
  std::filesystem::path keywords_path;
  std::filesystem::path templates_dir;
  OcrSettings ocr;
  VlmSettings vlm;
  RetryPolicy retry;
  PreprocessConfig preprocess;
  Bm25Params bm25;
  int top_k = 3;
  /// token filter before indexing
  double retrieval_min_confidence = 0.5;
  /// token filter for the OCR text shown to the model
  double extraction_min_confidence = 0.0;
  double overlay_min_confidence = 0.5;
  std::size_t summary_max_chars = 1200;
  int workers = 2;
  std::filesystem::path timing_log;  // empty: <results>.timing.csv
  /// fixed result timestamp for reproducible runs; empty = wall clock
  std::string timestamp;
};

/// Reads a JSON config. Relative paths resolve against the config file's
/// directory; unknown keys, out-of-range values and missing files are
/// ConfigErrors. OCR_ENDPOINT / VLM_ENDPOINT override the endpoint URLs.
PipelineConfig load_config(const std::filesystem::path& path);

/// Same checks as load_config, for configs built in code.
void validate_config(const PipelineConfig& cfg);

/// The defaults as a JSON document.
std::string default_config_json();

}  // namespace finex
