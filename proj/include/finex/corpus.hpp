#pragma once

// Synthetic annual reports with planted field pages, their gold values and
// matching scripted model replies. Used by the `synth` command, the tests
// and the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "finex/eval.hpp"
#include "finex/synthetic.hpp"
#include "finex/vlm.hpp"

namespace finex::synthetic {

struct PlannedDocument {
  std::string doc_id;
  std::string language;       // "en" | "id" | "zh"
  std::string language_hint;  // e.g. "id-ID"
  /// unique per document; printed on every page so scripted rules can key on it
  std::string marker;
  std::vector<PageSpec> pages;  // page_id left 0 until rendering
  /// field -> 1-based page holding its value; fields the report lacks are absent
  std::map<std::string, int> field_pages;
  GroundTruth gold;
  std::vector<ScriptedVlmBackend::Rule> rules;
};

/// Plans one report. The planted pages sit at random positions among
/// keyword-free filler pages; n_pages must be >= 5.
PlannedDocument plan_document(int index, const std::string& language, int n_pages, Rng& rng);

/// Transcripts straight from the planned text, skipping rendering and OCR.
std::vector<PageTranscript> plain_transcripts(const PlannedDocument& doc);

struct CorpusOptions {
  int documents = 10;
  int min_pages = 5;
  int max_pages = 7;
  std::uint64_t seed = 7;
  /// fine skew drawn from [-max_skew_deg, max_skew_deg]
  double max_skew_deg = 5.0;
  /// probability that a page is also turned by 90, 180 or 270 degrees
  double coarse_probability = 0.25;
  std::vector<std::string> languages = {"en", "id", "zh"};
  int noise = 6;
  int workers = 2;
  /// directory holding keywords.json and templates/
  std::filesystem::path resources;
};

struct CorpusFiles {
  std::filesystem::path manifest;
  std::filesystem::path gold;
  std::filesystem::path ocr_corpus;
  std::filesystem::path vlm_script;
  std::filesystem::path config;
  std::vector<PlannedDocument> documents;
};

/// Renders, degrades and writes a corpus under `dir`: page images in
/// docs/<doc_id>/, manifest.jsonl, gold.jsonl, ocr_corpus.json,
/// vlm_script.json and a config.json wired to the stub backends.
CorpusFiles write_corpus(const std::filesystem::path& dir, const CorpusOptions& opts);

}  // namespace finex::synthetic
