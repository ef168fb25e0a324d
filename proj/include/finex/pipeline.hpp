#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finex/config.hpp"
#include "finex/eval.hpp"
#include "finex/extraction.hpp"
#include "finex/ingest.hpp"
#include "finex/ocr.hpp"
#include "finex/retrieval.hpp"
#include "finex/vlm.hpp"

namespace finex {

std::unique_ptr<OcrBackend> make_ocr_backend(const PipelineConfig& cfg);
std::unique_ptr<VlmBackend> make_vlm_backend(const PipelineConfig& cfg);

/// Everything a run needs besides the backends, loaded once up front.
struct PipelineResources {
  PipelineConfig cfg;
  std::vector<FieldSpec> fields;
  PromptTemplates templates;
};

/// Loads keywords and templates; throws ConfigError on any problem.
PipelineResources load_resources(const PipelineConfig& cfg);

std::string preprocess_report_json(const PreprocessReport& report);

struct DocumentRun {
  StructuredOutput output;
  std::vector<TimingRow> timings;
  std::vector<RetrievalResult> retrieval;
};

/// Preprocess, transcribe, index, retrieve, extract and merge one document.
/// Throws on stage failures; run_process turns those into failed rows.
DocumentRun process_document(const Document& doc, const PipelineResources& res, OcrBackend& ocr,
                             VlmBackend& vlm,
                             const std::optional<std::filesystem::path>& dump_preprocess = {});

struct ProcessOptions {
  std::filesystem::path out;
  std::optional<std::filesystem::path> dump_preprocess;
  bool dump_retrieval = false;
  bool overwrite = false;
};

struct RunSummary {
  int succeeded = 0;
  int failed = 0;
  double wall_clock_s = 0.0;
  std::filesystem::path results;
  std::filesystem::path timing_log;
  std::optional<std::filesystem::path> retrieval_dump;
  std::vector<TimingRow> timings;
};

/// "<dir>/<stem>.<suffix>" next to the results file.
std::filesystem::path sibling_path(const std::filesystem::path& results, const std::string& suffix);

/// Runs every manifest entry on cfg.workers threads. Rows are written in
/// doc_id order through a single writer; a failing document becomes a
/// "failed" row and the run carries on. Throws InputError when the output
/// exists and overwrite is off.
RunSummary run_process(const std::vector<ManifestEntry>& manifest, const PipelineResources& res,
                       OcrBackend& ocr, VlmBackend& vlm, const ProcessOptions& opts);

}  // namespace finex
