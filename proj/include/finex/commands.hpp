#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "finex/eval.hpp"
#include "finex/pipeline.hpp"

namespace finex {

/// Runs the pipeline over a manifest; returns the process exit code
/// (nonzero iff a document failed).
int cmd_process(const std::filesystem::path& manifest, const std::filesystem::path& config,
                const ProcessOptions& opts, std::ostream& out);

/// Scores a results file against gold; prints the table and optionally
/// writes the JSON report. Throws InputError on an empty results file.
EvalReport cmd_eval(const std::filesystem::path& pred, const std::filesystem::path& gold,
                    std::ostream& out, const std::optional<std::filesystem::path>& report_json = {});

/// Runs the pipeline (overwriting `results`), then computes the metrics
/// from the timing log it wrote.
BenchMetrics cmd_bench(const std::filesystem::path& manifest, const std::filesystem::path& config,
                       int device_count, const std::filesystem::path& results, std::ostream& out);

struct InspectOptions {
  /// write the page region around the provenance boxes here
  std::optional<std::filesystem::path> overlay_png;
  /// needed to re-create the preprocessed page for the overlay
  std::optional<std::filesystem::path> config;
};

/// Prints a field's value, provenance tokens and warnings. Throws
/// LookupError for an unknown document or field.
void cmd_inspect(const std::filesystem::path& results, const std::string& doc_id,
                 const std::string& field, std::ostream& out, const InspectOptions& opts = {});

}  // namespace finex
