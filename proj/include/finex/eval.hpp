#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finex/document.hpp"
#include "finex/extraction.hpp"

namespace finex {

struct ExpectedValue {
  NormalizedValue value;
  std::optional<std::string> currency;
};

/// Gold values for the five scalar fields; nullopt means the document does
/// not report that field.
struct GroundTruth {
  std::string doc_id;
  std::map<std::string, std::optional<ExpectedValue>> fields;
};

/// Gold JSON lines: {"doc_id", "year": int|null, "revenue": {"amount",
/// "currency"}|null, "profit": ..., "dividends": ..., "currency": str|null}.
std::vector<GroundTruth> read_gold(const std::filesystem::path& path);
GroundTruth gold_from_json_line(const std::string& line);
std::string gold_to_json_line(const GroundTruth& gold);

inline constexpr double kMoneyRelTolerance = 1e-6;

struct Verdict {
  std::string field;
  bool match = false;
  std::string detail;
};

/// Compares a prediction (nullopt = not found) with the gold value
/// (nullopt = gold reports no value).
Verdict field_match(const std::optional<FieldValue>& pred, const std::optional<ExpectedValue>& gold,
                    const std::string& field);

struct DocEval {
  int matched = 0;
  int total = 0;
  std::vector<Verdict> verdicts;
  bool prediction_missing = false;
};

struct EvalReport {
  std::map<std::string, DocEval> per_doc;
  double micro_accuracy = 0.0;
  double macro_accuracy = 0.0;
  int not_found_count = 0;
  /// predictions whose doc_id has no gold row
  std::vector<std::string> unmatched_predictions;
};

/// Scores every gold document over the scalar fields. Documents without a
/// prediction, or whose run failed, count every field as a mismatch.
/// Throws InputError on duplicate doc ids or an empty gold set.
EvalReport accuracy(const std::vector<StructuredOutput>& preds,
                    const std::vector<GroundTruth>& golds);

std::string eval_report_json(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);

/// One row of the timing log.
struct TimingRow {
  std::string doc_id;
  std::string stage;
  double seconds = 0.0;
  int pages = 0;
};

inline constexpr const char* kRunRowId = "__run__";
inline constexpr const char* kWallClockStage = "wall_clock";

/// CSV with header doc_id,stage,seconds,pages; seconds printed so they
/// read back to the same double.
void write_timing_log(const std::filesystem::path& path, const std::vector<TimingRow>& rows);
std::vector<TimingRow> read_timing_log(const std::filesystem::path& path);

struct BenchMetrics {
  double docs_per_hour_per_device = 0.0;
  double latency_s_per_page = 0.0;
  double mean_reduction_ratio = 0.0;
  double wall_clock_s = 0.0;
  long long total_pages = 0;
  int total_docs = 0;
  int device_count = 1;
  /// stage -> summed seconds over documents
  std::map<std::string, double> stage_seconds;
};

/// Metrics from a timing log. Per-document latency is the sum of its stage
/// rows; pages come from the "preprocess" row and retained pages from the
/// "retrieval" row. Throws InputError on zero documents or device_count < 1.
BenchMetrics bench(const std::vector<TimingRow>& rows, int device_count);

std::string bench_json(const BenchMetrics& m);
std::string bench_table(const BenchMetrics& m);

}  // namespace finex
