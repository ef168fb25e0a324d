#include <gtest/gtest.h>

#include <sstream>

#include "finex/commands.hpp"
#include "finex/corpus.hpp"
#include "finex/error.hpp"
#include "finex/results_io.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace finex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// One small rendered corpus shared by the suite; rendering dominates its cost.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testkit::TempDir;
    synthetic::CorpusOptions o;
    o.documents = 3;
    o.seed = 11;
    o.resources = testkit::resources_dir();
    files_ = new synthetic::CorpusFiles(synthetic::write_corpus(dir_->path(), o));
  }
  static void TearDownTestSuite() {
    delete files_;
    delete dir_;
  }

  static fs::path config_with_workers(int workers) {
    auto j = json::parse(testkit::slurp(files_->config));
    j["workers"] = workers;
    const auto p = dir_->path() / ("config-w" + std::to_string(workers) + ".json");
    testkit::spit(p, j.dump(2));
    return p;
  }

  static std::string run(const fs::path& config, const std::string& name, int* code = nullptr) {
    ProcessOptions opts;
    opts.out = dir_->path() / name;
    opts.overwrite = true;
    std::ostringstream log;
    const int rc = cmd_process(files_->manifest, config, opts, log);
    if (code) *code = rc;
    return testkit::slurp(opts.out);
  }

  static testkit::TempDir* dir_;
  static synthetic::CorpusFiles* files_;
};

testkit::TempDir* Pipeline::dir_ = nullptr;
synthetic::CorpusFiles* Pipeline::files_ = nullptr;

}  // namespace

TEST_F(Pipeline, ExtractsEveryGoldValue) {
  int rc = -1;
  run(files_->config, "all.jsonl", &rc);
  EXPECT_EQ(rc, 0);
  std::ostringstream table;
  const auto report = cmd_eval(dir_->path() / "all.jsonl", files_->gold, table);
  EXPECT_DOUBLE_EQ(report.micro_accuracy, 1.0) << table.str();
}

TEST_F(Pipeline, OutputIsIndependentOfWorkerCount) {
  const auto one = run(config_with_workers(1), "w1.jsonl");
  const auto eight = run(config_with_workers(8), "w8.jsonl");
  const auto again = run(config_with_workers(1), "w1b.jsonl");
  EXPECT_EQ(one, eight);
  EXPECT_EQ(one, again);
  // one row per document, in doc_id order
  const auto rows = read_results(dir_->path() / "w1.jsonl");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LT(rows[0].doc_id, rows[1].doc_id);
  EXPECT_LT(rows[1].doc_id, rows[2].doc_id);
  for (const auto& r : rows) {
    EXPECT_EQ(r.timestamp, "2024-01-01T00:00:00Z");
    EXPECT_GT(r.reduction_ratio, 0.0);
  }
}

TEST_F(Pipeline, TimingLogCoversEveryStage) {
  run(files_->config, "timed.jsonl");
  const auto rows = read_timing_log(sibling_path(dir_->path() / "timed.jsonl", "timing.csv"));
  std::map<std::string, int> stages;
  for (const auto& r : rows) ++stages[r.stage];
  for (const char* s : {"preprocess", "ocr", "retrieval", "extraction"}) EXPECT_EQ(stages[s], 3) << s;
  EXPECT_EQ(stages[kWallClockStage], 1);
}

TEST_F(Pipeline, BrokenSourceFailsOnlyItsDocument) {
  auto entries = read_manifest(files_->manifest);
  entries.push_back({"zz-missing", {dir_->path() / "docs" / "does-not-exist.png"}, std::nullopt});
  const auto manifest = dir_->path() / "with-missing.jsonl";
  write_manifest(manifest, entries);
  ProcessOptions opts;
  opts.out = dir_->path() / "partial.jsonl";
  opts.overwrite = true;
  std::ostringstream log;
  EXPECT_NE(cmd_process(manifest, files_->config, opts, log), 0);
  const auto rows = read_results(opts.out);
  ASSERT_EQ(rows.size(), 4u);
  int failed = 0;
  for (const auto& r : rows) {
    if (r.failed) {
      ++failed;
      EXPECT_EQ(r.doc_id, "zz-missing");
      ASSERT_TRUE(r.error.has_value());
      EXPECT_NE(r.error->find("does-not-exist.png"), std::string::npos);
    }
  }
  EXPECT_EQ(failed, 1);
  std::ostringstream table;
  EXPECT_DOUBLE_EQ(cmd_eval(opts.out, files_->gold, table).micro_accuracy, 1.0);
}

TEST_F(Pipeline, RefusesToOverwriteResults) {
  const auto out = dir_->path() / "keep.jsonl";
  testkit::spit(out, "precious\n");
  ProcessOptions opts;
  opts.out = out;
  std::ostringstream log;
  EXPECT_THROW(cmd_process(files_->manifest, files_->config, opts, log), InputError);
  EXPECT_EQ(testkit::slurp(out), "precious\n");
}

TEST_F(Pipeline, EvalOfAnEmptyResultsFile) {
  testkit::spit(dir_->path() / "empty.jsonl", "");
  std::ostringstream table;
  EXPECT_THROW(cmd_eval(dir_->path() / "empty.jsonl", files_->gold, table), InputError);
}

TEST_F(Pipeline, EvalReportFile) {
  run(files_->config, "for-report.jsonl");
  std::ostringstream table;
  const auto report_path = dir_->path() / "report.json";
  cmd_eval(dir_->path() / "for-report.jsonl", files_->gold, table, report_path);
  const auto j = json::parse(testkit::slurp(report_path));
  EXPECT_EQ(j.at("micro_accuracy"), 1.0);
  EXPECT_NE(table.str().find("micro"), std::string::npos);
}

TEST_F(Pipeline, InspectShowsProvenance) {
  run(files_->config, "inspect.jsonl");
  const auto& doc = files_->documents.front();
  std::ostringstream out;
  cmd_inspect(dir_->path() / "inspect.jsonl", doc.doc_id, "revenue", out);
  const auto text = out.str();
  EXPECT_NE(text.find("page " + std::to_string(doc.field_pages.at("revenue"))), std::string::npos) << text;
  EXPECT_NE(text.find("token "), std::string::npos) << text;
  EXPECT_NE(text.find("confidence"), std::string::npos) << text;
  EXPECT_THROW(cmd_inspect(dir_->path() / "inspect.jsonl", "nobody", "revenue", out), LookupError);
  EXPECT_THROW(cmd_inspect(dir_->path() / "inspect.jsonl", doc.doc_id, "ebitda", out), LookupError);
}

TEST_F(Pipeline, InspectWritesAnOverlay) {
  run(files_->config, "overlay.jsonl");
  InspectOptions opts;
  opts.overlay_png = dir_->path() / "overlay.png";
  opts.config = files_->config;
  std::ostringstream out;
  cmd_inspect(dir_->path() / "overlay.jsonl", files_->documents.front().doc_id, "revenue", out, opts);
  EXPECT_TRUE(fs::exists(*opts.overlay_png));
  EXPECT_GT(fs::file_size(*opts.overlay_png), 100u);
}

TEST_F(Pipeline, InspectOfANotFoundField) {
  run(files_->config, "nf.jsonl");
  for (const auto& d : files_->documents) {
    if (d.field_pages.contains("dividends")) continue;
    std::ostringstream out;
    cmd_inspect(dir_->path() / "nf.jsonl", d.doc_id, "dividends", out);
    EXPECT_NE(out.str().find("not found"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("warning"), std::string::npos) << out.str();
    return;
  }
  GTEST_SKIP() << "every document in this corpus reports dividends";
}

TEST_F(Pipeline, BenchReportsMetrics) {
  std::ostringstream out;
  const auto m = cmd_bench(files_->manifest, files_->config, 2, dir_->path() / "bench.jsonl", out);
  EXPECT_EQ(m.total_docs, 3);
  EXPECT_GT(m.docs_per_hour_per_device, 0.0);
  EXPECT_GT(m.latency_s_per_page, 0.0);
  EXPECT_THROW(cmd_bench(files_->manifest, files_->config, 0, dir_->path() / "b0.jsonl", out), InputError);
}

TEST_F(Pipeline, DumpsPreprocessingAndRetrieval) {
  ProcessOptions opts;
  opts.out = dir_->path() / "dump.jsonl";
  opts.overwrite = true;
  opts.dump_preprocess = dir_->path() / "pre";
  opts.dump_retrieval = true;
  std::ostringstream log;
  cmd_process(files_->manifest, files_->config, opts, log);
  EXPECT_FALSE(fs::is_empty(*opts.dump_preprocess));
  EXPECT_TRUE(fs::exists(sibling_path(opts.out, "retrieval.jsonl"))) << log.str();
}
