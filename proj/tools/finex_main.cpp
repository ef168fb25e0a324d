// finex: batch extraction of financial fields from scanned annual reports.

#include <iostream>
#include <string>
#include <unistd.h>

#include "CLI11.hpp"
#include "finex/commands.hpp"
#include "finex/config.hpp"
#include "finex/corpus.hpp"
#include "finex/error.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"finex: multi-stage extraction of financial fields from scanned reports"};
  app.require_subcommand(1);

  // process
  fs::path manifest, config, out;
  std::string dump_preprocess;
  bool dump_retrieval = false, overwrite = false;
  auto* process = app.add_subcommand("process", "run the pipeline over a manifest");
  process->add_option("--manifest", manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
  process->add_option("--config", config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  process->add_option("--out", out, "results file (JSON lines)")->required();
  process->add_option("--dump-preprocess", dump_preprocess, "write before/after pages and reports here");
  process->add_flag("--dump-retrieval", dump_retrieval, "write ranked pages per field next to the results");
  process->add_flag("--overwrite", overwrite, "replace an existing results file");

  // eval
  fs::path pred, gold, report;
  auto* eval = app.add_subcommand("eval", "score a results file against gold values");
  eval->add_option("--pred", pred, "results file")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", gold, "gold JSON lines")->required()->check(CLI::ExistingFile);
  eval->add_option("--report", report, "also write the report as JSON");

  // bench
  int devices = 1;
  fs::path bench_out;
  auto* bench = app.add_subcommand("bench", "run the pipeline and report throughput and latency");
  bench->add_option("--manifest", manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
  bench->add_option("--config", config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  bench->add_option("--devices", devices, "accelerators serving the run")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "results file (default: a temporary file)");

  // inspect
  fs::path results, overlay;
  std::string doc_id, field;
  auto* inspect = app.add_subcommand("inspect", "show a field's value and the tokens behind it");
  inspect->add_option("--results", results, "results file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--doc", doc_id, "document id")->required();
  inspect->add_option("--field", field, "field name")->required();
  inspect->add_option("--overlay", overlay, "write a PNG crop with the provenance boxes");
  inspect->add_option("--config", config, "pipeline config, needed for --overlay");

  // synth
  fs::path synth_dir;
  finex::synthetic::CorpusOptions copts;
  copts.resources = fs::path(FINEX_SOURCE_DIR) / "config";
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with gold values and stub backends");
  synth->add_option("--out", synth_dir, "output directory")->required();
  synth->add_option("--docs", copts.documents, "number of documents")->check(CLI::PositiveNumber);
  synth->add_option("--min-pages", copts.min_pages, "fewest pages per document");
  synth->add_option("--max-pages", copts.max_pages, "most pages per document");
  synth->add_option("--seed", copts.seed, "random seed");
  synth->add_option("--max-skew", copts.max_skew_deg, "largest fine skew in degrees");
  synth->add_option("--resources", copts.resources, "directory with keywords.json and templates/");

  auto* defaults = app.add_subcommand("default-config", "print the built-in defaults as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*process) {
      finex::ProcessOptions opts;
      opts.out = out;
      if (!dump_preprocess.empty()) opts.dump_preprocess = fs::path(dump_preprocess);
      opts.dump_retrieval = dump_retrieval;
      opts.overwrite = overwrite;
      return finex::cmd_process(manifest, config, opts, std::cout);
    }
    if (*eval) {
      std::optional<fs::path> report_path;
      if (!report.empty()) report_path = report;
      finex::cmd_eval(pred, gold, std::cout, report_path);
      return 0;
    }
    if (*bench) {
      if (bench_out.empty()) {
        bench_out = fs::temp_directory_path() / ("finex-bench-" + std::to_string(::getpid()) + ".jsonl");
      }
      finex::cmd_bench(manifest, config, devices, bench_out, std::cout);
      return 0;
    }
    if (*inspect) {
      finex::InspectOptions opts;
      if (!overlay.empty()) opts.overlay_png = overlay;
      if (!config.empty()) opts.config = config;
      finex::cmd_inspect(results, doc_id, field, std::cout, opts);
      return 0;
    }
    if (*synth) {
      const auto files = finex::synthetic::write_corpus(synth_dir, copts);
      std::cout << "wrote " << files.documents.size() << " documents to " << synth_dir.string() << "\n"
                << "manifest: " << files.manifest.string() << "\n"
                << "gold:     " << files.gold.string() << "\n"
                << "config:   " << files.config.string() << "\n";
      return 0;
    }
    if (*defaults) {
      std::cout << finex::default_config_json() << "\n";
      return 0;
    }
  } catch (const finex::Error& e) {
    std::cerr << "finex: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "finex: unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
