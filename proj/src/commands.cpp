#include "finex/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "finex/codec.hpp"
#include "finex/error.hpp"
#include "finex/normalize.hpp"
#include "finex/results_io.hpp"

namespace finex {

int cmd_process(const std::filesystem::path& manifest, const std::filesystem::path& config,
                const ProcessOptions& opts, std::ostream& out) {
  const PipelineResources res = load_resources(load_config(config));
  const auto entries = read_manifest(manifest);
  auto ocr = make_ocr_backend(res.cfg);
  auto vlm = make_vlm_backend(res.cfg);
  const RunSummary s = run_process(entries, res, *ocr, *vlm, opts);
  out << "processed " << (s.succeeded + s.failed) << " documents (" << s.failed << " failed) in "
      << std::fixed << std::setprecision(2) << s.wall_clock_s << " s\n"
      << "results:    " << s.results.string() << "\n"
      << "timing log: " << s.timing_log.string() << "\n";
  if (s.retrieval_dump) out << "retrieval:  " << s.retrieval_dump->string() << "\n";
  return s.failed > 0 ? 1 : 0;
}

EvalReport cmd_eval(const std::filesystem::path& pred, const std::filesystem::path& gold,
                    std::ostream& out, const std::optional<std::filesystem::path>& report_json) {
  const auto preds = read_results(pred);
  if (preds.empty()) throw InputError("results file " + pred.string() + " holds no documents");
  const auto golds = read_gold(gold);
  EvalReport report = accuracy(preds, golds);
  out << eval_report_table(report);
  if (report_json) {
    std::ofstream f(*report_json);
    if (!f) throw InputError("cannot write " + report_json->string());
    f << eval_report_json(report) << '\n';
  }
  return report;
}

BenchMetrics cmd_bench(const std::filesystem::path& manifest, const std::filesystem::path& config,
                       int device_count, const std::filesystem::path& results, std::ostream& out) {
  if (device_count < 1) throw InputError("device count must be >= 1");
  const PipelineResources res = load_resources(load_config(config));
  const auto entries = read_manifest(manifest);
  auto ocr = make_ocr_backend(res.cfg);
  auto vlm = make_vlm_backend(res.cfg);
  ProcessOptions opts;
  opts.out = results;
  opts.overwrite = true;
  const RunSummary s = run_process(entries, res, *ocr, *vlm, opts);
  // the log on disk is the source of truth
  const BenchMetrics m = bench(read_timing_log(s.timing_log), device_count);
  out << bench_table(m);
  if (s.failed > 0) out << s.failed << " document(s) failed; see " << results.string() << "\n";
  return m;
}

namespace {

const StructuredOutput& find_doc(const std::vector<StructuredOutput>& rows, const std::string& id) {
  for (const auto& r : rows) {
    if (r.doc_id == id) return r;
  }
  throw LookupError("no document '" + id + "' in the results");
}

void write_overlay(const StructuredOutput& doc, const FieldValue& fv, const InspectOptions& opts) {
  if (!opts.config) throw InputError("--overlay needs --config to rebuild the page");
  if (fv.provenance.empty() || fv.provenance.front().tokens.empty()) {
    throw LookupError("field '" + fv.field + "' has no provenance boxes to draw");
  }
  const Provenance& prov = fv.provenance.front();
  const PipelineConfig cfg = load_config(*opts.config);
  std::vector<std::filesystem::path> paths(doc.sources.begin(), doc.sources.end());
  const Document d = ingest_paths(paths, doc.doc_id, doc.language, {});
  if (!d.has_page(prov.page_no)) throw LookupError("source lacks page " + std::to_string(prov.page_no));
  auto ocr = make_ocr_backend(cfg);
  const auto page = preprocess_page(d.pages[static_cast<std::size_t>(prov.page_no - 1)], *ocr, cfg.preprocess);

  PageTranscript boxes;
  boxes.page_no = prov.page_no;
  double x0 = page.image.width(), y0 = page.image.height(), x1 = 0, y1 = 0;
  for (const auto& t : prov.tokens) {
    boxes.tokens.push_back({t.text, t.box, 1.0, 0, std::nullopt});
    x0 = std::min(x0, quad_min_x(t.box));
    y0 = std::min(y0, quad_min_y(t.box));
    x1 = std::max(x1, quad_max_x(t.box));
    y1 = std::max(y1, quad_max_y(t.box));
  }
  const Image full = render_overlay(to_rgb(page.image), boxes, 0.0);
  const int pad = 40;
  const int cx0 = std::max(0, static_cast<int>(std::floor(x0)) - pad);
  const int cy0 = std::max(0, static_cast<int>(std::floor(y0)) - pad);
  const int cx1 = std::min(full.width(), static_cast<int>(std::ceil(x1)) + pad);
  const int cy1 = std::min(full.height(), static_cast<int>(std::ceil(y1)) + pad);
  Image crop(cx1 - cx0, cy1 - cy0, 3);
  for (int y = cy0; y < cy1; ++y) {
    for (int x = cx0; x < cx1; ++x) {
      for (int c = 0; c < 3; ++c) crop.at(x - cx0, y - cy0, c) = full.at(x, y, c);
    }
  }
  codec::write_png(*opts.overlay_png, crop);
}

}  // namespace

void cmd_inspect(const std::filesystem::path& results, const std::string& doc_id,
                 const std::string& field, std::ostream& out, const InspectOptions& opts) {
  const auto rows = read_results(results);
  const StructuredOutput& doc = find_doc(rows, doc_id);
  const FieldResult* r = doc.find(field);
  if (!r) throw LookupError("document '" + doc_id + "' has no field '" + field + "'");

  out << "document " << doc.doc_id << (doc.failed ? " (failed)" : "") << "\n";
  out << "field    " << field << "\n";
  if (!r->value) {
    out << "status   not found\n";
  } else {
    const FieldValue& fv = *r->value;
    out << "value    " << canonical_text(fv.value);
    if (fv.currency) out << " " << *fv.currency;
    out << "\n";
    out << "raw      " << fv.raw_text << " (unit scale " << fv.unit_scale << ")\n";
    out << "model confidence "
        << (fv.model_confidence ? std::to_string(*fv.model_confidence) : std::string("n/a")) << "\n";
    for (const auto& p : fv.provenance) {
      out << "page " << p.page_no << "\n";
      for (const auto& t : p.tokens) {
        out << "  token " << t.index << " \"" << t.text << "\" confidence " << std::fixed
            << std::setprecision(2) << t.confidence << " box";
        for (const auto& pt : t.box) out << " (" << std::setprecision(1) << pt.x << "," << pt.y << ")";
        out << "\n";
      }
    }
    if (opts.overlay_png) {
      write_overlay(doc, fv, opts);
      out << "overlay  " << opts.overlay_png->string() << "\n";
    }
  }
  for (const auto& w : r->warnings) out << "warning  " << w << "\n";
  if (doc.error) out << "error    " << *doc.error << "\n";
}

}  // namespace finex
