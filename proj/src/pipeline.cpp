#include "finex/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include "finex/codec.hpp"
#include "finex/concurrency.hpp"
#include "finex/error.hpp"
#include "finex/ocr_http.hpp"
#include "finex/preprocess.hpp"
#include "finex/results_io.hpp"
#include "finex/synthetic.hpp"
#include "json.hpp"

using ojson = nlohmann::ordered_json;

namespace finex {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string utc_now_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// "id-ID" -> "id"
std::string primary_language(const std::optional<std::string>& hint) {
  if (!hint || hint->empty()) return "en";
  std::string lang = hint->substr(0, hint->find_first_of("-_"));
  for (auto& c : lang) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lang;
}

}  // namespace

std::unique_ptr<OcrBackend> make_ocr_backend(const PipelineConfig& cfg) {
  if (cfg.ocr.backend == "synthetic") return synthetic::SyntheticOcrBackend::load(cfg.ocr.corpus);
  return std::make_unique<HttpOcrBackend>(cfg.ocr.endpoint);
}

std::unique_ptr<VlmBackend> make_vlm_backend(const PipelineConfig& cfg) {
  if (cfg.vlm.backend == "scripted") return ScriptedVlmBackend::load(cfg.vlm.script);
  return std::make_unique<HttpVlmBackend>(cfg.vlm.endpoint);
}

PipelineResources load_resources(const PipelineConfig& cfg) {
  validate_config(cfg);
  PipelineResources res;
  res.cfg = cfg;
  const auto keywords = load_keywords(cfg.keywords_path, cfg.ocr.languages);
  res.fields = make_field_specs(cfg.fields, keywords, cfg.ocr.languages);
  res.templates = PromptTemplates::load(cfg.templates_dir, cfg.fields);
  return res;
}

std::string preprocess_report_json(const PreprocessReport& r) {
  ojson j;
  j["crop_rect"] = {r.crop_rect.x, r.crop_rect.y, r.crop_rect.w, r.crop_rect.h};
  j["coarse_rotation_deg"] = r.coarse_rotation_deg;
  j["fine_skew_deg"] = r.fine_skew_deg;
  j["scale_factor"] = r.scale_factor;
  j["applied_clahe"] = r.applied_clahe;
  j["applied_denoise"] = r.applied_denoise;
  j["order"] = r.order;
  j["flags"] = r.flags;
  j["output_size"] = {r.output_width, r.output_height};
  return j.dump(2);
}

DocumentRun process_document(const Document& doc, const PipelineResources& res, OcrBackend& ocr,
                             VlmBackend& vlm,
                             const std::optional<std::filesystem::path>& dump_preprocess) {
  validate_document(doc);
  const auto& cfg = res.cfg;
  const std::string language = primary_language(doc.language_hint);
  const int n = doc.page_count();
  DocumentRun run;
  auto stage = [&](const char* name, Clock::time_point t0, int pages) {
    run.timings.push_back({doc.doc_id, name, seconds_since(t0), pages});
  };

  // preprocess (orientation voting calls the OCR backend)
  auto t0 = Clock::now();
  std::vector<PreprocessedPage> prepped(static_cast<std::size_t>(n));
  bounded_for(prepped.size(), cfg.ocr.endpoint.pool_size, [&](std::size_t i) {
    prepped[i] = preprocess_page(doc.pages[i], ocr, cfg.preprocess);
  });
  stage("preprocess", t0, n);
  if (dump_preprocess) {
    const auto dir = *dump_preprocess / doc.doc_id;
    std::filesystem::create_directories(dir);
    for (int i = 0; i < n; ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "page-%03d", i + 1);
      const auto& p = prepped[static_cast<std::size_t>(i)];
      codec::write_png(dir / (std::string(stem) + ".before.png"), doc.pages[static_cast<std::size_t>(i)].image);
      codec::write_png(dir / (std::string(stem) + ".after.png"), p.image);
      std::ofstream(dir / (std::string(stem) + ".report.json")) << preprocess_report_json(p.report) << '\n';
    }
  }

  // transcribe
  t0 = Clock::now();
  std::vector<std::string> languages = cfg.ocr.languages;
  if (auto it = std::find(languages.begin(), languages.end(), language); it != languages.end()) {
    std::rotate(languages.begin(), it, it + 1);
  }
  std::vector<PageTranscript> transcripts(static_cast<std::size_t>(n));
  bounded_for(transcripts.size(), cfg.ocr.endpoint.pool_size, [&](std::size_t i) {
    const PageImage page{static_cast<int>(i) + 1, prepped[i].image, std::nullopt};
    transcripts[i] = with_retries(cfg.retry, [&] { return transcribe(ocr, page, languages); });
  });
  stage("ocr", t0, n);

  // index (barrier: every page is in before any query)
  t0 = Clock::now();
  std::vector<PageTranscript> reliable;
  reliable.reserve(transcripts.size());
  for (const auto& t : transcripts) reliable.push_back(filter_tokens(t, cfg.retrieval_min_confidence));
  const Bm25Index index = build_index(reliable, cfg.bm25, doc.doc_id, language);
  stage("index", t0, n);

  // retrieval
  t0 = Clock::now();
  for (const auto& f : res.fields) run.retrieval.push_back(rank_pages(index, f, language, cfg.top_k));
  const PageSelection selection = select_document_pages(run.retrieval, n);
  stage("retrieval", t0, static_cast<int>(selection.retained.size()));

  // extraction
  t0 = Clock::now();
  std::vector<PageTranscript> model_text;
  model_text.reserve(transcripts.size());
  for (const auto& t : transcripts) model_text.push_back(filter_tokens(t, cfg.extraction_min_confidence));
  std::map<int, Image> overlays;
  for (int p : selection.retained) {
    const auto i = static_cast<std::size_t>(p - 1);
    overlays[p] = render_overlay(to_rgb(prepped[i].image), transcripts[i], cfg.overlay_min_confidence);
  }

  std::vector<FieldResult> results(res.fields.size());
  std::optional<BackgroundSummary> summary;
  std::mutex summary_mu;
  bounded_for(res.fields.size(), cfg.vlm.endpoint.pool_size, [&](std::size_t fi) {
    const FieldSpec& field = res.fields[fi];
    const RetrievalResult& rr = run.retrieval[fi];
    ExtractOptions opts;
    opts.retry = cfg.retry;
    opts.n_pages = n;
    opts.retained = rr.retained;
    opts.all_pages = transcripts;
    opts.summary_max_chars = cfg.summary_max_chars;

    std::optional<ExtractionRequest> req;
    if (!rr.retained.empty()) {
      std::vector<ExtractionPage> pages;
      for (int p : rr.retained) {
        pages.push_back({p, overlays.at(p), model_text[static_cast<std::size_t>(p - 1)]});
      }
      req = build_prompt(field, std::move(pages), language, res.templates);
      req->max_tokens = cfg.vlm.max_tokens;
    }

    if (field.category == FieldCategory::narrative) {
      const SummaryResult s = summarize_background(vlm, req, opts);
      results[fi] = summary_field_result(s);
      std::lock_guard lock(summary_mu);
      summary = s.summary;
    } else if (req) {
      results[fi] = extract_field(vlm, *req, opts);
    } else {
      results[fi].field = field.name;
      results[fi].warnings.push_back("not found: no page matched the field keywords");
    }
  });
  stage("extraction", t0, static_cast<int>(selection.retained.size()));

  // merge
  t0 = Clock::now();
  std::vector<std::string> order;
  for (const auto& f : res.fields) order.push_back(f.name);
  run.output = merge_results(doc.doc_id, order, std::move(results), std::move(summary));
  if (selection.empty) run.output.warnings.push_back("retrieval kept no page for any field");
  run.output.language = doc.language_hint;
  run.output.n_pages = n;
  run.output.retained_pages = selection.retained;
  run.output.reduction_ratio = selection.reduction_ratio;
  stage("merge", t0, n);
  return run;
}

std::filesystem::path sibling_path(const std::filesystem::path& results, const std::string& suffix) {
  return results.parent_path() / (results.stem().string() + "." + suffix);
}

namespace {

std::string retrieval_dump_lines(const std::string& doc_id, const std::vector<RetrievalResult>& rs) {
  std::string out;
  for (const auto& r : rs) {
    ojson ranked = ojson::array();
    for (const auto& [p, s] : r.ranked) ranked.push_back({p, s});
    ojson j{{"doc_id", doc_id}, {"field", r.field}, {"ranked", ranked}, {"retained", r.retained}};
    out += j.dump() + "\n";
  }
  return out;
}

StructuredOutput failed_output(const std::string& doc_id, const std::vector<FieldSpec>& fields,
                               const std::string& error) {
  StructuredOutput out;
  out.doc_id = doc_id;
  out.failed = true;
  out.error = error;
  for (const auto& f : fields) out.fields.push_back({f.name, std::nullopt, {"document failed"}});
  out.warnings.push_back("document failed: " + error);
  return out;
}

}  // namespace

RunSummary run_process(const std::vector<ManifestEntry>& manifest, const PipelineResources& res,
                       OcrBackend& ocr, VlmBackend& vlm, const ProcessOptions& opts) {
  namespace fs = std::filesystem;
  if (opts.out.empty()) throw InputError("no results path given");
  if (fs::exists(opts.out) && !opts.overwrite) {
    throw InputError("results file " + opts.out.string() + " exists; pass --overwrite to replace it");
  }
  if (!opts.out.parent_path().empty()) fs::create_directories(opts.out.parent_path());

  RunSummary summary;
  summary.results = opts.out;
  summary.timing_log = res.cfg.timing_log.empty() ? sibling_path(opts.out, "timing.csv") : res.cfg.timing_log;
  if (opts.dump_retrieval) summary.retrieval_dump = sibling_path(opts.out, "retrieval.jsonl");

  struct Job {
    std::string doc_id;
    const ManifestEntry* entry;
  };
  std::vector<Job> jobs;
  DocIdAllocator ids;
  for (const auto& e : manifest) {
    std::string wanted = e.doc_id;
    if (wanted.empty() && !e.paths.empty()) wanted = e.paths.front().stem().string();
    jobs.push_back({ids.allocate(wanted.empty() ? "doc" : wanted), &e});
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.doc_id < b.doc_id; });

  const std::string timestamp = res.cfg.timestamp.empty() ? utc_now_iso8601() : res.cfg.timestamp;

  struct Slot {
    bool ready = false;
    std::string line;
    std::string retrieval;
  };
  std::vector<Slot> slots(jobs.size());
  std::vector<std::vector<TimingRow>> timings(jobs.size());
  std::vector<char> failed(jobs.size(), 0);
  std::mutex mu;
  std::condition_variable cv;

  std::ofstream results(opts.out, std::ios::trunc);
  if (!results) throw InputError("cannot write results file " + opts.out.string());
  std::ofstream retrieval;
  if (summary.retrieval_dump) {
    retrieval.open(*summary.retrieval_dump, std::ios::trunc);
    if (!retrieval) throw InputError("cannot write " + summary.retrieval_dump->string());
  }

  const auto run_start = Clock::now();
  // single writer: emits rows strictly in doc_id order as they complete
  std::jthread writer([&] {
    for (std::size_t next = 0; next < slots.size(); ++next) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return slots[next].ready; });
      Slot slot = std::move(slots[next]);
      lock.unlock();
      results << slot.line << '\n';
      results.flush();
      if (retrieval.is_open()) retrieval << slot.retrieval;
    }
  });

  bounded_for(jobs.size(), res.cfg.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    Slot slot;
    StructuredOutput out;
    try {
      const Document doc = ingest_paths(job.entry->paths, job.doc_id, job.entry->language_hint,
                                        IngestOptions{});
      DocumentRun run = process_document(doc, res, ocr, vlm, opts.dump_preprocess);
      out = std::move(run.output);
      timings[i] = std::move(run.timings);
      slot.retrieval = retrieval_dump_lines(job.doc_id, run.retrieval);
    } catch (const std::exception& e) {
      out = failed_output(job.doc_id, res.fields, e.what());
      out.language = job.entry->language_hint;
      failed[i] = 1;
    }
    for (const auto& p : job.entry->paths) out.sources.push_back(p.string());
    out.timestamp = timestamp;
    out.pipeline_version = kPipelineVersion;
    slot.line = to_json_line(out);
    slot.ready = true;
    {
      std::lock_guard lock(mu);
      slots[i] = std::move(slot);
    }
    cv.notify_all();
  });
  writer.join();
  summary.wall_clock_s = seconds_since(run_start);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    (failed[i] ? summary.failed : summary.succeeded) += 1;
    for (auto& row : timings[i]) summary.timings.push_back(std::move(row));
  }
  summary.timings.push_back({kRunRowId, kWallClockStage, summary.wall_clock_s, 0});
  write_timing_log(summary.timing_log, summary.timings);
  return summary;
}

}  // namespace finex
