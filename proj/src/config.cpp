#include "finex/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "finex/error.hpp"
#include "json.hpp"

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace finex {

namespace {

// Reads keys from one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config " + name_ + "." + key + ": " + e.what());
    }
  }

  void read_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    read(key, s);
    if (!s.empty()) out = std::filesystem::path(s).is_absolute() ? std::filesystem::path(s) : base / s;
  }

  std::optional<Section> sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), name_.empty() ? key : name_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) {
        throw ConfigError("unknown config key '" + (name_.empty() ? k : name_ + "." + k) + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_endpoint(Section& s, HttpEndpoint& ep) {
  s.read("endpoint", ep.url);
  s.read("pool_size", ep.pool_size);
  s.read("timeout_s", ep.timeout_s);
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " is not configured");
  if (!std::filesystem::exists(p)) throw ConfigError(what + " " + p.string() + " does not exist");
}

}  // namespace

void validate_config(const PipelineConfig& cfg) {
  if (cfg.fields.empty()) throw ConfigError("no fields configured");
  for (const auto& f : cfg.fields) default_field_shape(f);
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.ocr.endpoint.pool_size < 1 || cfg.vlm.endpoint.pool_size < 1) {
    throw ConfigError("backend pool sizes must be >= 1");
  }
  if (cfg.ocr.languages.empty()) throw ConfigError("ocr.languages is empty");
  if (cfg.top_k < 1) throw ConfigError("retrieval.top_k must be >= 1");
  if (!(cfg.bm25.k1 >= 0.0) || !(cfg.bm25.b >= 0.0 && cfg.bm25.b <= 1.0)) {
    throw ConfigError("retrieval needs k1 >= 0 and b in [0, 1]");
  }
  for (double c : {cfg.retrieval_min_confidence, cfg.extraction_min_confidence,
                   cfg.overlay_min_confidence}) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("confidence thresholds must lie in [0, 1]");
  }
  if (cfg.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (cfg.vlm.max_tokens < 1) throw ConfigError("vlm.max_tokens must be >= 1");
  if (cfg.summary_max_chars < 1) throw ConfigError("extraction.summary_max_chars must be >= 1");
  validate_preprocess_config(cfg.preprocess);

  if (cfg.ocr.backend == "synthetic") {
    require_file(cfg.ocr.corpus, "ocr.corpus");
  } else if (cfg.ocr.backend != "http") {
    throw ConfigError("ocr.backend must be 'http' or 'synthetic'");
  }
  if (cfg.vlm.backend == "scripted") {
    require_file(cfg.vlm.script, "vlm.script");
  } else if (cfg.vlm.backend != "http") {
    throw ConfigError("vlm.backend must be 'http' or 'scripted'");
  }
  require_file(cfg.keywords_path, "keyword file");
  require_file(cfg.templates_dir, "template directory");
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  PipelineConfig cfg;
  Section top(root, "");
  top.read("fields", cfg.fields);
  top.read_path("keywords", cfg.keywords_path, base);
  top.read_path("templates", cfg.templates_dir, base);
  top.read("workers", cfg.workers);
  if (auto s = top.sub("ocr")) {
    s->read("backend", cfg.ocr.backend);
    read_endpoint(*s, cfg.ocr.endpoint);
    s->read_path("corpus", cfg.ocr.corpus, base);
    s->read("languages", cfg.ocr.languages);
    s->finish();
  }
  if (auto s = top.sub("vlm")) {
    s->read("backend", cfg.vlm.backend);
    read_endpoint(*s, cfg.vlm.endpoint);
    s->read_path("script", cfg.vlm.script, base);
    s->read("max_tokens", cfg.vlm.max_tokens);
    s->finish();
  }
  if (auto s = top.sub("retry")) {
    s->read("max_attempts", cfg.retry.max_attempts);
    s->read("initial_backoff_s", cfg.retry.initial_backoff_s);
    s->read("max_backoff_s", cfg.retry.max_backoff_s);
    s->finish();
  }
  if (auto s = top.sub("preprocess")) {
    auto& p = cfg.preprocess;
    s->read("crop_margin_frac", p.crop_margin_frac);
    s->read("blank_ink_frac", p.blank_ink_frac);
    s->read("min_ink_contrast", p.min_ink_contrast);
    s->read("orientation_long_side_px", p.orientation_long_side_px);
    s->read("orientation_sweep_deg", p.orientation_sweep_deg);
    s->read("orientation_sweep_step_deg", p.orientation_sweep_step_deg);
    s->read("orientation_languages", p.orientation_languages);
    s->read("skew_range_deg", p.skew_range_deg);
    s->read("skew_step_deg", p.skew_step_deg);
    s->read("edge_percentile", p.edge_percentile);
    s->read("hough_peak_fraction", p.hough_peak_fraction);
    s->read("hough_min_lines", p.hough_min_lines);
    s->read("target_long_side_px", p.target_long_side_px);
    s->read("bicubic_a", p.bicubic_a);
    s->read("clahe_tiles", p.clahe_tiles);
    s->read("clahe_clip_limit", p.clahe_clip_limit);
    s->read("apply_clahe", p.apply_clahe);
    s->read("blur_sigma", p.blur_sigma);
    s->read("apply_denoise", p.apply_denoise);
    s->finish();
  }
  if (auto s = top.sub("retrieval")) {
    s->read("top_k", cfg.top_k);
    s->read("k1", cfg.bm25.k1);
    s->read("b", cfg.bm25.b);
    s->read("min_confidence", cfg.retrieval_min_confidence);
    s->finish();
  }
  if (auto s = top.sub("extraction")) {
    s->read("min_confidence", cfg.extraction_min_confidence);
    s->read("overlay_min_confidence", cfg.overlay_min_confidence);
    s->read("summary_max_chars", cfg.summary_max_chars);
    s->finish();
  }
  if (auto s = top.sub("output")) {
    s->read_path("timing_log", cfg.timing_log, base);
    s->read("timestamp", cfg.timestamp);
    s->finish();
  }
  top.finish();

  if (const char* env = std::getenv("OCR_ENDPOINT"); env && *env) cfg.ocr.endpoint.url = env;
  if (const char* env = std::getenv("VLM_ENDPOINT"); env && *env) cfg.vlm.endpoint.url = env;
  validate_config(cfg);
  return cfg;
}

std::string default_config_json() {
  const PipelineConfig c;
  const auto& p = c.preprocess;
  ojson j;
  j["fields"] = c.fields;
  j["keywords"] = "keywords.json";
  j["templates"] = "templates";
  j["workers"] = c.workers;
  j["ocr"] = {{"backend", c.ocr.backend},
              {"endpoint", c.ocr.endpoint.url},
              {"pool_size", c.ocr.endpoint.pool_size},
              {"timeout_s", c.ocr.endpoint.timeout_s},
              {"languages", c.ocr.languages}};
  j["vlm"] = {{"backend", c.vlm.backend},
              {"endpoint", c.vlm.endpoint.url},
              {"pool_size", c.vlm.endpoint.pool_size},
              {"timeout_s", c.vlm.endpoint.timeout_s},
              {"max_tokens", c.vlm.max_tokens}};
  j["retry"] = {{"max_attempts", c.retry.max_attempts},
                {"initial_backoff_s", c.retry.initial_backoff_s},
                {"max_backoff_s", c.retry.max_backoff_s}};
  j["preprocess"] = {{"crop_margin_frac", p.crop_margin_frac},
                     {"blank_ink_frac", p.blank_ink_frac},
                     {"min_ink_contrast", p.min_ink_contrast},
                     {"orientation_long_side_px", p.orientation_long_side_px},
                     {"orientation_sweep_deg", p.orientation_sweep_deg},
                     {"orientation_sweep_step_deg", p.orientation_sweep_step_deg},
                     {"orientation_languages", p.orientation_languages},
                     {"skew_range_deg", p.skew_range_deg},
                     {"skew_step_deg", p.skew_step_deg},
                     {"edge_percentile", p.edge_percentile},
                     {"hough_peak_fraction", p.hough_peak_fraction},
                     {"hough_min_lines", p.hough_min_lines},
                     {"target_long_side_px", p.target_long_side_px},
                     {"bicubic_a", p.bicubic_a},
                     {"clahe_tiles", p.clahe_tiles},
                     {"clahe_clip_limit", p.clahe_clip_limit},
                     {"apply_clahe", p.apply_clahe},
                     {"blur_sigma", p.blur_sigma},
                     {"apply_denoise", p.apply_denoise}};
  j["retrieval"] = {{"top_k", c.top_k},
                    {"k1", c.bm25.k1},
                    {"b", c.bm25.b},
                    {"min_confidence", c.retrieval_min_confidence}};
  j["extraction"] = {{"min_confidence", c.extraction_min_confidence},
                     {"overlay_min_confidence", c.overlay_min_confidence},
                     {"summary_max_chars", c.summary_max_chars}};
  j["output"] = {{"timing_log", ""}, {"timestamp", ""}};
  return j.dump(2);
}

}  // namespace finex
