#include "finex/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "finex/error.hpp"
#include "finex/normalize.hpp"
#include "finex/utf8.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace finex {

Image render_overlay(const Image& page, const PageTranscript& transcript, double min_confidence) {
  Image out = page;
  const int w = out.width();
  const int h = out.height();
  for (const auto& tok : transcript.tokens) {
    if (tok.confidence < min_confidence) continue;
    const Quad& q = tok.box;
    const int x0 = std::max(0, static_cast<int>(std::floor(quad_min_x(q))));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(quad_max_x(q))));
    const int y0 = std::max(0, static_cast<int>(std::floor(quad_min_y(q))));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(quad_max_y(q))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Point c{x + 0.5, y + 0.5};
        if (!point_in_quad(q, c)) continue;
        double d = std::numeric_limits<double>::max();
        for (int e = 0; e < 4; ++e) d = std::min(d, point_segment_distance(c, q[e], q[(e + 1) % 4]));
        if (d >= 2.0) continue;
        if (out.channels() == 3) {
          for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = kHighlightRgb[ch];
        } else {
          out.at(x, y) = 0;
        }
      }
    }
  }
  return out;
}

const std::vector<std::string>& response_schema_keys() {
  static const std::vector<std::string> keys = {"value", "unit_scale", "currency", "page_no",
                                                "quote"};
  return keys;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir,
                                      const std::vector<std::string>& fields) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("template directory " + dir.string() + " missing");
  PromptTemplates t;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string stem = path.stem().string();  // field.lang
    const auto dot = stem.rfind('.');
    if (dot == std::string::npos) continue;
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.find("{{ocr_text}}") == std::string::npos) {
      throw ConfigError("template " + path.string() + " lacks {{ocr_text}}");
    }
    for (const auto& key : response_schema_keys()) {
      if (text.find(key) == std::string::npos) {
        throw ConfigError("template " + path.string() + " does not mention reply key '" + key + "'");
      }
    }
    t.add(stem.substr(0, dot), stem.substr(dot + 1), text);
  }
  for (const auto& f : fields) {
    if (!t.has(f, "en")) throw ConfigError("no English prompt template for field '" + f + "' in " + dir.string());
  }
  return t;
}

void PromptTemplates::add(const std::string& field, const std::string& language, std::string text) {
  templates_[{field, language}] = std::move(text);
}

bool PromptTemplates::has(const std::string& field, const std::string& language) const {
  return templates_.contains({field, language});
}

const std::string& PromptTemplates::get(const std::string& field,
                                        const std::string& language) const {
  if (auto it = templates_.find({field, language}); it != templates_.end()) return it->second;
  if (auto it = templates_.find({field, "en"}); it != templates_.end()) return it->second;
  throw ConfigError("no prompt template for field '" + field + "'");
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

ExtractionRequest build_prompt(const FieldSpec& field, std::vector<ExtractionPage> pages,
                               const std::string& language, const PromptTemplates& templates) {
  if (pages.empty()) throw InputError("extraction request for '" + field.name + "' has no pages");
  ExtractionRequest req;
  req.field = field.name;
  req.kind = field.value_kind;
  req.response_schema = response_schema_keys();

  std::string keywords;
  for (const auto& kw : field.keywords_for(language)) {
    if (!keywords.empty()) keywords += ", ";
    keywords += json(kw).dump();
  }
  std::string page_list;
  std::string ocr_text;
  for (const auto& p : pages) {
    if (!page_list.empty()) page_list += ", ";
    page_list += std::to_string(p.page_no);
    ocr_text += "--- page " + std::to_string(p.page_no) + " ---\n" + p.transcript.full_text + "\n";
  }

  std::string prompt = templates.get(field.name, language);
  replace_all(prompt, "{{field}}", field.name);
  replace_all(prompt, "{{keywords}}", "[" + keywords + "]");
  replace_all(prompt, "{{value_kind}}", to_string(field.value_kind));
  replace_all(prompt, "{{language}}", language);
  replace_all(prompt, "{{pages}}", page_list);
  replace_all(prompt, "{{ocr_text}}", ocr_text);
  req.prompt = std::move(prompt);
  req.pages = std::move(pages);
  return req;
}

const std::string& repair_instruction() {
  static const std::string text =
      "\n\nYour previous answer could not be read. Answer again with exactly one flat JSON "
      "object with the keys value, unit_scale, currency, page_no and quote, and nothing else.";
  return text;
}

std::optional<std::string> extract_json_object(const std::string& reply) {
  const auto start = reply.find('{');
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < reply.size(); ++i) {
    const char c = reply[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      std::string candidate = reply.substr(start, i - start + 1);
      if (!json::accept(candidate)) return std::nullopt;
      return candidate;
    }
  }
  return std::nullopt;
}

namespace {

// One model call with transport retries; nullopt when no usable object came
// back after the repair attempt. Failures are described in `warnings`.
std::optional<json> ask(VlmBackend& backend, const ExtractionRequest& req,
                        const ExtractOptions& opts, std::vector<std::string>& warnings) {
  VlmRequest vreq;
  vreq.prompt = req.prompt;
  vreq.max_tokens = req.max_tokens;
  vreq.images.reserve(req.pages.size());
  for (const auto& p : req.pages) vreq.images.push_back(p.image);

  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) vreq.prompt = req.prompt + repair_instruction();
    std::string text;
    try {
      text = with_retries(opts.retry, [&] { return backend.generate(vreq); });
    } catch (const TransportError& e) {
      warnings.push_back("backend unavailable: " + std::string(e.what()));
      return std::nullopt;
    } catch (const ProtocolError& e) {
      warnings.push_back("backend protocol error: " + std::string(e.what()));
      return std::nullopt;
    }
    const auto obj_text = extract_json_object(text);
    if (obj_text) {
      json obj = json::parse(*obj_text);
      if (obj.is_object() && obj.contains("value")) return obj;
    }
    warnings.push_back((attempt == 0 ? "unparseable reply, retrying: " : "unparseable reply again: ") +
                       excerpt(text, 120));
  }
  return std::nullopt;
}

std::optional<std::int64_t> reply_scale(const json& obj, std::vector<std::string>& warnings) {
  if (!obj.contains("unit_scale") || obj["unit_scale"].is_null()) return std::nullopt;
  const json& s = obj["unit_scale"];
  std::int64_t v = 0;
  if (s.is_number_integer()) {
    v = s.get<std::int64_t>();
  } else if (s.is_number_float() && std::floor(s.get<double>()) == s.get<double>()) {
    v = static_cast<std::int64_t>(s.get<double>());
  } else if (s.is_string()) {
    try {
      v = std::stoll(s.get<std::string>());
    } catch (const std::exception&) {
      v = 0;
    }
  }
  const auto& allowed = default_unit_scales();
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    warnings.push_back("ignored unit_scale " + s.dump());
    return std::nullopt;
  }
  return v;
}

std::optional<std::string> reply_string(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string()) return std::nullopt;
  std::string s = obj[key].get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

const PageTranscript* transcript_for(const ExtractionRequest& req, const ExtractOptions& opts,
                                     int page_no) {
  // token indices refer to the unfiltered transcript when there is one
  for (const auto& p : opts.all_pages) {
    if (p.page_no == page_no) return &p;
  }
  for (const auto& p : req.pages) {
    if (p.page_no == page_no) return &p.transcript;
  }
  return nullptr;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::vector<int> matching_tokens(const PageTranscript& t, const std::string& quote) {
  std::vector<int> hits;
  if (quote.empty()) return hits;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (t.tokens[i].text.find(quote) != std::string::npos) hits.push_back(static_cast<int>(i));
  }
  if (!hits.empty()) return hits;
  const auto words = split_words(quote);
  if (words.size() < 2) return hits;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    for (const auto& w : words) {
      if (t.tokens[i].text.find(w) != std::string::npos) {
        hits.push_back(static_cast<int>(i));
        break;
      }
    }
  }
  return hits;
}

Provenance make_provenance(const PageTranscript& t, int page_no, const std::vector<int>& hits) {
  Provenance p;
  p.page_no = page_no;
  p.token_indices = hits;
  for (int i : hits) {
    const auto& tok = t.tokens[static_cast<std::size_t>(i)];
    p.tokens.push_back({i, tok.text, tok.confidence, tok.box});
  }
  return p;
}

std::string value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

FieldResult extract_field(VlmBackend& backend, const ExtractionRequest& req,
                          const ExtractOptions& opts) {
  FieldResult result;
  result.field = req.field;
  auto& warnings = result.warnings;
  const auto obj = ask(backend, req, opts, warnings);
  if (!obj) {
    warnings.push_back("not found: no usable reply");
    return result;
  }
  const json& value = (*obj)["value"];
  if (value.is_null() || (value.is_string() && value.get<std::string>().empty())) {
    warnings.push_back("not found: model reported no value");
    return result;
  }
  if (!value.is_string() && !value.is_number()) {
    warnings.push_back("not found: value has the wrong type: " + excerpt(value.dump(), 80));
    return result;
  }

  // cited page
  int page_no = 0;  // 0: none cited
  if (obj->contains("page_no") && (*obj)["page_no"].is_number_integer()) {
    page_no = (*obj)["page_no"].get<int>();
    if (page_no == 0) {
      warnings.push_back("cited page 0 does not exist");
    } else if (page_no < 1 || page_no > opts.n_pages) {
      warnings.push_back("cited page " + std::to_string(page_no) + " does not exist");
      page_no = 0;
    } else if (std::find(opts.retained.begin(), opts.retained.end(), page_no) ==
               opts.retained.end()) {
      warnings.push_back("cited page " + std::to_string(page_no) + " is outside the retained pages");
    }
  }

  FieldValue fv;
  fv.field = req.field;
  fv.raw_text = value_text(value);
  const std::string quote = reply_string(*obj, "quote").value_or(fv.raw_text);

  // page text used for header hints: the cited page first, then the rest
  std::vector<const PageTranscript*> context;
  if (page_no != 0) {
    if (const auto* t = transcript_for(req, opts, page_no)) context.push_back(t);
  }
  for (const auto& p : req.pages) {
    if (page_no == 0 || p.page_no != page_no) context.push_back(&p.transcript);
  }

  std::int64_t scale = 1;
  std::optional<std::string> currency_hint = reply_string(*obj, "currency");
  if (req.kind == ValueKind::money) {
    if (auto s = reply_scale(*obj, warnings)) {
      scale = *s;
    } else {
      for (const auto* t : context) {
        if (auto hint = detect_unit_scale(t->full_text)) {
          scale = *hint;
          break;
        }
      }
    }
    if (!currency_hint && !find_currency(fv.raw_text)) {
      for (const auto* t : context) {
        if ((currency_hint = find_currency(t->full_text))) break;
      }
    }
  }

  try {
    auto norm = normalize_value(fv.raw_text, scale, currency_hint, req.kind);
    fv.value = std::move(norm.value);
    fv.currency = std::move(norm.currency);
  } catch (const NormalizationError& e) {
    warnings.push_back("not found: " + std::string(e.what()));
    return result;
  }
  fv.unit_scale = req.kind == ValueKind::money ? scale : 1;
  if (req.kind == ValueKind::money && scale == 1) {
    if (auto s = detect_unit_scale(fv.raw_text)) fv.unit_scale = *s;
  }

  if (obj->contains("confidence") && (*obj)["confidence"].is_number()) {
    const double c = (*obj)["confidence"].get<double>();
    if (c >= 0.0 && c <= 1.0) fv.model_confidence = c;
  }

  if (page_no != 0) {
    if (const auto* t = transcript_for(req, opts, page_no)) {
      fv.provenance.push_back(make_provenance(*t, page_no, matching_tokens(*t, quote)));
    } else {
      fv.provenance.push_back({page_no, {}, {}});
    }
  } else {
    for (const auto& p : req.pages) {
      const PageTranscript& t = *transcript_for(req, opts, p.page_no);
      const auto hits = matching_tokens(t, quote);
      if (!hits.empty()) {
        fv.provenance.push_back(make_provenance(t, p.page_no, hits));
        break;
      }
    }
  }
  if (!fv.provenance.empty() && fv.provenance.front().token_indices.empty()) {
    warnings.push_back("quote not found on page " + std::to_string(fv.provenance.front().page_no));
  }
  result.value = std::move(fv);
  return result;
}

SummaryResult summarize_background(VlmBackend& backend,
                                   const std::optional<ExtractionRequest>& request,
                                   const ExtractOptions& opts) {
  SummaryResult out;
  if (!request || request->pages.empty()) {
    out.warnings.push_back("not found: no pages retained");
    return out;
  }
  const auto obj = ask(backend, *request, opts, out.warnings);
  if (!obj) {
    out.warnings.push_back("not found: no usable reply");
    return out;
  }
  const json& value = (*obj)["value"];
  if (!value.is_string() || value.get<std::string>().empty()) {
    out.warnings.push_back("not found: model reported no summary");
    return out;
  }
  BackgroundSummary s;
  const auto cps = utf8::decode(value.get<std::string>());
  if (cps.size() > opts.summary_max_chars) {
    s.text = utf8::encode({cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(opts.summary_max_chars)});
    out.warnings.push_back("summary truncated from " + std::to_string(cps.size()) + " to " +
                           std::to_string(opts.summary_max_chars) + " characters");
  } else {
    s.text = value.get<std::string>();
  }
  for (const auto& p : request->pages) s.pages.push_back(p.page_no);
  std::sort(s.pages.begin(), s.pages.end());
  out.summary = std::move(s);
  return out;
}

FieldResult summary_field_result(const SummaryResult& s) {
  FieldResult r;
  r.field = "background_summary";
  r.warnings = s.warnings;
  if (s.summary) {
    FieldValue fv;
    fv.field = r.field;
    fv.raw_text = s.summary->text;
    fv.value = s.summary->text;
    for (int p : s.summary->pages) fv.provenance.push_back({p, {}, {}});
    r.value = std::move(fv);
  }
  return r;
}

const FieldResult* StructuredOutput::find(const std::string& field) const {
  for (const auto& f : fields) {
    if (f.field == field) return &f;
  }
  return nullptr;
}

StructuredOutput merge_results(const std::string& doc_id,
                               const std::vector<std::string>& field_order,
                               std::vector<FieldResult> results,
                               std::optional<BackgroundSummary> summary) {
  std::map<std::string, FieldResult> by_name;
  for (auto& r : results) {
    const std::string name = r.field;
    if (!by_name.emplace(name, std::move(r)).second) {
      throw InternalError("document '" + doc_id + "': two results for field '" + name + "'");
    }
  }
  StructuredOutput out;
  out.doc_id = doc_id;
  for (const auto& name : field_order) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw InternalError("document '" + doc_id + "': no result for field '" + name + "'");
    }
    for (const auto& w : it->second.warnings) out.warnings.push_back(name + ": " + w);
    out.fields.push_back(std::move(it->second));
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    throw InternalError("document '" + doc_id + "': result for unconfigured field '" +
                        by_name.begin()->first + "'");
  }
  out.background_summary = std::move(summary);
  return out;
}

}  // namespace finex
