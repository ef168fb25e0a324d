#include "finex/results_io.hpp"

#include <fstream>

#include "finex/error.hpp"
#include "json.hpp"

using ojson = nlohmann::ordered_json;

namespace finex {

namespace {

ojson quad_json(const Quad& q) {
  ojson a = ojson::array();
  for (const auto& p : q) a.push_back({p.x, p.y});
  return a;
}

Quad quad_from(const ojson& j) {
  Quad q{};
  for (std::size_t i = 0; i < 4; ++i) q[i] = {j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>()};
  return q;
}

ojson value_json(const NormalizedValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<ScaledDecimal>(&v)) return d->to_plain_string();
  if (const auto* c = std::get_if<CurrencyCode>(&v)) return c->code;
  return std::get<std::string>(v);
}

ValueKind kind_of(const NormalizedValue& v) {
  if (std::holds_alternative<std::int64_t>(v)) return ValueKind::integer;
  if (std::holds_alternative<ScaledDecimal>(v)) return ValueKind::money;
  if (std::holds_alternative<CurrencyCode>(v)) return ValueKind::currency_code;
  return ValueKind::text;
}

NormalizedValue value_from(const ojson& j, ValueKind kind) {
  switch (kind) {
    case ValueKind::integer: return j.get<std::int64_t>();
    case ValueKind::money: return ScaledDecimal::parse_plain(j.get<std::string>());
    case ValueKind::currency_code: return CurrencyCode{j.get<std::string>()};
    case ValueKind::text: return j.get<std::string>();
  }
  return j.get<std::string>();
}

template <class T>
ojson opt_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson field_json(const FieldResult& r) {
  ojson j;
  if (!r.value) {
    j["status"] = "not_found";
    j["warnings"] = r.warnings;
    return j;
  }
  const FieldValue& fv = *r.value;
  j["status"] = "found";
  j["kind"] = to_string(kind_of(fv.value));
  j["value"] = value_json(fv.value);
  j["raw_text"] = fv.raw_text;
  j["unit_scale"] = fv.unit_scale;
  j["currency"] = opt_json(fv.currency);
  ojson prov = ojson::array();
  for (const auto& p : fv.provenance) {
    ojson toks = ojson::array();
    for (const auto& t : p.tokens) {
      toks.push_back({{"index", t.index},
                      {"text", t.text},
                      {"confidence", t.confidence},
                      {"box", quad_json(t.box)}});
    }
    prov.push_back({{"page_no", p.page_no}, {"token_indices", p.token_indices}, {"tokens", toks}});
  }
  j["provenance"] = prov;
  j["model_confidence"] = opt_json(fv.model_confidence);
  j["warnings"] = r.warnings;
  return j;
}

FieldResult field_from(const std::string& name, const ojson& j) {
  FieldResult r;
  r.field = name;
  r.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.at("status").get<std::string>() != "found") return r;
  FieldValue fv;
  fv.field = name;
  fv.value = value_from(j.at("value"), parse_value_kind(j.at("kind").get<std::string>()));
  fv.raw_text = j.at("raw_text").get<std::string>();
  fv.unit_scale = j.at("unit_scale").get<std::int64_t>();
  if (!j.at("currency").is_null()) fv.currency = j["currency"].get<std::string>();
  for (const auto& jp : j.at("provenance")) {
    Provenance p;
    p.page_no = jp.at("page_no").get<int>();
    p.token_indices = jp.at("token_indices").get<std::vector<int>>();
    for (const auto& jt : jp.at("tokens")) {
      p.tokens.push_back({jt.at("index").get<int>(), jt.at("text").get<std::string>(),
                          jt.at("confidence").get<double>(), quad_from(jt.at("box"))});
    }
    fv.provenance.push_back(std::move(p));
  }
  if (!j.at("model_confidence").is_null()) fv.model_confidence = j["model_confidence"].get<double>();
  r.value = std::move(fv);
  return r;
}

}  // namespace

std::string to_json_line(const StructuredOutput& out) {
  ojson j;
  j["doc_id"] = out.doc_id;
  j["status"] = out.failed ? "failed" : "ok";
  j["error"] = opt_json(out.error);
  j["timestamp"] = out.timestamp;
  j["pipeline_version"] = out.pipeline_version;
  j["language"] = opt_json(out.language);
  j["sources"] = out.sources;
  j["n_pages"] = out.n_pages;
  j["retained_pages"] = out.retained_pages;
  j["reduction_ratio"] = out.reduction_ratio;
  ojson fields = ojson::object();
  for (const auto& f : out.fields) fields[f.field] = field_json(f);
  j["fields"] = fields;
  if (out.background_summary) {
    j["background_summary"] = {{"text", out.background_summary->text},
                               {"pages", out.background_summary->pages}};
  } else {
    j["background_summary"] = nullptr;
  }
  j["warnings"] = out.warnings;
  return j.dump();
}

StructuredOutput from_json_line(const std::string& line) {
  try {
    const ojson j = ojson::parse(line);
    StructuredOutput out;
    out.doc_id = j.at("doc_id").get<std::string>();
    out.failed = j.at("status").get<std::string>() == "failed";
    if (!j.at("error").is_null()) out.error = j["error"].get<std::string>();
    out.timestamp = j.value("timestamp", "");
    out.pipeline_version = j.value("pipeline_version", "");
    if (j.contains("language") && !j["language"].is_null()) out.language = j["language"].get<std::string>();
    out.sources = j.value("sources", std::vector<std::string>{});
    out.n_pages = j.value("n_pages", 0);
    out.retained_pages = j.value("retained_pages", std::vector<int>{});
    out.reduction_ratio = j.value("reduction_ratio", 0.0);
    for (const auto& [name, jf] : j.at("fields").items()) out.fields.push_back(field_from(name, jf));
    if (j.contains("background_summary") && !j["background_summary"].is_null()) {
      out.background_summary = BackgroundSummary{j["background_summary"].at("text").get<std::string>(),
                                                 j["background_summary"].at("pages").get<std::vector<int>>()};
    }
    out.warnings = j.value("warnings", std::vector<std::string>{});
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed result line (") + e.what() + "): " + excerpt(line));
  } catch (const NormalizationError& e) {
    throw InputError(std::string("malformed result value (") + e.what() + "): " + excerpt(line));
  }
}

std::vector<StructuredOutput> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open results file " + path.string());
  std::vector<StructuredOutput> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace finex
