#include "finex/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "finex/error.hpp"
#include "json.hpp"

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace finex {

namespace {

ScaledDecimal amount_from_json(const json& j) {
  if (j.is_number_integer()) return ScaledDecimal(j.get<std::int64_t>());
  if (j.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", j.get<double>());
    return ScaledDecimal::parse_plain(buf);
  }
  if (j.is_string()) return ScaledDecimal::parse_plain(j.get<std::string>());
  throw InputError("amount must be a number");
}

}  // namespace

GroundTruth gold_from_json_line(const std::string& line) {
  GroundTruth g;
  try {
    const json j = json::parse(line);
    g.doc_id = j.at("doc_id").get<std::string>();
    for (const auto& field : scalar_field_names()) {
      if (!j.contains(field) || j[field].is_null()) {
        g.fields[field] = std::nullopt;
        continue;
      }
      const json& v = j[field];
      ExpectedValue e;
      if (field == "year") {
        e.value = v.get<std::int64_t>();
      } else if (field == "currency") {
        e.value = CurrencyCode{v.get<std::string>()};
        e.currency = v.get<std::string>();
      } else {
        e.value = amount_from_json(v.at("amount"));
        if (v.contains("currency") && !v["currency"].is_null()) e.currency = v["currency"].get<std::string>();
      }
      g.fields[field] = std::move(e);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed gold line (") + e.what() + "): " + excerpt(line));
  } catch (const NormalizationError& e) {
    throw InputError(std::string("malformed gold amount (") + e.what() + "): " + excerpt(line));
  }
  return g;
}

std::string gold_to_json_line(const GroundTruth& gold) {
  ojson j;
  j["doc_id"] = gold.doc_id;
  for (const auto& field : scalar_field_names()) {
    const auto it = gold.fields.find(field);
    if (it == gold.fields.end() || !it->second) {
      j[field] = nullptr;
      continue;
    }
    const auto& v = it->second->value;
    if (const auto* y = std::get_if<std::int64_t>(&v)) {
      j[field] = *y;
    } else if (const auto* c = std::get_if<CurrencyCode>(&v)) {
      j[field] = c->code;
    } else if (const auto* d = std::get_if<ScaledDecimal>(&v)) {
      ojson amount = d->exponent() == 0 ? ojson(d->mantissa()) : ojson(d->to_double());
      j[field] = {{"amount", amount},
                  {"currency", it->second->currency ? ojson(*it->second->currency) : ojson(nullptr)}};
    } else {
      j[field] = std::get<std::string>(v);
    }
  }
  return j.dump();
}

std::vector<GroundTruth> read_gold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open gold file " + path.string());
  std::vector<GroundTruth> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(gold_from_json_line(line));
  }
  return out;
}

Verdict field_match(const std::optional<FieldValue>& pred, const std::optional<ExpectedValue>& gold,
                    const std::string& field) {
  Verdict v;
  v.field = field;
  if (!gold) {
    v.match = !pred;
    v.detail = pred ? "gold reports no value, predicted " + describe(pred->value) : "both absent";
    return v;
  }
  if (!pred) {
    v.detail = "not found, expected " + describe(gold->value);
    return v;
  }
  const auto& p = pred->value;
  const auto& g = gold->value;
  const std::string shown = "predicted " + describe(p) + ", expected " + describe(g);
  if (const auto* gd = std::get_if<ScaledDecimal>(&g)) {
    const auto* pd = std::get_if<ScaledDecimal>(&p);
    if (!pd) {
      v.detail = "kind mismatch: " + shown;
      return v;
    }
    const double a = pd->to_double();
    const double b = gd->to_double();
    const bool close = std::abs(a - b) <= kMoneyRelTolerance * std::max(std::abs(a), std::abs(b));
    const bool cur_ok = !gold->currency || pred->currency == gold->currency;
    v.match = close && cur_ok;
    if (!close) {
      v.detail = "amount differs: " + shown;
    } else if (!cur_ok) {
      v.detail = "currency differs: predicted " + pred->currency.value_or("none") + ", expected " +
                 *gold->currency;
    } else {
      v.detail = "match";
    }
    return v;
  }
  v.match = p == g;
  v.detail = v.match ? "match" : shown;
  return v;
}

EvalReport accuracy(const std::vector<StructuredOutput>& preds,
                    const std::vector<GroundTruth>& golds) {
  if (golds.empty()) throw InputError("evaluation needs at least one gold document");
  std::map<std::string, const StructuredOutput*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.doc_id, &p).second) {
      throw InputError("duplicate prediction for document '" + p.doc_id + "'");
    }
  }
  std::set<std::string> gold_ids;
  for (const auto& g : golds) {
    if (!gold_ids.insert(g.doc_id).second) {
      throw InputError("duplicate gold row for document '" + g.doc_id + "'");
    }
  }

  EvalReport report;
  long long matched = 0;
  long long total = 0;
  for (const auto& g : golds) {
    DocEval d;
    const auto it = by_id.find(g.doc_id);
    const StructuredOutput* pred = it == by_id.end() ? nullptr : it->second;
    d.prediction_missing = pred == nullptr || pred->failed;
    for (const auto& field : scalar_field_names()) {
      const auto git = g.fields.find(field);
      const std::optional<ExpectedValue> gold = git == g.fields.end() ? std::nullopt : git->second;
      Verdict v;
      if (d.prediction_missing) {
        v.field = field;
        v.detail = pred ? "document failed" : "no prediction for document";
      } else {
        const FieldResult* r = pred->find(field);
        const std::optional<FieldValue> value = r ? r->value : std::nullopt;
        if (!value) ++report.not_found_count;
        v = field_match(value, gold, field);
      }
      d.matched += v.match ? 1 : 0;
      ++d.total;
      d.verdicts.push_back(std::move(v));
    }
    matched += d.matched;
    total += d.total;
    report.per_doc[g.doc_id] = std::move(d);
  }
  for (const auto& [id, p] : by_id) {
    if (!gold_ids.contains(id)) report.unmatched_predictions.push_back(id);
  }
  report.micro_accuracy = static_cast<double>(matched) / static_cast<double>(total);
  // summed in doc_id order so the result does not depend on input order
  double macro_sum = 0.0;
  for (const auto& [id, d] : report.per_doc) {
    macro_sum += static_cast<double>(d.matched) / static_cast<double>(d.total);
  }
  report.macro_accuracy = macro_sum / static_cast<double>(golds.size());
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  ojson j;
  j["micro_accuracy"] = report.micro_accuracy;
  j["macro_accuracy"] = report.macro_accuracy;
  j["not_found_count"] = report.not_found_count;
  j["unmatched_predictions"] = report.unmatched_predictions;
  ojson docs = ojson::object();
  for (const auto& [id, d] : report.per_doc) {
    ojson verdicts = ojson::array();
    for (const auto& v : d.verdicts) {
      verdicts.push_back({{"field", v.field}, {"match", v.match}, {"detail", v.detail}});
    }
    docs[id] = {{"matched", d.matched},
                {"total", d.total},
                {"prediction_missing", d.prediction_missing},
                {"verdicts", verdicts}};
  }
  j["per_doc"] = docs;
  return j.dump(2);
}

std::string eval_report_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "doc_id";
  for (const auto& f : scalar_field_names()) os << std::setw(11) << f;
  os << "score\n";
  for (const auto& [id, d] : report.per_doc) {
    os << std::setw(24) << id;
    for (const auto& v : d.verdicts) os << std::setw(11) << (v.match ? "ok" : "MISS");
    os << d.matched << "/" << d.total << "\n";
  }
  os << std::fixed << std::setprecision(4);
  os << "micro accuracy " << report.micro_accuracy << ", macro accuracy " << report.macro_accuracy
     << ", not found " << report.not_found_count << "\n";
  for (const auto& id : report.unmatched_predictions) os << "prediction without gold: " << id << "\n";
  return os.str();
}

void write_timing_log(const std::filesystem::path& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write timing log " + path.string());
  out << "doc_id,stage,seconds,pages\n";
  char buf[64];
  for (const auto& r : rows) {
    if (r.doc_id.find_first_of(",\"\n") != std::string::npos) {
      throw InputError("doc id '" + r.doc_id + "' cannot be written to the timing log");
    }
    std::snprintf(buf, sizeof buf, "%.17g", r.seconds);
    out << r.doc_id << ',' << r.stage << ',' << buf << ',' << r.pages << '\n';
  }
}

std::vector<TimingRow> read_timing_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open timing log " + path.string());
  std::vector<TimingRow> rows;
  std::string line;
  std::getline(in, line);
  if (line.rfind("doc_id,stage,seconds,pages", 0) != 0) {
    throw InputError(path.string() + ": missing timing log header");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TimingRow r;
    std::string seconds;
    std::string pages;
    if (!std::getline(ls, r.doc_id, ',') || !std::getline(ls, r.stage, ',') ||
        !std::getline(ls, seconds, ',') || !std::getline(ls, pages)) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    try {
      r.seconds = std::stod(seconds);
      r.pages = std::stoi(pages);
    } catch (const std::exception&) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

BenchMetrics bench(const std::vector<TimingRow>& rows, int device_count) {
  if (device_count < 1) throw InputError("device count must be >= 1");
  struct Doc {
    double latency = 0.0;
    int pages = 0;
    std::optional<int> retained;
  };
  std::map<std::string, Doc> docs;
  std::optional<double> wall;
  BenchMetrics m;
  m.device_count = device_count;
  for (const auto& r : rows) {
    if (r.doc_id == kRunRowId) {
      if (r.stage == kWallClockStage) wall = r.seconds;
      continue;
    }
    auto& d = docs[r.doc_id];
    d.latency += r.seconds;
    m.stage_seconds[r.stage] += r.seconds;
    if (r.stage == "preprocess") d.pages = r.pages;
    if (r.stage == "retrieval") d.retained = r.pages;
  }
  if (docs.empty()) throw InputError("timing log holds no documents");
  if (!wall || !(*wall > 0.0)) throw InputError("timing log lacks a positive wall-clock row");

  m.total_docs = static_cast<int>(docs.size());
  m.wall_clock_s = *wall;
  m.docs_per_hour_per_device = m.total_docs / (m.wall_clock_s / 3600.0) / device_count;

  double weighted = 0.0;
  double weights = 0.0;
  double ratio_sum = 0.0;
  int ratio_n = 0;
  for (const auto& [id, d] : docs) {
    m.total_pages += d.pages;
    if (d.pages > 0) {
      weighted += d.latency * (d.latency / d.pages);
      weights += d.latency;
      if (d.retained) {
        ratio_sum += 1.0 - static_cast<double>(*d.retained) / d.pages;
        ++ratio_n;
      }
    }
  }
  m.latency_s_per_page = weights > 0.0 ? weighted / weights : 0.0;
  m.mean_reduction_ratio = ratio_n > 0 ? ratio_sum / ratio_n : 0.0;
  return m;
}

std::string bench_json(const BenchMetrics& m) {
  ojson j;
  j["docs_per_hour_per_device"] = m.docs_per_hour_per_device;
  j["latency_s_per_page"] = m.latency_s_per_page;
  j["mean_reduction_ratio"] = m.mean_reduction_ratio;
  j["wall_clock_s"] = m.wall_clock_s;
  j["total_pages"] = m.total_pages;
  j["total_docs"] = m.total_docs;
  j["device_count"] = m.device_count;
  j["stage_seconds"] = m.stage_seconds;
  return j.dump(2);
}

std::string bench_table(const BenchMetrics& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "documents            " << m.total_docs << "\n";
  os << "pages                " << m.total_pages << "\n";
  os << "devices              " << m.device_count << "\n";
  os << "wall clock (s)       " << m.wall_clock_s << "\n";
  os << "docs/h/device        " << m.docs_per_hour_per_device << "\n";
  os << "latency (s/page)     " << m.latency_s_per_page << "\n";
  os << "mean reduction ratio " << m.mean_reduction_ratio << "\n";
  os << "stage breakdown (s, summed over documents)\n";
  for (const auto& [stage, s] : m.stage_seconds) {
    os << "  " << std::left << std::setw(18) << stage << std::right << s << "\n";
  }
  return os.str();
}

}  // namespace finex
