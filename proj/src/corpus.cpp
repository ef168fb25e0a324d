#include "finex/corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "finex/codec.hpp"
#include "finex/error.hpp"
#include "finex/ingest.hpp"
#include "finex/kernels.hpp"
#include "finex/preprocess.hpp"
#include "json.hpp"

using ojson = nlohmann::ordered_json;

namespace finex::synthetic {

namespace {

template <class T, std::size_t N>
const T& pick(const std::array<T, N>& xs, Rng& rng) {
  return xs[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(N) - 1))];
}

// Keyword-free vocabulary for filler pages. None of these words (or, for
// Chinese, none of their character bigrams) occur in config/keywords.json.
constexpr std::array<const char*, 40> kFillerEn = {
    "operations", "board",     "governance", "employees",  "sustainability", "committee",
    "meeting",    "strategy",  "customers",  "market",     "network",        "digital",
    "branch",     "training",  "safety",     "environment", "community",     "programme",
    "policy",     "review",    "members",    "directors",  "regional",       "growth",
    "quality",    "service",   "technology", "investment", "compliance",     "audit",
    "innovation", "brand",     "channels",   "logistics",  "research",       "partners",
    "capital",    "risk",      "controls",   "suppliers"};
constexpr std::array<const char*, 32> kFillerId = {
    "operasional", "karyawan",  "direksi",   "komisaris", "tata",      "kelola",   "risiko",
    "pelanggan",   "jaringan",  "cabang",    "pelatihan", "keselamatan", "lingkungan",
    "komunitas",   "program",   "kebijakan", "strategi",  "teknologi", "layanan",  "kualitas",
    "wilayah",     "pertumbuhan", "investasi", "digital",  "rapat",     "anggota",  "kepatuhan",
    "inovasi",     "merek",     "logistik",  "riset",     "mitra"};
constexpr std::array<const char*, 24> kFillerZh = {
    "董事会", "员工", "治理", "风险", "客户", "网络", "培训", "安全",
    "环境",   "社区", "战略", "技术", "服务", "质量", "投资", "数字化",
    "会议",   "委员会", "合规", "审计", "创新", "品牌", "渠道", "物流"};

constexpr std::array<const char*, 8> kNamesEn = {"Northwind", "Harbourline", "Crestfield", "Bluegate",
                                                 "Summitview", "Lakeshore", "Ironbridge", "Redwood"};
constexpr std::array<const char*, 8> kNamesId = {"Sentosa", "Nusantara", "Cahaya", "Samudra",
                                                 "Gemilang", "Mandiri", "Lestari", "Sejahtera"};
constexpr std::array<const char*, 8> kNamesZh = {"华信", "东方", "长江", "恒通", "明达", "新源", "嘉和", "瑞丰"};
constexpr std::array<const char*, 6> kCitiesEn = {"Singapore", "London", "Sydney", "Toronto", "Dublin", "Auckland"};
constexpr std::array<const char*, 6> kCitiesId = {"Jakarta", "Surabaya", "Bandung", "Medan", "Semarang", "Makassar"};
constexpr std::array<const char*, 6> kCitiesZh = {"上海", "深圳", "杭州", "南京", "成都", "武汉"};

std::string grouped(std::int64_t v, char sep) {
  std::string digits = std::to_string(v);
  std::string out;
  const int n = static_cast<int>(digits.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out.push_back(sep);
    out.push_back(digits[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Amount as printed in the statement. `tenths` is used when the statement
// reports one decimal (millions).
std::string printed_amount(std::int64_t tenths, bool one_decimal, const std::string& language) {
  const char group = language == "id" ? '.' : ',';
  const char decimal = language == "id" ? ',' : '.';
  if (!one_decimal) return grouped(tenths / 10, group);
  return grouped(tenths / 10, group) + decimal + std::to_string(tenths % 10);
}

std::string padded(int v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", width, v);
  return buf;
}

LineSpec words(std::initializer_list<std::string> ws) {
  LineSpec line;
  for (const auto& w : ws) line.push_back({w, 0.97});
  return line;
}

std::vector<LineSpec> filler_lines(const std::string& language, Rng& rng) {
  std::vector<LineSpec> lines;
  const int n = static_cast<int>(rng.uniform(8, 12));
  for (int i = 0; i < n; ++i) {
    LineSpec line;
    const int nw = static_cast<int>(rng.uniform(3, 6));
    for (int w = 0; w < nw; ++w) {
      std::string word;
      if (rng.uniform(0, 9) == 0) {
        word = std::to_string(rng.uniform(1, 99)) + (rng.uniform(0, 1) ? "%" : "");
      } else if (language == "id") {
        word = pick(kFillerId, rng);
      } else if (language == "zh") {
        word = pick(kFillerZh, rng);
      } else {
        word = pick(kFillerEn, rng);
      }
      // a few smudged words to exercise the confidence filters
      line.push_back({word, rng.uniform(0, 19) == 0 ? 0.35 : rng.uniform_real(0.85, 0.99)});
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

// unit_scale 0: the model does not state one
std::string reply_json(const ojson& value, int page_no, const std::string& quote,
                       std::int64_t unit_scale = 0) {
  ojson j;
  j["value"] = value;
  j["unit_scale"] = unit_scale != 0 ? ojson(unit_scale) : ojson(nullptr);
  j["currency"] = nullptr;
  j["page_no"] = page_no;
  j["quote"] = quote;
  j["confidence"] = 0.9;
  return j.dump();
}

std::string target(const std::string& field) { return "Target field: " + field; }

}  // namespace

PlannedDocument plan_document(int index, const std::string& language, int n_pages, Rng& rng) {
  if (n_pages < 5) throw InputError("a planned report needs at least 5 pages");
  if (language != "en" && language != "id" && language != "zh") {
    throw InputError("no synthetic text for language '" + language + "'");
  }
  PlannedDocument d;
  d.doc_id = "rpt-" + padded(index + 1, 4);
  d.language = language;
  d.language_hint = language == "en" ? "en-SG" : language == "id" ? "id-ID" : "zh-CN";
  d.marker = "ref:" + padded(index + 1, 5);

  const bool en = language == "en", id = language == "id";
  const std::string name = en ? pick(kNamesEn, rng) : id ? pick(kNamesId, rng) : pick(kNamesZh, rng);
  const std::string city = en ? pick(kCitiesEn, rng) : id ? pick(kCitiesId, rng) : pick(kCitiesZh, rng);
  const std::string company = en ? name + " Holdings" : id ? "PT " + name + " Tbk" : name + "集团";
  const std::string currency = en ? (rng.uniform(0, 1) ? "USD" : "SGD") : id ? "IDR" : "CNY";
  const int year = static_cast<int>(rng.uniform(2015, 2023));
  const int founded = static_cast<int>(rng.uniform(1950, 1999));
  const bool millions = rng.uniform(0, 2) == 0;
  const std::int64_t scale = millions ? 1000000 : 1000;
  const bool has_dividends = rng.uniform(0, 4) != 0;
  const bool reply_scale = rng.uniform(0, 2) == 0;

  // statement figures in tenths of the printed unit; whole units unless the
  // statement prints a decimal
  auto snap = [&](std::int64_t tenths) { return millions ? tenths : tenths / 10 * 10; };
  const std::int64_t revenue = millions ? rng.uniform(10000, 99999) : 10 * rng.uniform(1000000, 9999999);
  const std::int64_t cost = snap(revenue * rng.uniform(50, 70) / 100);
  const std::int64_t net = snap(revenue * rng.uniform(5, 20) / 100);
  const std::int64_t pbt = snap(net * 5 / 4);
  const std::int64_t tax = pbt - net;
  const std::int64_t dividends = snap(net * rng.uniform(30, 50) / 100);
  auto raw = [&](std::int64_t tenths) { return printed_amount(tenths, millions, language); };
  auto amount = [&](std::int64_t tenths) { return ScaledDecimal(tenths * (scale / 10)); };

  // pages: cover first, the other planted pages at random distinct positions
  std::vector<int> slots;
  for (int p = 2; p <= n_pages; ++p) slots.push_back(p);
  for (std::size_t i = slots.size(); i > 1; --i) {
    std::swap(slots[i - 1], slots[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
  }
  const int income_page = slots[0], dividend_page = slots[1], background_page = slots[2];
  d.field_pages = {{"year", 1}, {"currency", 1}, {"revenue", income_page}, {"profit", income_page},
                   {"background_summary", background_page}};
  if (has_dividends) d.field_pages["dividends"] = dividend_page;

  LineSpec unit_line;
  if (en) {
    unit_line = millions ? words({"Amounts", "in", currency, "millions"}) : words({"Amounts", "in", currency + "'000"});
  } else if (id) {
    unit_line = words({"(dalam", millions ? "juta" : "ribuan", "Rupiah)"});
  } else {
    unit_line = words({millions ? "单位：人民币百万元" : "单位：人民币千元"});
  }

  const std::string y = std::to_string(year);
  const std::string currency_word = en ? currency : id ? "Rupiah" : "人民币";
  std::string currency_phrase;
  d.pages.resize(static_cast<std::size_t>(n_pages));
  for (int p = 1; p <= n_pages; ++p) {
    auto& page = d.pages[static_cast<std::size_t>(p - 1)];
    page.language = language;
    page.lines.push_back(words({d.marker, company}));
    if (p == 1) {
      if (en) {
        page.lines.push_back(words({"Annual", "Report", y}));
        page.lines.push_back(words({"Fiscal", "year", "ended", "31", "December", y}));
        page.lines.push_back(words({"Reporting", "currency:", currency_word}));
        currency_phrase = "currency: " + currency_word;
      } else if (id) {
        page.lines.push_back(words({"Laporan", "Tahunan", y}));
        page.lines.push_back(words({"Tahun", "buku", "berakhir", "31", "Desember", y}));
        page.lines.push_back(words({"Mata", "uang", "pelaporan:", currency_word}));
        currency_phrase = "pelaporan: " + currency_word;
      } else {
        page.lines.push_back(words({y, "年度报告"}));
        page.lines.push_back(words({"财政年度", y}));
        page.lines.push_back(words({"报告货币", currency_word}));
        currency_phrase = "报告货币 " + currency_word;
      }
    } else if (p == income_page) {
      if (en) {
        page.lines.push_back(words({"Consolidated", "Statement", "of", "Comprehensive", "Income"}));
        page.lines.push_back(unit_line);
        page.lines.push_back(words({"Total", "revenue", raw(revenue)}));
        page.lines.push_back(words({"Cost", "of", "sales", raw(cost)}));
        page.lines.push_back(words({"Profit", "before", "tax", raw(pbt)}));
        page.lines.push_back(words({"Income", "tax", "expense", raw(tax)}));
        page.lines.push_back(words({"Net", "profit", "for", "the", "year", raw(net)}));
      } else if (id) {
        page.lines.push_back(words({"Laporan", "Laba", "Rugi", "Konsolidasian"}));
        page.lines.push_back(unit_line);
        page.lines.push_back(words({"Pendapatan", "usaha", raw(revenue)}));
        page.lines.push_back(words({"Beban", "pokok", "pendapatan", raw(cost)}));
        page.lines.push_back(words({"Laba", "sebelum", "pajak", raw(pbt)}));
        page.lines.push_back(words({"Beban", "pajak", raw(tax)}));
        page.lines.push_back(words({"Laba", "bersih", "tahun", "berjalan", raw(net)}));
      } else {
        page.lines.push_back(words({"合并利润表"}));
        page.lines.push_back(unit_line);
        page.lines.push_back(words({"营业收入", raw(revenue)}));
        page.lines.push_back(words({"营业成本", raw(cost)}));
        page.lines.push_back(words({"利润总额", raw(pbt)}));
        page.lines.push_back(words({"所得税费用", raw(tax)}));
        page.lines.push_back(words({"净利润", raw(net)}));
      }
    } else if (p == dividend_page && has_dividends) {
      if (en) {
        page.lines.push_back(words({"Dividends"}));
        page.lines.push_back(unit_line);
        page.lines.push_back(words({"Cash", "dividends", "declared", raw(dividends)}));
      } else if (id) {
        page.lines.push_back(words({"Dividen"}));
        page.lines.push_back(unit_line);
        page.lines.push_back(words({"Dividen", "tunai", "dibagikan", raw(dividends)}));
      } else {
        page.lines.push_back(words({"股息"}));
        page.lines.push_back(unit_line);
        page.lines.push_back(words({"现金股利", raw(dividends)}));
      }
    } else if (p == background_page) {
      if (en) {
        page.lines.push_back(words({"Company", "background"}));
        page.lines.push_back(words({company, "was", "founded", "in", std::to_string(founded)}));
        page.lines.push_back(words({"and", "is", "headquartered", "in", city}));
        page.lines.push_back(words({"History", "of", "steady", "expansion"}));
      } else if (id) {
        page.lines.push_back(words({"Profil", "Perusahaan"}));
        page.lines.push_back(words({"Perseroan", "didirikan", "pada", std::to_string(founded)}));
        page.lines.push_back(words({"berkantor", "pusat", "di", city}));
        page.lines.push_back(words({"Sejarah", "ekspansi", "stabil"}));
      } else {
        page.lines.push_back(words({"公司简介"}));
        page.lines.push_back(words({"本集团", "成立于", std::to_string(founded), "总部位于", city}));
        page.lines.push_back(words({"历史", "悠久"}));
      }
    }
    for (auto& line : filler_lines(language, rng)) {
      if (page.lines.size() >= 14) break;
      page.lines.push_back(std::move(line));
    }
  }

  // gold
  d.gold.doc_id = d.doc_id;
  auto money = [&](std::int64_t tenths) { return ExpectedValue{amount(tenths), currency}; };
  d.gold.fields["year"] = ExpectedValue{std::int64_t{year}, std::nullopt};
  d.gold.fields["currency"] = ExpectedValue{CurrencyCode{currency}, currency};
  d.gold.fields["revenue"] = money(revenue);
  d.gold.fields["profit"] = money(net);
  d.gold.fields["dividends"] = has_dividends ? std::optional(money(dividends)) : std::nullopt;

  // scripted replies; each rule needs text that only the right page carries
  const std::int64_t hinted = reply_scale ? scale : 0;
  d.rules.push_back({{target("year"), d.marker, y}, reply_json(y, 1, y)});
  d.rules.push_back({{target("currency"), d.marker, currency_phrase}, reply_json(currency_word, 1, currency_word)});
  d.rules.push_back({{target("revenue"), d.marker, raw(revenue)},
                     reply_json(raw(revenue), income_page, raw(revenue), hinted)});
  d.rules.push_back({{target("profit"), d.marker, raw(net)}, reply_json(raw(net), income_page, raw(net), hinted)});
  if (has_dividends) {
    d.rules.push_back({{target("dividends"), d.marker, raw(dividends)},
                       reply_json(raw(dividends), dividend_page, raw(dividends), hinted)});
  }
  const std::string summary = en ? company + " was founded in " + std::to_string(founded) +
                                       " and is headquartered in " + city + "."
                              : id ? company + " didirikan pada " + std::to_string(founded) +
                                         " dan berkantor pusat di " + city + "."
                                   : company + "成立于" + std::to_string(founded) + "年，总部位于" + city + "。";
  d.rules.push_back({{target("background_summary"), d.marker, std::to_string(founded)},
                     reply_json(summary, background_page, std::to_string(founded))});
  return d;
}

std::vector<PageTranscript> plain_transcripts(const PlannedDocument& doc) {
  std::vector<PageTranscript> out;
  for (std::size_t p = 0; p < doc.pages.size(); ++p) {
    std::vector<OcrToken> tokens;
    int line_no = 0;
    for (const auto& line : doc.pages[p].lines) {
      double x = 10.0;
      for (const auto& w : line) {
        OcrToken t;
        t.text = w.text;
        t.confidence = w.confidence;
        t.line_id = line_no;
        t.box = quad_from_box(x, 10.0 + 20.0 * line_no, x + 8.0 * static_cast<double>(w.text.size()),
                              26.0 + 20.0 * line_no);
        t.language = doc.pages[p].language;
        x += 8.0 * static_cast<double>(w.text.size()) + 6.0;
        tokens.push_back(std::move(t));
      }
      ++line_no;
    }
    out.push_back(make_transcript(static_cast<int>(p) + 1, std::move(tokens)));
  }
  return out;
}

CorpusFiles write_corpus(const std::filesystem::path& dir, const CorpusOptions& opts) {
  namespace fs = std::filesystem;
  if (opts.documents < 1) throw InputError("corpus needs at least one document");
  if (opts.min_pages < 5 || opts.max_pages < opts.min_pages) throw InputError("need 5 <= min_pages <= max_pages");
  if (opts.languages.empty()) throw InputError("corpus needs at least one language");
  if (opts.resources.empty() || !fs::exists(opts.resources / "keywords.json")) {
    throw ConfigError("resource directory lacks keywords.json: " + opts.resources.string());
  }
  fs::create_directories(dir / "docs");
  Rng rng(opts.seed);
  SyntheticOcrBackend ocr;
  CorpusFiles files;
  std::vector<ManifestEntry> manifest;
  std::uint32_t next_page_id = 1;
  RenderStyle style;
  style.noise = opts.noise;

  for (int i = 0; i < opts.documents; ++i) {
    const auto& lang = opts.languages[static_cast<std::size_t>(i) % opts.languages.size()];
    const int n = static_cast<int>(rng.uniform(opts.min_pages, opts.max_pages));
    PlannedDocument d = plan_document(i, lang, n, rng);
    const fs::path doc_dir = dir / "docs" / d.doc_id;
    fs::create_directories(doc_dir);
    for (int p = 0; p < n; ++p) {
      auto& spec = d.pages[static_cast<std::size_t>(p)];
      spec.page_id = next_page_id++;
      RenderedPage r = render_page(spec, style);
      ocr.add_page(r.layout);
      Image img = rotate(r.image, rng.uniform_real(-opts.max_skew_deg, opts.max_skew_deg));
      if (rng.uniform_real(0.0, 1.0) < opts.coarse_probability) {
        img = kernels::rotate_quarter_turns(img, -static_cast<int>(rng.uniform(1, 3)));
      }
      codec::write_png(doc_dir / ("page-" + padded(p + 1, 3) + ".png"), img);
    }
    manifest.push_back({d.doc_id, {fs::path("docs") / d.doc_id}, d.language_hint});
    files.documents.push_back(std::move(d));
  }

  files.manifest = dir / "manifest.jsonl";
  files.gold = dir / "gold.jsonl";
  files.ocr_corpus = dir / "ocr_corpus.json";
  files.vlm_script = dir / "vlm_script.json";
  files.config = dir / "config.json";

  write_manifest(files.manifest, manifest);
  {
    std::ofstream g(files.gold);
    for (const auto& d : files.documents) g << gold_to_json_line(d.gold) << '\n';
    if (!g) throw Error("cannot write " + files.gold.string());
  }
  ocr.save(files.ocr_corpus);
  std::vector<ScriptedVlmBackend::Rule> rules;
  for (const auto& d : files.documents) rules.insert(rules.end(), d.rules.begin(), d.rules.end());
  ScriptedVlmBackend(std::move(rules)).save(files.vlm_script);

  ojson cfg;
  cfg["keywords"] = fs::absolute(opts.resources / "keywords.json").string();
  cfg["templates"] = fs::absolute(opts.resources / "templates").string();
  cfg["workers"] = opts.workers;
  cfg["ocr"] = {{"backend", "synthetic"}, {"corpus", "ocr_corpus.json"}};
  cfg["vlm"] = {{"backend", "scripted"}, {"script", "vlm_script.json"}};
  cfg["retry"] = {{"max_attempts", 2}, {"initial_backoff_s", 0.01}, {"max_backoff_s", 0.05}};
  cfg["output"] = {{"timestamp", "2024-01-01T00:00:00Z"}};
  std::ofstream(files.config) << cfg.dump(2) << '\n';
  return files;
}

}  // namespace finex::synthetic
