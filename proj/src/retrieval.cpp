#include "finex/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "finex/error.hpp"
#include "finex/utf8.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace finex {

namespace {

enum class CharClass { separator, letter, digit, cjk };

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x3040 && c <= 0x30FF) ||
         (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0x20000 && c <= 0x2FA1F);
}

bool is_separator(char32_t c) {
  if (c < 0x80) return !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'));
  return (c >= 0x80 && c <= 0xBF) || c == 0xD7 || c == 0xF7 ||  // Latin-1 punctuation
         (c >= 0x2000 && c <= 0x206F) ||                        // general punctuation
         (c >= 0x20A0 && c <= 0x20CF) ||                        // currency symbols
         (c >= 0x2190 && c <= 0x2BFF) ||                        // arrows, math, boxes
         (c >= 0x3000 && c <= 0x303F) ||                        // CJK punctuation
         (c >= 0xFF00 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65) || c == 0xFFFD ||
         c == 0xFEFF;
}

CharClass classify(char32_t c) {
  if ((c >= '0' && c <= '9') || (c >= 0xFF10 && c <= 0xFF19)) return CharClass::digit;
  if (is_cjk(c)) return CharClass::cjk;
  if (is_separator(c)) return CharClass::separator;
  return CharClass::letter;
}

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x17F && c % 2 == 0 && c != 0x130 && c != 0x138) return c + 1;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0xFF21 && c <= 0xFF3A) return c - 0xFF21 + 'a';  // fullwidth Latin
  if (c >= 0xFF41 && c <= 0xFF5A) return c - 0xFF41 + 'a';
  if (c >= 0xFF10 && c <= 0xFF19) return c - 0xFF10 + '0';
  return c;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, std::string_view /*language*/) {
  std::vector<std::string> terms;
  const auto cps = utf8::decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    const CharClass cls = classify(cps[i]);
    std::size_t j = i + 1;
    while (j < cps.size() && classify(cps[j]) == cls) ++j;
    if (cls == CharClass::cjk) {
      if (j - i == 1) {
        terms.push_back(utf8::encode({cps[i]}));
      } else {
        for (std::size_t k = i; k + 1 < j; ++k) terms.push_back(utf8::encode({cps[k], cps[k + 1]}));
      }
    } else if (cls != CharClass::separator) {
      std::string term;
      for (std::size_t k = i; k < j; ++k) utf8::append(term, lower(cps[k]));
      terms.push_back(std::move(term));
    }
    i = j;
  }
  return terms;
}

Bm25Index Bm25Index::from_terms(
    const std::vector<std::pair<int, std::vector<std::string>>>& pages, Bm25Params params,
    std::string doc_id) {
  if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw ConfigError("BM25 needs k1 >= 0 and b in [0,1]");
  }
  Bm25Index idx;
  idx.doc_id_ = std::move(doc_id);
  idx.params_ = params;
  std::map<std::string, std::map<int, int>> tf;
  long long total = 0;
  for (const auto& [page_no, terms] : pages) {
    if (!idx.page_lengths_.emplace(page_no, static_cast<int>(terms.size())).second) {
      throw IndexError("page " + std::to_string(page_no) + " indexed twice");
    }
    total += static_cast<long long>(terms.size());
    for (const auto& t : terms) ++tf[t][page_no];
  }
  for (auto& [term, per_page] : tf) {
    auto& list = idx.postings_[term];
    list.reserve(per_page.size());
    for (const auto& [p, f] : per_page) list.push_back({p, f});
  }
  idx.avgdl_ = pages.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(pages.size());
  return idx;
}

double Bm25Index::idf(const std::string& term) const {
  const auto it = postings_.find(term);
  const double nt = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  const double n = static_cast<double>(page_lengths_.size());
  return std::log((n - nt + 0.5) / (nt + 0.5) + 1.0);
}

double Bm25Index::term_weight(double idf, int tf, int page_len) const {
  const double f = tf;
  const double len_norm = avgdl_ > 0.0 ? static_cast<double>(page_len) / avgdl_ : 0.0;
  return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * (1.0 - params_.b + params_.b * len_norm));
}

namespace {

std::vector<std::string> distinct(const std::vector<std::string>& terms) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

}  // namespace

double Bm25Index::score(const std::vector<std::string>& query_terms, int page_no) const {
  const auto len = page_lengths_.find(page_no);
  if (len == page_lengths_.end()) {
    throw LookupError("page " + std::to_string(page_no) + " is not in the index");
  }
  double s = 0.0;
  for (const auto& term : distinct(query_terms)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const auto& list = it->second;
    const auto p = std::lower_bound(list.begin(), list.end(), page_no,
                                    [](const Posting& a, int pn) { return a.page_no < pn; });
    if (p == list.end() || p->page_no != page_no) continue;
    s += term_weight(idf(term), p->tf, len->second);
  }
  return s;
}

std::map<int, double> Bm25Index::score_all(const std::vector<std::string>& query_terms) const {
  std::map<int, double> scores;
  for (const auto& [page, len] : page_lengths_) scores[page] = 0.0;
  for (const auto& term : distinct(query_terms)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) scores[p.page_no] += term_weight(w, p.tf, page_lengths_.at(p.page_no));
  }
  return scores;
}

Bm25Index build_index(const std::vector<PageTranscript>& transcripts, Bm25Params params,
                      const std::string& doc_id, std::string_view language) {
  std::vector<std::pair<int, std::vector<std::string>>> pages;
  pages.reserve(transcripts.size());
  for (const auto& t : transcripts) pages.emplace_back(t.page_no, tokenize(t.full_text, language));
  return Bm25Index::from_terms(pages, params, doc_id);
}

std::vector<std::string> field_query(const FieldSpec& field, const std::string& language) {
  std::vector<std::string> terms;
  for (const auto& kw : field.keywords_for(language)) {
    for (auto& t : tokenize(kw, language)) terms.push_back(std::move(t));
  }
  return distinct(terms);
}

RetrievalResult rank_pages(const Bm25Index& index, const FieldSpec& field,
                           const std::string& language, int top_k) {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  const auto query = field_query(field, language);
  if (query.empty()) {
    throw ConfigError("field '" + field.name + "' has no keywords for language '" + language + "'");
  }
  RetrievalResult r;
  r.field = field.name;
  for (const auto& [page, s] : index.score_all(query)) r.ranked.emplace_back(page, s);
  std::stable_sort(r.ranked.begin(), r.ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [page, s] : r.ranked) {
    if (static_cast<int>(r.retained.size()) >= top_k || !(s > 0.0)) break;
    r.retained.push_back(page);
  }
  const int n = index.n_pages();
  r.reduction_ratio =
      n == 0 ? 1.0 : 1.0 - static_cast<double>(r.retained.size()) / static_cast<double>(n);
  return r;
}

PageSelection select_document_pages(const std::vector<RetrievalResult>& results, int n_pages) {
  std::set<int> pages;
  for (const auto& r : results) pages.insert(r.retained.begin(), r.retained.end());
  PageSelection sel;
  sel.retained.assign(pages.begin(), pages.end());
  sel.empty = pages.empty();
  sel.reduction_ratio =
      n_pages <= 0 ? 1.0
                   : 1.0 - static_cast<double>(pages.size()) / static_cast<double>(n_pages);
  sel.reduction_ratio = std::clamp(sel.reduction_ratio, 0.0, 1.0);
  return sel;
}

std::map<std::string, std::map<std::string, std::vector<std::string>>> load_keywords(
    const std::filesystem::path& path, const std::vector<std::string>& languages) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open keyword file " + path.string());
  std::map<std::string, std::map<std::string, std::vector<std::string>>> out;
  try {
    const json j = json::parse(in);
    for (const auto& [field, langs] : j.at("fields").items()) {
      for (const auto& [lang, kws] : langs.items()) {
        out[field][lang] = kws.get<std::vector<std::string>>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad keyword file " + path.string() + ": " + e.what());
  }
  for (const auto& [field, langs] : out) {
    FieldSpec spec;
    spec.name = field;
    spec.keywords = langs;
    for (const auto& lang : languages) {
      if (field_query(spec, lang).empty()) {
        throw ConfigError("keyword file " + path.string() + ": field '" + field +
                          "' has no usable keywords for '" + lang + "' (nor an English fallback)");
      }
    }
  }
  return out;
}

std::vector<FieldSpec> make_field_specs(
    const std::vector<std::string>& names,
    const std::map<std::string, std::map<std::string, std::vector<std::string>>>& keywords,
    const std::vector<std::string>& languages) {
  std::vector<FieldSpec> specs;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) throw ConfigError("field '" + name + "' configured twice");
    FieldSpec spec = default_field_shape(name);
    const auto it = keywords.find(name);
    if (it == keywords.end()) throw ConfigError("no keywords configured for field '" + name + "'");
    spec.keywords = it->second;
    validate_field_spec(spec);
    for (const auto& lang : languages) {
      if (field_query(spec, lang).empty()) {
        throw ConfigError("field '" + name + "' has no usable keywords for '" + lang + "'");
      }
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace finex
