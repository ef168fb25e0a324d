#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "finex/document.hpp"
#include "finex/ocr.hpp"

namespace finex {

/// Lowercased terms. CJK runs become overlapping character bigrams (a lone
/// CJK character stays a unigram), digit runs and letter runs are separate
/// terms, everything else separates terms.
std::vector<std::string> tokenize(std::string_view text, std::string_view language = "en");

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  int page_no = 0;
  int tf = 0;
  friend bool operator==(const Posting&, const Posting&) = default;
};

/// Inverted index over the pages of one document. Immutable once built and
/// safe for concurrent queries.
class Bm25Index {
 public:
  Bm25Index() = default;

  /// Pages given as (page_no, terms). Throws IndexError on a repeated page.
  static Bm25Index from_terms(const std::vector<std::pair<int, std::vector<std::string>>>& pages,
                              Bm25Params params = {}, std::string doc_id = {});

  const std::string& doc_id() const { return doc_id_; }
  const Bm25Params& params() const { return params_; }
  /// term -> postings sorted by page_no
  const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
  const std::map<int, int>& page_lengths() const { return page_lengths_; }
  double avg_page_length() const { return avgdl_; }
  int n_pages() const { return static_cast<int>(page_lengths_.size()); }

  /// ln((N - n_t + 0.5) / (n_t + 0.5) + 1)
  double idf(const std::string& term) const;

  /// BM25 of `page_no` for the distinct terms of the query. Throws
  /// LookupError for a page that is not in the index.
  double score(const std::vector<std::string>& query_terms, int page_no) const;

  /// Scores of every indexed page, accumulated term-at-a-time from the
  /// postings. Pages without a hit score 0.
  std::map<int, double> score_all(const std::vector<std::string>& query_terms) const;

 private:
  double term_weight(double idf, int tf, int page_len) const;

  std::string doc_id_;
  Bm25Params params_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::map<int, int> page_lengths_;
  double avgdl_ = 0.0;
};

/// Indexes tokenize(full_text) of each transcript.
Bm25Index build_index(const std::vector<PageTranscript>& transcripts, Bm25Params params = {},
                      const std::string& doc_id = {}, std::string_view language = "en");

struct RetrievalResult {
  std::string field;
  /// descending score, ties by ascending page_no
  std::vector<std::pair<int, double>> ranked;
  std::vector<int> retained;
  /// 1 - |retained| / n_pages for this field alone
  double reduction_ratio = 0.0;
};

/// Distinct terms of the field's keywords for `language` (English fallback).
std::vector<std::string> field_query(const FieldSpec& field, const std::string& language);

/// Ranks every page; retains the top_k pages with a positive score.
/// Throws ConfigError when the field has no usable keyword.
RetrievalResult rank_pages(const Bm25Index& index, const FieldSpec& field,
                           const std::string& language, int top_k = 3);

struct PageSelection {
  std::vector<int> retained;  // ascending
  double reduction_ratio = 1.0;
  bool empty = true;
};

PageSelection select_document_pages(const std::vector<RetrievalResult>& results, int n_pages);

/// Field -> language -> keywords, from {"fields": {name: {lang: [kw]}}}.
/// Validates that every field resolves to at least one term for every
/// language in `languages`.
std::map<std::string, std::map<std::string, std::vector<std::string>>> load_keywords(
    const std::filesystem::path& path, const std::vector<std::string>& languages);

/// FieldSpecs for `names` in order, with keywords and default shapes.
std::vector<FieldSpec> make_field_specs(
    const std::vector<std::string>& names,
    const std::map<std::string, std::map<std::string, std::vector<std::string>>>& keywords,
    const std::vector<std::string>& languages);

}  // namespace finex
