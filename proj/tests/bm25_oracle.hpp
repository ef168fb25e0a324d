#pragma once

// Brute-force BM25: loops over every (term, page) pair with no inverted
// index. Used as the oracle for Bm25Index.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace finex::testkit {

using PageTerms = std::vector<std::pair<int, std::vector<std::string>>>;

inline double brute_force_bm25(const PageTerms& pages, const std::vector<std::string>& query, int page_no,
                               double k1, double b) {
  const double n = static_cast<double>(pages.size());
  double total_len = 0;
  for (const auto& [no, terms] : pages) total_len += static_cast<double>(terms.size());
  const double avgdl = n > 0 ? total_len / n : 0.0;

  const std::vector<std::string>* doc = nullptr;
  for (const auto& [no, terms] : pages)
    if (no == page_no) doc = &terms;
  if (doc == nullptr) return 0.0;

  double score = 0.0;
  const std::set<std::string> distinct(query.begin(), query.end());
  for (const auto& t : distinct) {
    double df = 0;
    for (const auto& [no, terms] : pages)
      if (std::find(terms.begin(), terms.end(), t) != terms.end()) df += 1;
    const double f = static_cast<double>(std::count(doc->begin(), doc->end(), t));
    if (f == 0) continue;
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    const double len = static_cast<double>(doc->size());
    const double norm = avgdl > 0 ? len / avgdl : 0.0;
    score += idf * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * norm));
  }
  return score;
}

}  // namespace finex::testkit
