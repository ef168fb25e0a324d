#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ranges>
#include <string>
#include <vector>

#include "finex/document.hpp"

namespace finex {

struct IngestOptions {
  /// Convert RGB pages to gray on load.
  bool grayscale = false;
};

/// Loads a document from one source: an image file (multi-page TIFF allowed)
/// or a directory whose image files are taken in lexicographic name order.
/// Throws IngestionError naming the path, EmptyDocumentError on zero pages.
Document ingest(const std::filesystem::path& path, const std::string& doc_id,
                const IngestOptions& opts = {});

/// Concatenates the pages of several sources into one document.
Document ingest_paths(const std::vector<std::filesystem::path>& paths, const std::string& doc_id,
                      std::optional<std::string> language_hint, const IngestOptions& opts = {});

/// Pages in ascending page_no. The view borrows from `doc`.
inline auto split_pages(const Document& doc) {
  return std::views::all(doc.pages);
}

struct ManifestEntry {
  std::string doc_id;
  std::vector<std::filesystem::path> paths;
  std::optional<std::string> language_hint;
};

/// Reads a JSON-lines manifest; relative paths resolve against the
/// manifest's directory. Missing doc_ids default to the first path's stem.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries);

/// Hands out unique doc ids within one run: "report", "report-2", ...
class DocIdAllocator {
 public:
  std::string allocate(const std::string& wanted);

 private:
  std::mutex mu_;
  std::map<std::string, int> seen_;
};

}  // namespace finex
