#include "finex/ingest.hpp"

#include <algorithm>
#include <fstream>
#include "json.hpp"

#include "finex/codec.hpp"
#include "finex/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace finex {

namespace {

std::vector<fs::path> list_page_files(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && codec::is_image_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  if (ec) throw IngestionError("cannot list directory: " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

void append_source(const fs::path& path, std::vector<Image>& out) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& f : list_page_files(path)) {
      auto pages = codec::read_pages(f);
      std::move(pages.begin(), pages.end(), std::back_inserter(out));
    }
    return;
  }
  if (!fs::exists(path, ec)) throw IngestionError("cannot read " + path.string() + ": no such file");
  if (!codec::is_image_file(path)) {
    throw IngestionError("cannot read " + path.string() +
                         ": not a raster image (PNG, JPEG or TIFF expected)");
  }
  auto pages = codec::read_pages(path);
  std::move(pages.begin(), pages.end(), std::back_inserter(out));
}

}  // namespace

Document ingest_paths(const std::vector<fs::path>& paths, const std::string& doc_id,
                      std::optional<std::string> language_hint, const IngestOptions& opts) {
  std::vector<Image> images;
  for (const auto& p : paths) append_source(p, images);

  Document doc;
  doc.doc_id = doc_id;
  doc.language_hint = std::move(language_hint);
  doc.source_path = paths.empty() ? std::string() : paths.front().string();
  if (images.empty()) {
    throw EmptyDocumentError("document '" + doc_id + "' (" + doc.source_path + ") has no pages");
  }
  doc.pages.reserve(images.size());
  int page_no = 1;
  for (auto& img : images) {
    PageImage page;
    page.page_no = page_no++;
    page.image = opts.grayscale ? to_grayscale(img) : std::move(img);
    doc.pages.push_back(std::move(page));
  }
  return doc;
}

Document ingest(const fs::path& path, const std::string& doc_id, const IngestOptions& opts) {
  return ingest_paths({path}, doc_id, std::nullopt, opts);
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IngestionError("cannot read manifest: " + manifest.string());
  const fs::path base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry e;
    if (!j.contains("paths") || !j["paths"].is_array() || j["paths"].empty()) {
      throw InputError(manifest.string() + ":" + std::to_string(line_no) +
                       ": 'paths' must be a non-empty array");
    }
    for (const auto& p : j["paths"]) {
      fs::path path = p.get<std::string>();
      e.paths.push_back(path.is_relative() ? base / path : path);
    }
    if (j.contains("doc_id") && j["doc_id"].is_string()) {
      e.doc_id = j["doc_id"].get<std::string>();
    } else {
      e.doc_id = e.paths.front().stem().string();
    }
    if (j.contains("language_hint") && j["language_hint"].is_string()) {
      e.language_hint = j["language_hint"].get<std::string>();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const fs::path& manifest, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest);
  if (!out) throw Error("cannot write manifest: " + manifest.string());
  for (const auto& e : entries) {
    json j = json::object();
    j["doc_id"] = e.doc_id;
    j["paths"] = json::array();
    for (const auto& p : e.paths) j["paths"].push_back(p.string());
    j["language_hint"] = e.language_hint ? json(*e.language_hint) : json(nullptr);
    out << j.dump() << '\n';
  }
}

std::string DocIdAllocator::allocate(const std::string& wanted) {
  std::lock_guard lock(mu_);
  int& count = seen_[wanted];
  ++count;
  if (count == 1) return wanted;
  // keep probing in case "x-2" was itself requested explicitly
  for (int n = count;; ++n) {
    std::string candidate = wanted + "-" + std::to_string(n);
    if (seen_.find(candidate) == seen_.end()) {
      seen_[candidate] = 1;
      count = n;
      return candidate;
    }
  }
}

}  // namespace finex
