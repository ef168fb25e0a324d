#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finex/document.hpp"
#include "finex/geometry.hpp"
#include "finex/image.hpp"

namespace finex {

inline constexpr int kUnassignedLine = -1;

struct OcrToken {
  std::string text;
  Quad box{};
  double confidence = 0.0;
  /// kUnassignedLine when the backend did not group tokens into lines
  int line_id = kUnassignedLine;
  std::optional<std::string> language;

  friend bool operator==(const OcrToken&, const OcrToken&) = default;
};

struct PageTranscript {
  int page_no = 0;
  std::vector<OcrToken> tokens;  // ordered by (line_id, leftmost x)
  std::string full_text;
  double mean_confidence = 0.0;

  friend bool operator==(const PageTranscript&, const PageTranscript&) = default;
};

/// Anything that turns a page raster into tokens. Implementations must be
/// safe for concurrent recognize() calls.
class OcrBackend {
 public:
  virtual ~OcrBackend() = default;
  /// Raw tokens in the coordinate system of `page`. May throw TransportError
  /// (retryable) or ProtocolError.
  virtual std::vector<OcrToken> recognize(const Image& page,
                                          const std::vector<std::string>& languages) = 0;
};

const std::vector<std::string>& default_ocr_languages();

/// Orders tokens, assigns missing line ids and derives full_text and
/// mean_confidence.
PageTranscript make_transcript(int page_no, std::vector<OcrToken> tokens);

/// Throws ProtocolError if a token has confidence outside [0,1], a
/// non-simple box, or corners outside a width x height page.
void validate_tokens(const std::vector<OcrToken>& tokens, int width, int height);

PageTranscript transcribe(OcrBackend& backend, const PageImage& page,
                          const std::vector<std::string>& languages);

/// Keeps tokens with confidence >= min_confidence.
PageTranscript filter_tokens(const PageTranscript& t, double min_confidence);

}  // namespace finex
