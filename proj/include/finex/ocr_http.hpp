#pragma once

#include <string>
#include <vector>

#include "finex/http.hpp"
#include "finex/image.hpp"
#include "finex/ocr.hpp"

namespace finex {

// Wire format of POST /ocr:
//   request  {"image_png_b64": str, "languages": [str]}
//   response {"tokens": [{"text": str, "box": [[x,y] x4], "confidence": float,
//                          "line_id": int, "language": str|null}]}

struct OcrRequest {
  Image image;
  std::vector<std::string> languages;
};

std::string encode_ocr_request(const Image& page, const std::vector<std::string>& languages);
/// Throws ProtocolError on malformed bodies.
OcrRequest decode_ocr_request(const std::string& body);

std::string encode_ocr_response(const std::vector<OcrToken>& tokens);
/// Throws ProtocolError (with a payload excerpt) on malformed bodies.
std::vector<OcrToken> decode_ocr_response(const std::string& body);

/// Client for an external OCR engine speaking the /ocr protocol.
class HttpOcrBackend : public OcrBackend {
 public:
  explicit HttpOcrBackend(HttpEndpoint endpoint) : client_(std::move(endpoint)) {}

  std::vector<OcrToken> recognize(const Image& page,
                                  const std::vector<std::string>& languages) override;

 private:
  HttpJsonClient client_;
};

}  // namespace finex
