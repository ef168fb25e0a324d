#include "finex/ocr_http.hpp"

#include "finex/codec.hpp"
#include "finex/error.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace finex {

namespace {

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("body is not JSON (") + e.what() + "): " + excerpt(body));
  }
}

Quad box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ProtocolError("box must hold 4 points");
  Quad q{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ProtocolError("box point must be [x, y]");
    }
    q[i] = {p[0].get<double>(), p[1].get<double>()};
  }
  return q;
}

}  // namespace

std::string encode_ocr_request(const Image& page, const std::vector<std::string>& languages) {
  json j;
  j["image_png_b64"] = codec::base64_encode(codec::encode_png(page));
  j["languages"] = languages;
  return j.dump();
}

OcrRequest decode_ocr_request(const std::string& body) {
  const json j = parse_body(body);
  if (!j.is_object() || !j.contains("image_png_b64") || !j["image_png_b64"].is_string()) {
    throw ProtocolError("request lacks image_png_b64: " + excerpt(body));
  }
  if (!j.contains("languages") || !j["languages"].is_array()) {
    throw ProtocolError("request lacks languages: " + excerpt(body));
  }
  OcrRequest req;
  const auto bytes = codec::base64_decode(j["image_png_b64"].get<std::string>());
  req.image = codec::decode_png(bytes);
  for (const auto& l : j["languages"]) {
    if (!l.is_string()) throw ProtocolError("languages must be strings");
    req.languages.push_back(l.get<std::string>());
  }
  return req;
}

std::string encode_ocr_response(const std::vector<OcrToken>& tokens) {
  json arr = json::array();
  for (const auto& t : tokens) {
    json box = json::array();
    for (const auto& p : t.box) box.push_back({p.x, p.y});
    arr.push_back({{"text", t.text},
                   {"box", box},
                   {"confidence", t.confidence},
                   {"line_id", t.line_id},
                   {"language", t.language ? json(*t.language) : json(nullptr)}});
  }
  return json{{"tokens", arr}}.dump();
}

std::vector<OcrToken> decode_ocr_response(const std::string& body) {
  const json j = parse_body(body);
  if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array()) {
    throw ProtocolError("response lacks a tokens array: " + excerpt(body));
  }
  std::vector<OcrToken> tokens;
  tokens.reserve(j["tokens"].size());
  std::size_t i = 0;
  for (const auto& jt : j["tokens"]) {
    try {
      if (!jt.is_object()) throw ProtocolError("token is not an object");
      OcrToken t;
      if (!jt.contains("text") || !jt["text"].is_string()) throw ProtocolError("text missing");
      t.text = jt["text"].get<std::string>();
      if (!jt.contains("box")) throw ProtocolError("box missing");
      t.box = box_from_json(jt["box"]);
      if (!jt.contains("confidence") || !jt["confidence"].is_number()) {
        throw ProtocolError("confidence missing");
      }
      t.confidence = jt["confidence"].get<double>();
      if (jt.contains("line_id") && !jt["line_id"].is_null()) {
        if (!jt["line_id"].is_number_integer()) throw ProtocolError("line_id must be an integer");
        t.line_id = jt["line_id"].get<int>();
      }
      if (jt.contains("language") && !jt["language"].is_null()) {
        if (!jt["language"].is_string()) throw ProtocolError("language must be a string or null");
        t.language = jt["language"].get<std::string>();
      }
      tokens.push_back(std::move(t));
    } catch (const ProtocolError& e) {
      throw ProtocolError("token " + std::to_string(i) + ": " + e.what() + ": " +
                          excerpt(jt.dump()));
    }
    ++i;
  }
  return tokens;
}

std::vector<OcrToken> HttpOcrBackend::recognize(const Image& page,
                                                const std::vector<std::string>& languages) {
  return decode_ocr_response(client_.post("/ocr", encode_ocr_request(page, languages)));
}

}  // namespace finex
