#include "finex/vlm.hpp"

#include <fstream>

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

}  // namespace

std::string encode_vlm_request(const VlmRequest& request) {
  json images = json::array();
  for (const auto& img : request.images) {
    images.push_back(codec::base64_encode(codec::encode_png(img)));
  }
  return json{{"prompt", request.prompt},
              {"images_png_b64", images},
              {"max_tokens", request.max_tokens}}
      .dump();
}

VlmRequest decode_vlm_request(const std::string& body) {
  const json j = parse_body(body);
  if (!j.is_object() || !j.contains("prompt") || !j["prompt"].is_string()) {
    throw ProtocolError("request lacks prompt: " + excerpt(body));
  }
  if (!j.contains("images_png_b64") || !j["images_png_b64"].is_array()) {
    throw ProtocolError("request lacks images_png_b64: " + excerpt(body));
  }
  if (!j.contains("max_tokens") || !j["max_tokens"].is_number_integer()) {
    throw ProtocolError("request lacks integer max_tokens: " + excerpt(body));
  }
  VlmRequest req;
  req.prompt = j["prompt"].get<std::string>();
  req.max_tokens = j["max_tokens"].get<int>();
  for (const auto& b : j["images_png_b64"]) {
    if (!b.is_string()) throw ProtocolError("images_png_b64 entries must be strings");
    req.images.push_back(codec::decode_png(codec::base64_decode(b.get<std::string>())));
  }
  return req;
}

std::string encode_vlm_response(const std::string& text) { return json{{"text", text}}.dump(); }

std::string decode_vlm_response(const std::string& body) {
  const json j = parse_body(body);
  if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
    throw ProtocolError("response lacks text: " + excerpt(body));
  }
  return j["text"].get<std::string>();
}

std::string HttpVlmBackend::generate(const VlmRequest& request) {
  return decode_vlm_response(client_.post("/extract", encode_vlm_request(request)));
}

std::string ScriptedVlmBackend::generate(const VlmRequest& request) {
  for (const auto& rule : rules_) {
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (request.prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return rule.reply;
  }
  return default_reply_;
}

std::unique_ptr<ScriptedVlmBackend> ScriptedVlmBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open VLM script " + path.string());
  json j;
  try {
    j = json::parse(in);
    std::vector<Rule> rules;
    for (const auto& jr : j.at("rules")) {
      rules.push_back({jr.at("contains").get<std::vector<std::string>>(),
                       jr.at("reply").get<std::string>()});
    }
    std::string def = j.value("default", std::string(R"({"value": null})"));
    return std::make_unique<ScriptedVlmBackend>(std::move(rules), std::move(def));
  } catch (const json::exception& e) {
    throw ConfigError("bad VLM script " + path.string() + ": " + e.what());
  }
}

void ScriptedVlmBackend::save(const std::filesystem::path& path) const {
  json rules = json::array();
  for (const auto& r : rules_) rules.push_back({{"contains", r.contains}, {"reply", r.reply}});
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << json{{"default", default_reply_}, {"rules", rules}}.dump(2) << '\n';
}

}  // namespace finex
