#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "finex/http.hpp"
#include "finex/image.hpp"

namespace finex {

struct VlmRequest {
  std::string prompt;
  std::vector<Image> images;
  int max_tokens = 512;
};

/// A vision-language model. generate() returns the raw reply text and must
/// be safe to call concurrently.
class VlmBackend {
 public:
  virtual ~VlmBackend() = default;
  virtual std::string generate(const VlmRequest& request) = 0;
};

// Wire format of POST /extract:
//   request  {"prompt": str, "images_png_b64": [str], "max_tokens": int}
//   response {"text": str}

std::string encode_vlm_request(const VlmRequest& request);
VlmRequest decode_vlm_request(const std::string& body);
std::string encode_vlm_response(const std::string& text);
std::string decode_vlm_response(const std::string& body);

class HttpVlmBackend : public VlmBackend {
 public:
  explicit HttpVlmBackend(HttpEndpoint endpoint) : client_(std::move(endpoint)) {}
  std::string generate(const VlmRequest& request) override;

 private:
  HttpJsonClient client_;
};

/// Replies chosen by substring rules: the first rule whose every `contains`
/// string occurs in the prompt wins, otherwise the default reply.
class ScriptedVlmBackend : public VlmBackend {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::string reply;
  };

  explicit ScriptedVlmBackend(std::vector<Rule> rules,
                              std::string default_reply = R"({"value": null})")
      : rules_(std::move(rules)), default_reply_(std::move(default_reply)) {}

  std::string generate(const VlmRequest& request) override;

  const std::vector<Rule>& rules() const { return rules_; }
  const std::string& default_reply() const { return default_reply_; }

  /// JSON: {"default": str, "rules": [{"contains": [str], "reply": str}]}
  static std::unique_ptr<ScriptedVlmBackend> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<Rule> rules_;
  std::string default_reply_;
};

}  // namespace finex
