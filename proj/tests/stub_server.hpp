#pragma once

// In-process reference server for the /ocr and /extract wire protocols.
// Behaves like the production adapter: malformed payloads get 400, oversized
// ones 413, requests beyond the concurrency limit 503 with Retry-After, and
// replies are cut to max_tokens whitespace-separated words. Extra knobs let
// tests inject transient failures, slow replies and malformed bodies.

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include "httplib.h"

#include "finex/ocr.hpp"
#include "finex/ocr_http.hpp"
#include "finex/vlm.hpp"

namespace finex::testkit {

class StubServer {
 public:
  StubServer(OcrBackend* ocr, VlmBackend* vlm) : ocr_(ocr), vlm_(vlm) {
    server_.Post("/ocr", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [this](const std::string& body) {
        const auto r = decode_ocr_request(body);
        auto tokens = ocr_ ? ocr_->recognize(r.image, r.languages) : std::vector<OcrToken>{};
        return encode_ocr_response(tokens);
      });
    });
    server_.Post("/extract", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [this](const std::string& body) {
        auto r = decode_vlm_request(body);
        if (r.images.empty()) throw ProtocolError("request carries no images");
        if (r.max_tokens < 1) throw ProtocolError("max_tokens must be positive");
        const std::string text = vlm_ ? vlm_->generate(r) : std::string(R"({"value": null})");
        return encode_vlm_response(truncate_words(text, r.max_tokens));
      });
    });
    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  // failure injection
  std::atomic<int> fail_next{0};        // answer 503 this many times
  std::atomic<int> retry_after_s{0};    // Retry-After sent with injected 503s (0: none)
  std::atomic<int> garbage_next{0};     // answer 200 with a non-JSON body this many times
  std::atomic<int> delay_ms{0};         // sleep before answering
  std::atomic<int> max_concurrent{64};  // beyond this, 503 + Retry-After: 1
  std::size_t max_body_bytes = 32u << 20;

  std::atomic<int> requests{0};
  std::atomic<int> peak_in_flight{0};

 private:
  template <class F>
  void handle(const httplib::Request& req, httplib::Response& res, F&& answer) {
    ++requests;
    const int now = ++in_flight_;
    for (int peak = peak_in_flight.load(); now > peak && !peak_in_flight.compare_exchange_weak(peak, now);) {
    }
    struct Leave {
      std::atomic<int>& n;
      ~Leave() { --n; }
    } leave{in_flight_};

    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms.load()));
    if (now > max_concurrent) {
      res.status = 503;
      res.set_header("Retry-After", "1");
      res.set_content("busy", "text/plain");
      return;
    }
    if (fail_next.fetch_sub(1) > 0) {
      res.status = 503;
      if (retry_after_s > 0) res.set_header("Retry-After", std::to_string(retry_after_s.load()));
      res.set_content("transient failure", "text/plain");
      return;
    }
    fail_next.store(std::max(fail_next.load(), 0));
    if (garbage_next.fetch_sub(1) > 0) {
      res.set_content("<html>not json</html>", "text/html");
      return;
    }
    garbage_next.store(std::max(garbage_next.load(), 0));
    if (req.body.size() > max_body_bytes) {
      res.status = 413;
      res.set_content("payload too large", "text/plain");
      return;
    }
    try {
      res.set_content(answer(req.body), "application/json");
    } catch (const ProtocolError& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(e.what(), "text/plain");
    }
  }

  static std::string truncate_words(const std::string& text, int max_words) {
    std::istringstream in(text);
    std::string word, out;
    for (int n = 0; n < max_words && in >> word; ++n) {
      if (!out.empty()) out += ' ';
      out += word;
    }
    return in >> word ? out : text;
  }

  OcrBackend* ocr_;
  VlmBackend* vlm_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> in_flight_{0};
};

}  // namespace finex::testkit
