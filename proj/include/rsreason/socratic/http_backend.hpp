#pragma once

// Chat-completions client for hosted models (OpenAI-style wire format).

#include <filesystem>
#include <string>

#include <httplib.h>

#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"
#include "rsreason/socratic/backend.hpp"

namespace rsreason::socratic {

struct HttpBackendConfig {
  std::string name;
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  double temperature = 0.7;
  std::string api_key;  // read from the environment by the caller
  int timeout_seconds = 120;
};

namespace detail {

inline std::string mime_for(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".tif" || ext == ".tiff") return "image/tiff";
  if (ext == ".webp") return "image/webp";
  return "image/jpeg";
}

// URLs and data URIs pass through; a readable local file is inlined as a
// data URI; anything else is forwarded untouched.
inline std::string image_url(const std::string& ref) {
  if (ref.starts_with("http://") || ref.starts_with("https://") || ref.starts_with("data:"))
    return ref;
  std::error_code ec;
  if (std::filesystem::is_regular_file(ref, ec)) {
    return "data:" + mime_for(ref) + ";base64," + httplib::detail::base64_encode(read_file(ref));
  }
  return ref;
}

}  // namespace detail

inline Json chat_request_body(const HttpBackendConfig& cfg, std::span<const Message> messages) {
  Json msgs = Json::array();
  for (const auto& m : messages) {
    if (m.image) {
      msgs.push_back(Json{
          {"role", m.role},
          {"content", Json::array({Json{{"type", "text"}, {"text", m.content}},
                                   Json{{"type", "image_url"},
                                        {"image_url", Json{{"url", detail::image_url(*m.image)}}}}})}});
    } else {
      msgs.push_back(Json{{"role", m.role}, {"content", m.content}});
    }
  }
  return Json{{"model", cfg.model}, {"temperature", cfg.temperature}, {"messages", std::move(msgs)}};
}

class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw InvalidInput(cfg_.name + ": backend URL is not configured");
  }

  std::string complete(std::span<const Message> messages) override {
    // One client per call keeps concurrent dialogues independent.
    httplib::Client cli(cfg_.base_url);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    const std::string body = io::dump(chat_request_body(cfg_, messages));
    auto res = cli.Post(cfg_.path, headers, body, "application/json");
    if (!res) throw BackendError(cfg_.name + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw BackendError(cfg_.name + ": HTTP " + std::to_string(res->status));
    try {
      const Json j = Json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw BackendError(cfg_.name + ": malformed completion response: " + e.what());
    }
  }

  [[nodiscard]] std::string name() const override { return cfg_.name; }

 private:
  HttpBackendConfig cfg_;
};

}  // namespace rsreason::socratic
