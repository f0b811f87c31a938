#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "rsreason/socratic/http_backend.hpp"
#include "tmpdir.hpp"

using namespace rsreason;
using namespace rsreason::socratic;

namespace {

// Minimal chat-completions stand-in that echoes what it was sent.
class FakeChatServer {
 public:
  FakeChatServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      const Json j = Json::parse(req.body);
      if (j["model"] == "broken") {
        res.status = 503;
        return;
      }
      if (j["model"] == "garbled") {
        res.set_content("{\"choices\": []}", "application/json");
        return;
      }
      const std::string reply = "echo: " + j["messages"].back()["content"].dump();
      res.set_content(io::dump(Json{{"choices", Json::array({Json{
                                                   {"message", Json{{"role", "assistant"},
                                                                    {"content", reply}}}}})}}),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }

  [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpBackendConfig config(const FakeChatServer& s, const std::string& model) {
  HttpBackendConfig c;
  c.name = "reasoner";
  c.base_url = s.url();
  c.model = model;
  c.api_key = "sk-test";
  c.timeout_seconds = 5;
  return c;
}

}  // namespace

TEST(ChatRequestBody, TextAndImageMessages) {
  HttpBackendConfig cfg;
  cfg.model = "m";
  cfg.temperature = 0.2;
  const std::vector<Message> msgs{{"system", "sys", std::nullopt},
                                  {"user", "What is this?", "https://example.org/a.png"}};
  const Json j = chat_request_body(cfg, msgs);
  EXPECT_EQ(j["model"], "m");
  EXPECT_EQ(j["messages"][0], (Json{{"role", "system"}, {"content", "sys"}}));
  EXPECT_EQ(j["messages"][1]["content"][0]["text"], "What is this?");
  EXPECT_EQ(j["messages"][1]["content"][1]["image_url"]["url"], "https://example.org/a.png");
}

TEST(ChatRequestBody, LocalImageBecomesDataUri) {
  testing_util::TempDir dir;
  std::ofstream(dir.file("x.png"), std::ios::binary) << "PNG";
  EXPECT_EQ(socratic::detail::image_url(dir.file("x.png")), "data:image/png;base64,UE5H");
  EXPECT_EQ(socratic::detail::image_url("missing/file.jpg"), "missing/file.jpg");
}

TEST(HttpChatBackend, RoundTrip) {
  FakeChatServer fake;
  HttpChatBackend backend(config(fake, "m"));
  const std::vector<Message> msgs{{"user", "hi", std::nullopt}};
  EXPECT_EQ(backend.complete(msgs), "echo: \"hi\"");
  EXPECT_EQ(fake.last_auth_, "Bearer sk-test");
  EXPECT_EQ(Json::parse(fake.last_body_)["model"], "m");
}

TEST(HttpChatBackend, FailuresAreBackendErrors) {
  FakeChatServer fake;
  const std::vector<Message> msgs{{"user", "hi", std::nullopt}};
  HttpChatBackend broken(config(fake, "broken"));
  EXPECT_THROW(broken.complete(msgs), BackendError);
  HttpChatBackend garbled(config(fake, "garbled"));
  EXPECT_THROW(garbled.complete(msgs), BackendError);
  auto cfg = config(fake, "m");
  cfg.base_url = "http://127.0.0.1:1";
  HttpChatBackend unreachable(cfg);
  EXPECT_THROW(unreachable.complete(msgs), BackendError);
  cfg.base_url.clear();
  EXPECT_THROW(HttpChatBackend{cfg}, InvalidInput);
}
