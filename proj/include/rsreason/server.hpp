#pragma once

// Reward endpoint for external RL trainers.
//   POST /reward/grounding   POST /reward/mcq   GET /healthz
// Handlers are pure functions of the request body.

#include <string>
#include <string_view>

#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>

#include "rsreason/json_io.hpp"
#include "rsreason/reward_requests.hpp"

namespace rsreason {

struct HttpReply {
  int status = 200;
  std::string body;
};

inline HttpReply handle_reward(ScoringMode mode, std::string_view body) {
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::exception& e) {
    return {400, io::dump(Json{{"error", "malformed JSON body"},
                               {"fields", Json{{"(body)", e.what()}}}})};
  }
  try {
    RewardOutcome out = reward_request(mode, req);
    if (const auto* j = std::get_if<Json>(&out)) return {200, io::dump(*j)};
    return {400, io::dump(Json{{"error", "invalid request"},
                               {"fields", field_errors_to_json(std::get<FieldErrors>(out))}})};
  } catch (const std::exception& e) {
    return {400, io::dump(Json{{"error", "invalid request"},
                               {"fields", Json{{"(body)", e.what()}}}})};
  }
}

inline void mount_reward_routes(httplib::Server& server) {
  auto route = [](ScoringMode mode) {
    return [mode](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = handle_reward(mode, req.body);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
    };
  };
  server.Post("/reward/grounding", route(ScoringMode::grounding));
  server.Post("/reward/mcq", route(ScoringMode::mcq));
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unexpected error";
        try {
          if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        res.status = 400;
        res.set_content(io::dump(Json{{"error", what}}), "application/json");
      });
}

}  // namespace rsreason
