#pragma once

// Scripted backends from a fixture file, for deterministic runs:
//   {"items": {"<item id>": {"reasoner": [...], "perceiver": [...],
//                            "verifier": [...]}}}
// Entry i of a role's list is that role's i-th completion for the item.
// An entry {"error": "..."} simulates a transport failure.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"
#include "rsreason/socratic/backend.hpp"

namespace rsreason::socratic {

struct RoleScripts {
  std::vector<ScriptedReply> reasoner;
  std::vector<ScriptedReply> perceiver;
  std::vector<ScriptedReply> verifier;
};

class MockFixture {
 public:
  static MockFixture from_json(const Json& j) {
    MockFixture f;
    const Json& items = io::require(j, "items");
    if (!items.is_object()) throw SchemaError("items", "expected an object keyed by item id");
    for (const auto& [id, roles] : items.items()) {
      RoleScripts s;
      s.reasoner = replies(roles, "reasoner");
      s.perceiver = replies(roles, "perceiver");
      s.verifier = replies(roles, "verifier");
      f.items_.emplace(id, std::move(s));
    }
    return f;
  }

  static MockFixture load(const std::string& path) {
    return from_json(Json::parse(read_file(path)));
  }

  [[nodiscard]] const RoleScripts* find(const std::string& id) const {
    const auto it = items_.find(id);
    return it == items_.end() ? nullptr : &it->second;
  }

 private:
  static std::vector<ScriptedReply> replies(const Json& roles, const char* role) {
    std::vector<ScriptedReply> out;
    const auto it = roles.find(role);
    if (it == roles.end()) return out;
    if (!it->is_array()) throw SchemaError(role, "expected an array of completions");
    for (const auto& e : *it) {
      if (e.is_string()) {
        out.push_back({e.get<std::string>(), false});
      } else if (e.is_object() && e.contains("error")) {
        out.push_back({e.at("error").get<std::string>(), true});
      } else {
        throw SchemaError(role, "entries must be strings or {\"error\": ...}");
      }
    }
    return out;
  }

  std::map<std::string, RoleScripts> items_;
};

}  // namespace rsreason::socratic
