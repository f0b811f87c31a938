#pragma once

// Chat backend seam: an ordered message list in, one completion out.
// Implementations must tolerate concurrent calls.

#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsreason/errors.hpp"

namespace rsreason::socratic {

struct Message {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
  std::optional<std::string> image;  // opaque locator or payload

  friend bool operator==(const Message&, const Message&) = default;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::span<const Message> messages) = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

struct ScriptedReply {
  std::string text;
  bool transport_error = false;
};

/// Replays canned completions in call order and records every request.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend(std::string name, std::vector<ScriptedReply> replies)
      : name_(std::move(name)), replies_(std::move(replies)) {}

  ScriptedBackend(std::string name, const std::vector<std::string>& texts)
      : name_(std::move(name)) {
    for (const auto& t : texts) replies_.push_back({t, false});
  }

  std::string complete(std::span<const Message> messages) override {
    std::lock_guard lock(mu_);
    calls_.emplace_back(messages.begin(), messages.end());
    if (next_ >= replies_.size())
      throw BackendError(name_ + ": script exhausted after " +
                         std::to_string(replies_.size()) + " replies");
    const ScriptedReply& r = replies_[next_++];
    if (r.transport_error) throw BackendError(name_ + ": " + r.text);
    return r.text;
  }

  [[nodiscard]] std::string name() const override { return name_; }

  [[nodiscard]] std::vector<std::vector<Message>> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }
  [[nodiscard]] std::size_t calls_made() const {
    std::lock_guard lock(mu_);
    return calls_.size();
  }

 private:
  std::string name_;
  std::vector<ScriptedReply> replies_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
  std::vector<std::vector<Message>> calls_;
};

}  // namespace rsreason::socratic
