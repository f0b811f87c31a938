#pragma once

// Run manifests and atomic file output.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "rsreason/errors.hpp"
#include "rsreason/json_io.hpp"
#include "rsreason/rng.hpp"

namespace rsreason {

namespace fs = std::filesystem;

struct InputDigest {
  std::string path;
  std::uint64_t bytes = 0;
  std::string fnv1a64;
};

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline InputDigest digest_file(const std::string& path) {
  const std::string bytes = read_file(path);
  return {path, bytes.size(), hex64(fnv1a64(bytes))};
}

/// Writes via a temporary sibling and rename so readers never see a
/// partial file.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidInput("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Refuses to clobber an existing output unless `overwrite` is set.
inline void ensure_fresh(const fs::path& path, bool overwrite) {
  if (!overwrite && fs::exists(path))
    throw InvalidInput("output exists (pass --overwrite to replace): " + path.string());
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunCounts {
  std::size_t processed = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t skipped = 0;
};

struct RunManifest {
  std::string run_id;
  std::string subcommand;
  std::vector<InputDigest> inputs;
  Json config = Json::object();
  RunCounts counts;
  std::vector<Json> errors;  // per-line problems
  bool complete = true;
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0;

  [[nodiscard]] Json to_json() const {
    Json in = Json::array();
    for (const auto& d : inputs)
      in.push_back(Json{{"path", d.path}, {"bytes", d.bytes}, {"fnv1a64", d.fnv1a64}});
    Json errs = Json::array();
    for (const auto& e : errors) errs.push_back(e);
    return Json{{"run_id", run_id},
                {"subcommand", subcommand},
                {"inputs", std::move(in)},
                {"config", config},
                {"counts", Json{{"processed", counts.processed},
                                {"accepted", counts.accepted},
                                {"rejected", counts.rejected},
                                {"skipped", counts.skipped}}},
                {"complete", complete},
                {"errors", std::move(errs)},
                {"timings", Json{{"started_at", started_at},
                                 {"finished_at", finished_at},
                                 {"wall_seconds", wall_seconds}}}};
  }
};

// Stamps start time and run id on construction; finish() fills the rest
// and writes the manifest atomically.
class ManifestRecorder {
 public:
  ManifestRecorder(std::string subcommand, const std::vector<std::string>& inputs)
      : start_(std::chrono::system_clock::now()), steady_(std::chrono::steady_clock::now()) {
    m_.subcommand = std::move(subcommand);
    m_.started_at = utc_timestamp(start_);
    std::uint64_t h = fnv1a64(m_.subcommand);
    for (const auto& p : inputs) {
      m_.inputs.push_back(digest_file(p));
      h = fnv1a64(m_.inputs.back().fnv1a64, h);
    }
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        start_.time_since_epoch()).count();
    m_.run_id = m_.subcommand + "-" + hex64(splitmix64(h ^ static_cast<std::uint64_t>(ns)));
  }

  RunManifest& manifest() { return m_; }

  const RunManifest& finish(const fs::path& path) {
    m_.finished_at = utc_timestamp(std::chrono::system_clock::now());
    m_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_).count();
    write_file_atomic(path, m_.to_json().dump(2) + "\n");
    return m_;
  }

 private:
  RunManifest m_;
  std::chrono::system_clock::time_point start_;
  std::chrono::steady_clock::time_point steady_;
};

}  // namespace rsreason
