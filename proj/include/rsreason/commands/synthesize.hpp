#pragma once

// Trace synthesis over a dataset: dialogue, verification, rendering.
// Every finished item is appended to a checkpoint journal; the accepted and
// rejected files are rebuilt from the journal in input order, so an
// interrupted run resumed with --resume ends with the same outputs as an
// uninterrupted one.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"
#include "rsreason/parallel.hpp"
#include "rsreason/socratic/dialogue.hpp"
#include "rsreason/socratic/mock.hpp"

namespace rsreason::commands {

struct BackendSet {
  std::shared_ptr<socratic::ChatBackend> reasoner;
  std::shared_ptr<socratic::ChatBackend> perceiver;
  std::shared_ptr<socratic::ChatBackend> verifier;
};

// Backends for one item, looked up by the item's key.
using BackendFactory = std::function<BackendSet(const std::string& item_key)>;

// Fresh scripted backends per item from a mock fixture. Unknown items get
// empty scripts and so fail as transport errors.
inline BackendFactory mock_backends(socratic::MockFixture fixture) {
  auto shared = std::make_shared<const socratic::MockFixture>(std::move(fixture));
  return [shared](const std::string& key) {
    const socratic::RoleScripts* s = shared->find(key);
    const socratic::RoleScripts none;
    if (!s) s = &none;
    return BackendSet{std::make_shared<socratic::ScriptedBackend>("reasoner", s->reasoner),
                      std::make_shared<socratic::ScriptedBackend>("perceiver", s->perceiver),
                      std::make_shared<socratic::ScriptedBackend>("verifier", s->verifier)};
  };
}

struct SynthesizeOptions {
  std::string input;
  std::string out_dir;
  socratic::SocraticConfig socratic;
  std::size_t parallelism = 4;
  bool resume = false;
  bool overwrite = false;
  std::size_t max_items = 0;  // stop after this many new items; 0 = all

  [[nodiscard]] fs::path accepted_path() const { return fs::path(out_dir) / "accepted.jsonl"; }
  [[nodiscard]] fs::path rejected_path() const { return fs::path(out_dir) / "rejected.jsonl"; }
  [[nodiscard]] fs::path checkpoint_path() const { return fs::path(out_dir) / "checkpoint.jsonl"; }
  [[nodiscard]] fs::path manifest_path() const { return fs::path(out_dir) / "manifest.json"; }
};

// Dataset line: {"id"?, "image_id", "image", "query", "answer",
//                "metadata"?: {"modality", "count", "size"}}
struct SynthItem {
  std::string key;
  std::string image_id;
  std::string image;
  std::string query;
  std::string answer;
  socratic::ImageMetadata metadata;
};

inline std::string metadata_field(const Json& md, const char* key) {
  const auto it = md.find(key);
  if (it == md.end() || it->is_null()) return {};
  return it->is_string() ? it->get<std::string>() : io::dump(*it);
}

inline SynthItem synth_item_from_json(const Json& j) {
  SynthItem it;
  it.image_id = io::require_string(j, "image_id");
  if (it.image_id.empty()) throw SchemaError("image_id", "must be non-empty");
  it.key = io::optional_string(j, "id").value_or(it.image_id);
  it.image = io::require_string(j, "image");
  it.query = io::require_string(j, "query");
  it.answer = io::require_string(j, "answer");
  if (const auto md = j.find("metadata"); md != j.end() && !md->is_null()) {
    if (!md->is_object()) throw SchemaError("metadata", "expected an object");
    it.metadata = {metadata_field(*md, "modality"), metadata_field(*md, "count"),
                   metadata_field(*md, "size")};
  }
  return it;
}

/// Dialogue, gate and rendering for one item. Returns a journal entry:
/// {"key", "status": "accept" | "reject", "record": {...}}.
inline Json synthesize_item(const SynthItem& item, const BackendSet& b,
                            const socratic::SocraticConfig& cfg) {
  using namespace socratic;
  const DialogueState st = run_dialogue(item.query, item.image, item.metadata.describe(),
                                        *b.reasoner, *b.perceiver, cfg);
  Json rec{{"image_id", item.image_id}, {"query", item.query}};
  if (st.status != DialogueStatus::final) {
    rec["rounds"] = st.question_rounds_used;
    rec["verdict"] = "reject";
    rec["stage"] = "dialogue";
    rec["reason"] = st.failure_reason;
    return Json{{"key", item.key}, {"status", "reject"}, {"record", std::move(rec)}};
  }
  const std::string answer = st.final_answer();
  const Verdict v = verify(answer, item.answer, item.query, *b.verifier, cfg);
  if (!v.accepted) {
    rec["final_answer"] = answer;
    rec["rounds"] = st.question_rounds_used;
    rec["verdict"] = "reject";
    rec["stage"] = "verifier";
    rec["reason"] = v.reason;
    return Json{{"key", item.key}, {"status", "reject"}, {"record", std::move(rec)}};
  }
  rec["trace"] = render_trace(st, answer);
  rec["final_answer"] = answer;
  rec["rounds"] = st.question_rounds_used;
  rec["verdict"] = "accept";
  return Json{{"key", item.key}, {"status", "accept"}, {"record", std::move(rec)}};
}

namespace detail {

// Valid entries of an existing journal; a torn final line is dropped.
inline std::map<std::string, Json> load_journal(const fs::path& path) {
  std::map<std::string, Json> done;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    try {
      Json j = Json::parse(line);
      if (j.is_object() && j.contains("key") && j.contains("status") && j.contains("record"))
        done[j["key"].get<std::string>()] = std::move(j);
    } catch (const std::exception&) {
    }
  }
  return done;
}

class JournalWriter {
 public:
  explicit JournalWriter(const fs::path& path) : out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw InvalidInput("cannot open checkpoint: " + path.string());
  }
  void append(const Json& entry) {
    std::lock_guard lock(mu_);
    out_ << io::dump(entry) << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace detail

inline RunManifest run_synthesize(const SynthesizeOptions& opt, const BackendFactory& backends) {
  opt.socratic.validate();
  if (opt.resume && opt.overwrite)
    throw InvalidInput("synthesize: --resume and --overwrite are mutually exclusive");
  fs::create_directories(opt.out_dir);
  if (!opt.resume) {
    for (const auto& p : {opt.accepted_path(), opt.rejected_path(), opt.checkpoint_path(),
                          opt.manifest_path()})
      ensure_fresh(p, opt.overwrite);
    fs::remove(opt.checkpoint_path());
  }

  ManifestRecorder rec("synthesize", {opt.input});
  const auto lines = io::read_jsonl_lines(opt.input);

  // Parse everything up front; malformed and duplicate lines are skips.
  struct Entry {
    std::string key;
    std::optional<SynthItem> item;
    std::string problem;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  for (const auto& l : lines) {
    Entry e;
    try {
      SynthItem item = synth_item_from_json(io::parse_json_line(l.text));
      e.key = item.key;
      if (!seen.insert(item.key).second) e.problem = "duplicate id '" + item.key + "'";
      else e.item = std::move(item);
    } catch (const InvalidInput& err) {
      e.problem = std::string("malformed: ") + err.what();
    }
    if (!e.item) e.key = "#line" + std::to_string(l.line_no);
    entries.push_back(std::move(e));
  }

  std::map<std::string, Json> done;
  if (opt.resume) {
    done = detail::load_journal(opt.checkpoint_path());
    std::string clean;
    for (const auto& [k, j] : done) clean += io::dump(j) + "\n";
    write_file_atomic(opt.checkpoint_path(), clean);
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (!done.count(entries[i].key)) todo.push_back(i);
  const bool truncated = opt.max_items > 0 && todo.size() > opt.max_items;
  if (truncated) todo.resize(opt.max_items);

  std::mutex done_mu;
  {
    detail::JournalWriter journal(opt.checkpoint_path());
    parallel_for(todo.size(), opt.parallelism, [&](std::size_t t) {
      const Entry& e = entries[todo[t]];
      Json entry;
      if (!e.item) {
        entry = Json{{"key", e.key},
                     {"status", "skip"},
                     {"record", Json{{"line", lines[todo[t]].line_no},
                                     {"verdict", "reject"},
                                     {"stage", "input"},
                                     {"reason", e.problem}}}};
      } else {
        entry = synthesize_item(*e.item, backends(e.key), opt.socratic);
      }
      journal.append(entry);
      std::lock_guard lock(done_mu);
      done[e.key] = std::move(entry);
    });
  }

  RunManifest& m = rec.manifest();
  m.config = Json{{"max_loop", opt.socratic.max_loop},
                  {"final_prefix", opt.socratic.final_prefix},
                  {"retry_limit", opt.socratic.retry_limit},
                  {"perceiver_opening_enforcement",
                   opt.socratic.perceiver_opening_enforcement == socratic::OpeningEnforcement::warn
                       ? "warn" : "retry"},
                  {"parallelism", opt.parallelism},
                  {"resume", opt.resume}};
  std::string accepted, rejected;
  for (const auto& e : entries) {
    const auto it = done.find(e.key);
    if (it == done.end()) continue;
    ++m.counts.processed;
    const std::string status = it->second["status"].get<std::string>();
    const std::string line = io::dump(it->second["record"]) + "\n";
    if (status == "accept") {
      ++m.counts.accepted;
      accepted += line;
    } else {
      if (status == "skip") {
        ++m.counts.skipped;
        m.errors.push_back(it->second["record"]);
      } else {
        ++m.counts.rejected;
      }
      rejected += line;
    }
  }
  m.complete = m.counts.processed == entries.size();
  write_file_atomic(opt.accepted_path(), accepted);
  write_file_atomic(opt.rejected_path(), rejected);
  return rec.finish(opt.manifest_path());
}

}  // namespace rsreason::commands
