#pragma once

#include <string>
#include <vector>

#include "rsreason/forge.hpp"
#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"
#include "rsreason/parallel.hpp"

namespace rsreason::commands {

struct ForgeOptions {
  std::string input;
  std::string output;
  std::string manifest_path;  // default: <output>.manifest.json
  std::string skip_log;       // default: <output>.skips.jsonl
  ForgeConfig forge;
  bool strict = false;
  bool no_leak = false;
  bool overwrite = false;
  std::size_t parallelism = 1;
};

/// Streams VQA groups through forge_mcq. Each group draws from its own
/// stream seeded by (seed, image_id), so output does not depend on
/// parallelism.
inline RunManifest run_forge(const ForgeOptions& opt) {
  opt.forge.validate();
  const std::string manifest_path =
      opt.manifest_path.empty() ? opt.output + ".manifest.json" : opt.manifest_path;
  const std::string skip_path = opt.skip_log.empty() ? opt.output + ".skips.jsonl" : opt.skip_log;
  for (const auto& p : {opt.output, manifest_path, skip_path}) ensure_fresh(p, opt.overwrite);

  ManifestRecorder rec("forge", {opt.input});
  const auto lines = io::read_jsonl_lines(opt.input);

  struct Slot {
    std::string sample;
    std::string skip_reason;
    std::string image_id;
    std::string error;
  };
  std::vector<Slot> slots(lines.size());
  parallel_for(lines.size(), opt.parallelism, [&](std::size_t i) {
    Slot& s = slots[i];
    VQAGroup group;
    try {
      group = io::vqa_group_from_json(io::parse_json_line(lines[i].text));
    } catch (const InvalidInput& e) {
      s.error = e.what();
      return;
    }
    s.image_id = group.image_id;
    const ForgeResult r = forge_mcq(group, opt.forge);
    if (const auto* sample = std::get_if<MCQSample>(&r))
      s.sample = io::dump(io::to_json(*sample, opt.forge.seed, opt.no_leak));
    else
      s.skip_reason = std::get<ForgeSkip>(r).reason;
  });

  RunManifest& m = rec.manifest();
  m.config = Json{{"seed", opt.forge.seed},
                  {"target_m_max", opt.forge.target_m_max},
                  {"numeric_delta", Json::array({opt.forge.numeric_delta_min,
                                                 opt.forge.numeric_delta_max})},
                  {"strict", opt.strict},
                  {"no_leak", opt.no_leak},
                  {"parallelism", opt.parallelism}};
  std::string out, skips;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    ++m.counts.processed;
    if (!s.error.empty()) {
      if (opt.strict)
        throw InvalidInput(opt.input + ":" + std::to_string(lines[i].line_no) + ": " + s.error);
      ++m.counts.rejected;
      m.errors.push_back(Json{{"line", lines[i].line_no}, {"error", s.error}});
      skips += io::dump(Json{{"line", lines[i].line_no}, {"reason", "malformed: " + s.error}}) + "\n";
    } else if (!s.skip_reason.empty()) {
      ++m.counts.skipped;
      skips += io::dump(Json{{"line", lines[i].line_no},
                             {"image_id", s.image_id},
                             {"reason", s.skip_reason}}) + "\n";
    } else {
      ++m.counts.accepted;
      out += s.sample + "\n";
    }
  }
  write_file_atomic(opt.output, out);
  write_file_atomic(skip_path, skips);
  return rec.finish(manifest_path);
}

}  // namespace rsreason::commands
