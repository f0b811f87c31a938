#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "rsreason/attention.hpp"
#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"

namespace rsreason::commands {

struct AttnOptions {
  std::vector<std::string> inputs;
  std::string out_dir;
  double sigma = 2.0;
  double min_prominence = 0.05;
  bool overwrite = false;
};

struct AttnCaseResult {
  std::string input;
  bool ok = false;
  std::string error;
  std::size_t tokens = 0;
  std::size_t peaks = 0;
  std::string csv_path;
  std::string json_path;
};

struct AttnCase {
  AttentionSeries raw;
  AttentionSeries smoothed;
  PhaseSegmentation phases;
};

inline AttnCase analyse_attention(const AttentionDump& dump, double sigma, double min_prominence) {
  AttnCase c;
  c.raw = attn_proportion(dump);
  if (c.raw.empty()) throw InvalidInput("attention dump has no token rows");
  c.smoothed = smooth(c.raw, sigma);
  c.phases = segment_phases(c.smoothed, min_prominence);
  return c;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(v);
}

inline std::string series_csv(const AttnCase& c) {
  std::string out = "token_index,raw,smoothed\n";
  for (std::size_t i = 0; i < c.raw.size(); ++i)
    out += std::to_string(i) + "," + format_double(c.raw[i]) + "," +
           format_double(c.smoothed[i]) + "\n";
  return out;
}

inline Json segmentation_json(const std::string& name, const AttnCase& c, double sigma,
                              double min_prominence) {
  Json segs = Json::array();
  for (const auto& s : c.phases.segments)
    segs.push_back(Json{{"start", s.start}, {"end", s.end}, {"label", to_string(s.label)}});
  return Json{{"case", name},
              {"tokens", c.raw.size()},
              {"sigma", sigma},
              {"min_prominence", min_prominence},
              {"peaks", c.phases.peaks},
              {"prominences", c.phases.prominences},
              {"segments", std::move(segs)}};
}

/// Processes each dump independently; a bad file is reported and skipped.
inline std::vector<AttnCaseResult> run_attn(const AttnOptions& opt) {
  if (!(opt.sigma > 0)) throw InvalidInput("attn: sigma must be positive");
  std::vector<AttnCaseResult> results;
  for (const auto& input : opt.inputs) {
    AttnCaseResult r;
    r.input = input;
    try {
      std::ifstream in(input);
      if (!in) throw InvalidInput("cannot open " + input);
      const AttnCase c = analyse_attention(parse_attention_dump(in), opt.sigma, opt.min_prominence);
      const std::string stem = fs::path(input).stem().string();
      const fs::path csv = fs::path(opt.out_dir) / (stem + ".csv");
      const fs::path js = fs::path(opt.out_dir) / (stem + ".segments.json");
      ensure_fresh(csv, opt.overwrite);
      ensure_fresh(js, opt.overwrite);
      write_file_atomic(csv, series_csv(c));
      write_file_atomic(js, segmentation_json(stem, c, opt.sigma, opt.min_prominence).dump(2) + "\n");
      r.ok = true;
      r.tokens = c.raw.size();
      r.peaks = c.phases.peaks.size();
      r.csv_path = csv.string();
      r.json_path = js.string();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace rsreason::commands
