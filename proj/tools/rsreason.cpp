// rsreason: command-line front end for dataset forging, trace synthesis,
// reward scoring and serving, evaluation and attention analysis.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsreason/commands/attn.hpp"
#include "rsreason/commands/eval.hpp"
#include "rsreason/commands/forge.hpp"
#include "rsreason/commands/score.hpp"
#include "rsreason/commands/synthesize.hpp"
#include "rsreason/server.hpp"
#include "rsreason/socratic/http_backend.hpp"
#include "rsreason/socratic/mock.hpp"

namespace {

using namespace rsreason;

struct RoleFlags {
  std::string url;
  std::string path = "/v1/chat/completions";
  std::string model;
  double temperature = 0.7;
  std::string key_env;
};

void add_role_flags(CLI::App* cmd, const std::string& role, RoleFlags& f) {
  cmd->add_option("--" + role + "-url", f.url, role + " endpoint base URL (scheme://host[:port])");
  cmd->add_option("--" + role + "-path", f.path, role + " chat-completions path")
      ->capture_default_str();
  cmd->add_option("--" + role + "-model", f.model, role + " model name");
  cmd->add_option("--" + role + "-temperature", f.temperature, role + " sampling temperature")
      ->capture_default_str();
  cmd->add_option("--" + role + "-key-env", f.key_env,
                  "environment variable holding the " + role + " API key");
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// API keys come only from the environment.
std::string api_key_for(const std::string& role, const RoleFlags& f) {
  for (const std::string& var : {f.key_env, "RSREASON_" + upper(role) + "_API_KEY",
                                 std::string("RSREASON_API_KEY")}) {
    if (var.empty()) continue;
    if (const char* v = std::getenv(var.c_str())) return v;
  }
  return {};
}

std::shared_ptr<socratic::ChatBackend> http_backend(const std::string& role, const RoleFlags& f) {
  socratic::HttpBackendConfig cfg;
  cfg.name = role;
  cfg.base_url = f.url;
  cfg.path = f.path;
  cfg.model = f.model;
  cfg.temperature = f.temperature;
  cfg.api_key = api_key_for(role, f);
  return std::make_shared<socratic::HttpChatBackend>(std::move(cfg));
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reasoning-trace synthesis, MCQ forging, rewards and evaluation"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.require_subcommand(1);

  // forge
  commands::ForgeOptions forge;
  auto* forge_cmd = app.add_subcommand("forge", "Rebuild VQA groups as multiple-choice samples");
  forge_cmd->add_option("--input", forge.input, "VQA groups (JSONL)")->required();
  forge_cmd->add_option("--output", forge.output, "MCQ samples (JSONL)")->required();
  forge_cmd->add_option("--manifest", forge.manifest_path, "run manifest path");
  forge_cmd->add_option("--skip-log", forge.skip_log, "skip log path");
  forge_cmd->add_option("--seed", forge.forge.seed, "random seed")->capture_default_str();
  forge_cmd->add_option("--target-m-max", forge.forge.target_m_max, "options per sample cap")
      ->capture_default_str();
  forge_cmd->add_option("--parallelism", forge.parallelism, "worker threads")->capture_default_str();
  forge_cmd->add_flag("--strict", forge.strict, "abort on the first malformed line");
  forge_cmd->add_flag("--no-leak", forge.no_leak, "omit inverted flags and meta from the output");
  forge_cmd->add_flag("--overwrite", forge.overwrite, "replace existing outputs");

  // synthesize
  commands::SynthesizeOptions synth;
  std::string mock_path, opening = "warn";
  RoleFlags reasoner_flags, perceiver_flags, verifier_flags;
  auto* synth_cmd = app.add_subcommand("synthesize", "Synthesize verified self-QA reasoning traces");
  synth_cmd->add_option("--input", synth.input, "dataset (JSONL)")->required();
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--mock", mock_path, "scripted backend fixture (JSON) instead of HTTP");
  add_role_flags(synth_cmd, "reasoner", reasoner_flags);
  add_role_flags(synth_cmd, "perceiver", perceiver_flags);
  add_role_flags(synth_cmd, "verifier", verifier_flags);
  synth_cmd->add_option("--max-loop", synth.socratic.max_loop, "Reasoner turn limit")
      ->capture_default_str();
  synth_cmd->add_option("--final-prefix", synth.socratic.final_prefix, "final-answer prefix")
      ->capture_default_str();
  synth_cmd->add_option("--retry-limit", synth.socratic.retry_limit, "re-prompts per turn")
      ->capture_default_str();
  synth_cmd->add_option("--perceiver-opening", opening, "warn or retry")
      ->check(CLI::IsMember({"warn", "retry"}))
      ->capture_default_str();
  synth_cmd->add_option("--parallelism", synth.parallelism, "concurrent dialogues")
      ->capture_default_str();
  synth_cmd->add_option("--max-items", synth.max_items, "stop after N new items (0 = all)");
  synth_cmd->add_flag("--resume", synth.resume, "continue from the checkpoint in --out-dir");
  synth_cmd->add_flag("--overwrite", synth.overwrite, "replace existing outputs");

  // score
  commands::ScoreOptions score;
  std::string score_mode;
  double score_lambda = kDefaultLambda;
  auto* score_cmd = app.add_subcommand("score", "Score model responses with a reward function");
  score_cmd->add_option("--input", score.input, "responses (JSONL)")->required();
  score_cmd->add_option("--output", score.output, "scores (JSONL)")->required();
  score_cmd->add_option("--mode", score_mode, "grounding or mcq")
      ->required()
      ->check(CLI::IsMember({"grounding", "mcq"}));
  score_cmd->add_option("--lambda", score_lambda, "format-reward weight")->capture_default_str();
  score_cmd->add_option("--parallelism", score.parallelism, "worker threads")->capture_default_str();
  score_cmd->add_flag("--overwrite", score.overwrite, "replace existing output");

  // eval
  commands::EvalOptions eval;
  std::string eval_task;
  auto* eval_cmd = app.add_subcommand("eval", "Compute evaluation metrics");
  eval_cmd->add_option("--input", eval.input, "predictions (JSONL)")->required();
  eval_cmd->add_option("--output", eval.output, "report (JSON)")->required();
  eval_cmd->add_option("--task", eval_task, "vqa, grounding, classification or objects")
      ->required()
      ->check(CLI::IsMember({"vqa", "grounding", "classification", "objects"}));
  eval_cmd->add_option("--k", eval.k, "samples per item for vqa")->capture_default_str();
  eval_cmd->add_flag("--overwrite", eval.overwrite, "replace existing output");

  // serve
  std::string host = "127.0.0.1";
  int port = 8377;
  auto* serve_cmd = app.add_subcommand("serve", "Serve rewards over HTTP");
  serve_cmd->add_option("--host", host, "bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "TCP port")->capture_default_str();

  // attn
  commands::AttnOptions attn;
  auto* attn_cmd = app.add_subcommand("attn", "Image-attention proportion curves and phases");
  attn_cmd->add_option("dumps", attn.inputs, "attention dump files")->required();
  attn_cmd->add_option("--out-dir", attn.out_dir, "output directory")->required();
  attn_cmd->add_option("--sigma", attn.sigma, "Gaussian smoothing sigma (tokens)")
      ->capture_default_str();
  attn_cmd->add_option("--min-prominence", attn.min_prominence, "peak prominence threshold")
      ->capture_default_str();
  attn_cmd->add_flag("--overwrite", attn.overwrite, "replace existing outputs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (forge_cmd->parsed()) {
      const RunManifest m = commands::run_forge(forge);
      std::cerr << "forge: " << m.counts.accepted << " samples, " << m.counts.skipped
                << " skipped, " << m.counts.rejected << " malformed\n";
    } else if (synth_cmd->parsed()) {
      synth.socratic.perceiver_opening_enforcement = opening == "retry"
                                                         ? socratic::OpeningEnforcement::retry
                                                         : socratic::OpeningEnforcement::warn;
      commands::BackendFactory factory;
      if (!mock_path.empty()) {
        factory = commands::mock_backends(socratic::MockFixture::load(mock_path));
      } else {
        commands::BackendSet shared{http_backend("reasoner", reasoner_flags),
                                    http_backend("perceiver", perceiver_flags),
                                    http_backend("verifier", verifier_flags)};
        factory = [shared](const std::string&) { return shared; };
      }
      const RunManifest m = commands::run_synthesize(synth, factory);
      std::cerr << "synthesize: " << m.counts.accepted << " accepted, " << m.counts.rejected
                << " rejected, " << m.counts.skipped << " skipped"
                << (m.complete ? "" : " (incomplete; rerun with --resume)") << "\n";
    } else if (score_cmd->parsed()) {
      score.mode = *commands::parse_scoring_mode(score_mode);
      score.reward = RewardConfig(score_lambda);
      const auto s = commands::run_score(score);
      std::cerr << "score: " << s.scored << " scored, " << s.errors << " errors\n";
    } else if (eval_cmd->parsed()) {
      eval.task = *commands::parse_eval_task(eval_task);
      std::cout << commands::run_eval(eval).dump(2) << "\n";
    } else if (serve_cmd->parsed()) {
      httplib::Server server;
      mount_reward_routes(server);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving rewards on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "serve: cannot bind " << host << ":" << port << "\n";
        return 1;
      }
    } else if (attn_cmd->parsed()) {
      int failures = 0;
      for (const auto& r : commands::run_attn(attn)) {
        if (r.ok) {
          std::cerr << r.input << ": " << r.tokens << " tokens, " << r.peaks << " peaks\n";
        } else {
          ++failures;
          std::cerr << r.input << ": error: " << r.error << "\n";
        }
      }
      return failures == 0 ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
