#ifndef COPROMPT_CORE_CONFIG_HPP_
#define COPROMPT_CORE_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "coprompt/competition.hpp"
#include "coprompt/trainer.hpp"

namespace coprompt {

enum class RunMode { kCooperative, kCompetition, kSingle };

// Fully resolved experiment description. One flat key-value file per run
// ("section.key = value"); unknown keys are hard errors and the serialized
// snapshot round-trips byte-for-byte.
struct RunConfig {
  RunMode mode = RunMode::kCooperative;
  uint64_t seed = 1;
  int iterations = 100;
  int eval_episodes = 512;
  int eval_interval = 0;  // 0 disables periodic evaluation rows
  int checkpoint_interval = 100;
  std::string output_dir;
  std::string tag;
  bool eval_greedy = false;

  int n = 1;
  int token_limit = 80;  // published default; desk profiles override
  int vocab_size = 12;
  TokenId eos_id = 11;

  OracleSpec oracle;
  double alpha = 0.25;
  std::vector<Prompt> prompts{Prompt{}};  // default: one empty prompt
  PromptSampling prompt_sampling = PromptSampling::kCyclic;

  int embed_dim = 16;
  int window = 8;
  int hidden_dim = 64;

  TrainConfig train;
  bool learned_decomposition = true;
  bool centralized_critic = true;
  CompetitionConfig competition;
  int enumerate_max_len = -1;  // -1: largest length fitting the guard

  Vocabulary vocabulary() const {
    return Vocabulary{vocab_size, eos_id};
  }
  // Translates the resolved config into the trainer's view. Fixed
  // decomposition becomes a per-turn cap of floor(T / n).
  TrainSetup to_setup() const;

  void validate() const;  // throws Error("config") with itemized messages
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

// Canonical snapshot: every key, fixed order, exact float round-trip.
std::string serialize_config(const RunConfig& cfg);

std::string to_string(RunMode mode);

}  // namespace coprompt

#endif  // COPROMPT_CORE_CONFIG_HPP_
