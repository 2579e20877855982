#include "coprompt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "coprompt/error.hpp"

namespace coprompt {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        errors_.push_back("line " + std::to_string(lineno) +
                          ": expected 'key = value'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (values_.count(key)) {
        errors_.push_back("duplicate key '" + key + "'");
        continue;
      }
      values_[key] = value;
    }
  }

  bool has(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return false;
    seen_.insert(seen_.end(), key);
    return true;
  }

  std::string raw(const std::string& key) { return values_.at(key); }

  template <typename Fn>
  void get(const std::string& key, Fn&& apply) {
    if (!has(key)) return;
    try {
      apply(values_.at(key));
    } catch (const Error& e) {
      errors_.push_back(key + ": " + e.what());
    }
  }

  void finish() {
    for (const auto& [key, value] : values_) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        errors_.push_back("unknown key '" + key + "'");
      }
    }
    if (!errors_.empty()) {
      std::string all = "invalid config:";
      for (const std::string& e : errors_) all += "\n  - " + e;
      throw Error("config", all);
    }
  }

  void add_error(std::string message) { errors_.push_back(std::move(message)); }
  bool ok() const { return errors_.empty(); }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> seen_;
  std::vector<std::string> errors_;
};

int64_t parse_int(const std::string& s) {
  int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error("config", "expected integer, got '" + s + "'");
  }
  return v;
}

uint64_t parse_uint(const std::string& s) {
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error("config", "expected unsigned integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s) {
  if (s.empty()) throw Error("config", "expected number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw Error("config", "expected number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error("config", "expected true/false, got '" + s + "'");
}

std::vector<TokenId> parse_token_list(const std::string& s) {
  std::vector<TokenId> out;
  if (trim(s).empty()) return out;
  for (const std::string& part : split(s, ',')) {
    out.push_back(static_cast<TokenId>(parse_int(trim(part))));
  }
  return out;
}

std::map<TokenId, double> parse_weighted_targets(const std::string& s) {
  std::map<TokenId, double> out;
  if (trim(s).empty()) return out;
  for (const std::string& part : split(s, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw Error("config", "expected token:weight, got '" + part + "'");
    }
    const TokenId tok =
        static_cast<TokenId>(parse_int(trim(part.substr(0, colon))));
    out[tok] = parse_double(trim(part.substr(colon + 1)));
  }
  return out;
}

std::vector<Prompt> parse_prompt_list(const std::string& s) {
  std::vector<Prompt> out;
  for (const std::string& part : split(s, '|')) {
    Prompt p;
    std::istringstream in(part);
    std::string tok;
    while (in >> tok) p.tokens.push_back(static_cast<TokenId>(parse_int(tok)));
    out.push_back(std::move(p));
  }
  if (out.empty()) out.push_back(Prompt{});
  return out;
}

std::string serialize_prompt_list(const std::vector<Prompt>& prompts) {
  std::string out;
  for (size_t i = 0; i < prompts.size(); ++i) {
    if (i) out += '|';
    for (size_t j = 0; j < prompts[i].tokens.size(); ++j) {
      if (j) out += ' ';
      out += std::to_string(prompts[i].tokens[j]);
    }
  }
  return out;
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kCooperative: return "cooperative";
    case RunMode::kCompetition: return "competition";
    case RunMode::kSingle: return "single";
  }
  return "cooperative";
}

RunConfig parse_config_text(const std::string& text) {
  Parser p(text);
  RunConfig cfg;
  bool eos_set = false;

  p.get("run.mode", [&](const std::string& v) {
    if (v == "cooperative") cfg.mode = RunMode::kCooperative;
    else if (v == "competition") cfg.mode = RunMode::kCompetition;
    else if (v == "single") cfg.mode = RunMode::kSingle;
    else throw Error("config", "unknown mode '" + v + "'");
  });
  p.get("run.seed", [&](const std::string& v) { cfg.seed = parse_uint(v); });
  p.get("run.iterations",
        [&](const std::string& v) { cfg.iterations = static_cast<int>(parse_int(v)); });
  p.get("run.eval_episodes",
        [&](const std::string& v) { cfg.eval_episodes = static_cast<int>(parse_int(v)); });
  p.get("run.eval_interval",
        [&](const std::string& v) { cfg.eval_interval = static_cast<int>(parse_int(v)); });
  p.get("run.checkpoint_interval", [&](const std::string& v) {
    cfg.checkpoint_interval = static_cast<int>(parse_int(v));
  });
  p.get("run.output_dir", [&](const std::string& v) { cfg.output_dir = v; });
  p.get("run.tag", [&](const std::string& v) { cfg.tag = v; });
  p.get("run.eval_greedy",
        [&](const std::string& v) { cfg.eval_greedy = parse_bool(v); });

  p.get("game.n",
        [&](const std::string& v) { cfg.n = static_cast<int>(parse_int(v)); });
  p.get("game.token_limit", [&](const std::string& v) {
    cfg.token_limit = static_cast<int>(parse_int(v));
  });
  p.get("game.vocab_size", [&](const std::string& v) {
    cfg.vocab_size = static_cast<int>(parse_int(v));
  });
  p.get("game.eos_id", [&](const std::string& v) {
    cfg.eos_id = static_cast<TokenId>(parse_int(v));
    eos_set = true;
  });
  if (!eos_set) cfg.eos_id = static_cast<TokenId>(cfg.vocab_size - 1);

  p.get("oracle.kind", [&](const std::string& v) {
    if (v == "coverage") cfg.oracle.kind = OracleKind::kCoverage;
    else if (v == "sequence") cfg.oracle.kind = OracleKind::kSequence;
    else throw Error("config", "unknown oracle kind '" + v + "'");
  });
  p.get("oracle.targets", [&](const std::string& v) {
    cfg.oracle.coverage_targets = parse_weighted_targets(v);
  });
  p.get("oracle.sequence", [&](const std::string& v) {
    cfg.oracle.sequence_targets = parse_token_list(v);
  });
  p.get("oracle.seq_weight", [&](const std::string& v) {
    cfg.oracle.sequence_weight = parse_double(v);
  });
  p.get("oracle.dup_penalty", [&](const std::string& v) {
    cfg.oracle.dup_penalty = parse_double(v);
  });
  p.get("oracle.len_penalty", [&](const std::string& v) {
    cfg.oracle.len_penalty = parse_double(v);
  });
  p.get("oracle.offtarget_penalty", [&](const std::string& v) {
    cfg.oracle.offtarget_penalty = parse_double(v);
  });

  p.get("reward.alpha",
        [&](const std::string& v) { cfg.alpha = parse_double(v); });

  p.get("prompts.list",
        [&](const std::string& v) { cfg.prompts = parse_prompt_list(v); });
  p.get("prompts.sampling", [&](const std::string& v) {
    if (v == "cyclic") cfg.prompt_sampling = PromptSampling::kCyclic;
    else if (v == "uniform") cfg.prompt_sampling = PromptSampling::kUniform;
    else throw Error("config", "unknown sampling '" + v + "'");
  });

  p.get("policy.embed_dim", [&](const std::string& v) {
    cfg.embed_dim = static_cast<int>(parse_int(v));
  });
  p.get("policy.window", [&](const std::string& v) {
    cfg.window = static_cast<int>(parse_int(v));
  });
  p.get("policy.hidden_dim", [&](const std::string& v) {
    cfg.hidden_dim = static_cast<int>(parse_int(v));
  });

  p.get("train.gamma",
        [&](const std::string& v) { cfg.train.gamma = parse_double(v); });
  p.get("train.lambda",
        [&](const std::string& v) { cfg.train.lambda = parse_double(v); });
  p.get("train.clip_eps",
        [&](const std::string& v) { cfg.train.clip_eps = parse_double(v); });
  p.get("train.ppo_epochs", [&](const std::string& v) {
    cfg.train.ppo_epochs = static_cast<int>(parse_int(v));
  });
  p.get("train.batch_size", [&](const std::string& v) {
    cfg.train.batch_size = static_cast<int>(parse_int(v));
  });
  p.get("train.minibatch_size", [&](const std::string& v) {
    cfg.train.minibatch_size = static_cast<int>(parse_int(v));
  });
  p.get("train.lr",
        [&](const std::string& v) { cfg.train.lr = parse_double(v); });
  p.get("train.entropy_weight", [&](const std::string& v) {
    cfg.train.entropy_weight = parse_double(v);
  });
  p.get("train.grad_clip_norm", [&](const std::string& v) {
    cfg.train.grad_clip_norm = parse_double(v);
  });
  p.get("train.normalize_advantages", [&](const std::string& v) {
    cfg.train.normalize_advantages = parse_bool(v);
  });

  p.get("ablation.learned_decomposition", [&](const std::string& v) {
    cfg.learned_decomposition = parse_bool(v);
  });
  p.get("ablation.centralized_critic", [&](const std::string& v) {
    cfg.centralized_critic = parse_bool(v);
  });

  p.get("competition.pool_capacity", [&](const std::string& v) {
    cfg.competition.pool_capacity = static_cast<int>(parse_int(v));
  });
  p.get("competition.snapshot_interval", [&](const std::string& v) {
    cfg.competition.snapshot_interval = static_cast<int>(parse_int(v));
  });

  p.get("enumerate.max_len", [&](const std::string& v) {
    cfg.enumerate_max_len = static_cast<int>(parse_int(v));
  });

  p.finish();
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  auto require = [&](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };

  require(vocab_size >= 2, "game.vocab_size must be >= 2");
  require(eos_id >= 0 && eos_id < vocab_size, "game.eos_id out of range");
  require(n >= 1, "game.n must be >= 1");
  require(token_limit >= 0, "game.token_limit must be >= 0");
  require(mode != RunMode::kSingle || n == 1, "run.mode single forces n = 1");
  require(mode != RunMode::kCompetition || n == 1,
          "run.mode competition uses n = 1 (full prompts per agent)");
  require(iterations >= 0, "run.iterations must be >= 0");
  require(eval_episodes >= 1, "run.eval_episodes must be >= 1");
  require(eval_interval >= 0, "run.eval_interval must be >= 0");
  require(checkpoint_interval >= 1, "run.checkpoint_interval must be >= 1");
  require(embed_dim >= 1 && window >= 1 && hidden_dim >= 1,
          "policy dimensions must be positive");
  require(alpha >= 0.0 && std::isfinite(alpha),
          "reward.alpha must be finite and >= 0");

  if (!errors.empty()) {
    std::string all = "invalid config:";
    for (const std::string& e : errors) all += "\n  - " + e;
    throw Error("config", all);
  }

  const Vocabulary vocab = vocabulary();
  oracle.validate(vocab);
  for (const Prompt& p : prompts) p.validate(vocab);
  TrainConfig tc = train;
  tc.validate();
  competition.validate();
}

TrainSetup RunConfig::to_setup() const {
  TrainSetup setup;
  setup.game.n = mode == RunMode::kCompetition ? 1 : n;
  setup.game.token_limit = token_limit;
  setup.game.vocab = vocabulary();
  setup.game.per_turn_cap =
      learned_decomposition ? 0 : std::max(1, token_limit / std::max(1, n));
  setup.encoder.embed_dim = embed_dim;
  setup.encoder.window = window;
  setup.encoder.hidden_dim = hidden_dim;
  setup.encoder.n_prompters = setup.game.n;
  setup.encoder.token_limit = std::max(1, token_limit);
  setup.reward.oracle = oracle;
  setup.reward.alpha = mode == RunMode::kCooperative ? alpha : 0.0;
  setup.train = train;
  setup.prompts.prompts = prompts;
  setup.prompts.sampling = prompt_sampling;
  setup.centralized_critic = centralized_critic;
  setup.run_seed = seed;
  return setup;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto kv = [&](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  kv("run.mode", to_string(cfg.mode));
  kv("run.seed", std::to_string(cfg.seed));
  kv("run.iterations", std::to_string(cfg.iterations));
  kv("run.eval_episodes", std::to_string(cfg.eval_episodes));
  kv("run.eval_interval", std::to_string(cfg.eval_interval));
  kv("run.checkpoint_interval", std::to_string(cfg.checkpoint_interval));
  kv("run.output_dir", cfg.output_dir);
  kv("run.tag", cfg.tag);
  kv("run.eval_greedy", cfg.eval_greedy ? "true" : "false");
  kv("game.n", std::to_string(cfg.n));
  kv("game.token_limit", std::to_string(cfg.token_limit));
  kv("game.vocab_size", std::to_string(cfg.vocab_size));
  kv("game.eos_id", std::to_string(cfg.eos_id));
  kv("oracle.kind",
     cfg.oracle.kind == OracleKind::kCoverage ? "coverage" : "sequence");
  {
    std::string targets;
    for (const auto& [tok, w] : cfg.oracle.coverage_targets) {
      if (!targets.empty()) targets += ',';
      targets += std::to_string(tok) + ":" + format_double(w);
    }
    kv("oracle.targets", targets);
  }
  {
    std::string seq;
    for (size_t i = 0; i < cfg.oracle.sequence_targets.size(); ++i) {
      if (i) seq += ',';
      seq += std::to_string(cfg.oracle.sequence_targets[i]);
    }
    kv("oracle.sequence", seq);
  }
  kv("oracle.seq_weight", format_double(cfg.oracle.sequence_weight));
  kv("oracle.dup_penalty", format_double(cfg.oracle.dup_penalty));
  kv("oracle.len_penalty", format_double(cfg.oracle.len_penalty));
  kv("oracle.offtarget_penalty", format_double(cfg.oracle.offtarget_penalty));
  kv("reward.alpha", format_double(cfg.alpha));
  kv("prompts.list", serialize_prompt_list(cfg.prompts));
  kv("prompts.sampling",
     cfg.prompt_sampling == PromptSampling::kCyclic ? "cyclic" : "uniform");
  kv("policy.embed_dim", std::to_string(cfg.embed_dim));
  kv("policy.window", std::to_string(cfg.window));
  kv("policy.hidden_dim", std::to_string(cfg.hidden_dim));
  kv("train.gamma", format_double(cfg.train.gamma));
  kv("train.lambda", format_double(cfg.train.lambda));
  kv("train.clip_eps", format_double(cfg.train.clip_eps));
  kv("train.ppo_epochs", std::to_string(cfg.train.ppo_epochs));
  kv("train.batch_size", std::to_string(cfg.train.batch_size));
  kv("train.minibatch_size", std::to_string(cfg.train.minibatch_size));
  kv("train.lr", format_double(cfg.train.lr));
  kv("train.entropy_weight", format_double(cfg.train.entropy_weight));
  kv("train.grad_clip_norm", format_double(cfg.train.grad_clip_norm));
  kv("train.normalize_advantages",
     cfg.train.normalize_advantages ? "true" : "false");
  kv("ablation.learned_decomposition",
     cfg.learned_decomposition ? "true" : "false");
  kv("ablation.centralized_critic",
     cfg.centralized_critic ? "true" : "false");
  kv("competition.pool_capacity",
     std::to_string(cfg.competition.pool_capacity));
  kv("competition.snapshot_interval",
     std::to_string(cfg.competition.snapshot_interval));
  kv("enumerate.max_len", std::to_string(cfg.enumerate_max_len));
  return out.str();
}

}  // namespace coprompt
