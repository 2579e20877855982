#include "coprompt/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <signal.h>
#include <unistd.h>
#include <map>
#include <sstream>

#include "coprompt/checkpoint.hpp"
#include "coprompt/error.hpp"

namespace coprompt {
namespace fs = std::filesystem;

namespace {

int log_level() {
  static const int level = [] {
    const char* v = std::getenv("COPROMPT_LOG");
    if (!v) return 1;
    const std::string s(v);
    if (s == "quiet") return 0;
    if (s == "debug") return 2;
    return 1;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::cerr << "[coprompt] " << message << "\n";
}

void log_debug(const std::string& message) {
  if (log_level() >= 2) std::cerr << "[coprompt] " << message << "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Exclusive run-directory ownership. The lock records the owner's pid so a
// lock orphaned by a killed run can be reclaimed.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    if (fs::exists(path_) && !owner_alive()) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw Error("usage", "run directory is locked (found " + path_.string() +
                               "); another run may own it");
    }
    std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
    std::fclose(f);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  bool owner_alive() const {
    std::ifstream in(path_);
    long pid = 0;
    if (!(in >> pid) || pid <= 0) return false;
    return ::kill(static_cast<pid_t>(pid), 0) == 0;
  }

  fs::path path_;
};

std::string metrics_header(int n) {
  std::string h = "iteration,mean_reward,mean_task_reward,mean_coop_reward,mean_tokens";
  for (int i = 1; i <= n; ++i) h += ",mean_len_p" + std::to_string(i);
  h += ",policy_loss,value_loss,entropy";
  return h;
}

std::string metrics_row(uint64_t iteration, const IterationMetrics& m) {
  std::string row = std::to_string(iteration);
  row += "," + fmt(m.mean_reward);
  row += "," + fmt(m.mean_task_reward);
  row += "," + fmt(m.mean_coop_reward);
  row += "," + fmt(m.mean_tokens);
  for (double l : m.mean_lengths) row += "," + fmt(l);
  row += "," + fmt(m.policy_loss);
  row += "," + fmt(m.value_loss);
  row += "," + fmt(m.entropy);
  return row;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Keeps the header plus the first `rows` data rows.
void truncate_csv(const fs::path& path, size_t rows) {
  if (!fs::exists(path)) return;
  std::vector<std::string> lines = read_lines(path);
  const size_t keep = std::min(lines.size(), rows + 1);
  std::ofstream out(path, std::ios::trunc);
  for (size_t k = 0; k < keep; ++k) out << lines[k] << "\n";
}

void append_params(std::vector<ParamTensor>& out, const std::string& prefix,
                   const std::vector<const ParamTensor*>& tensors) {
  for (const ParamTensor* t : tensors) {
    ParamTensor copy = *t;
    copy.name = prefix + "." + t->name;
    out.push_back(std::move(copy));
  }
}

void append_adam(std::vector<ParamTensor>& out, const std::string& prefix,
                 const AdamState& state) {
  out.push_back(scalar_tensor(prefix + ".step",
                              static_cast<double>(state.step)));
  for (const ParamTensor& t : state.m) {
    ParamTensor copy = t;
    copy.name = prefix + ".m." + t.name;
    out.push_back(std::move(copy));
  }
  for (const ParamTensor& t : state.v) {
    ParamTensor copy = t;
    copy.name = prefix + ".v." + t.name;
    out.push_back(std::move(copy));
  }
}

ParamTensor named(const TensorArchive& ar, const std::string& full,
                  const std::string& local) {
  ParamTensor t = ar.get(full);
  t.name = local;
  return t;
}

PolicyParams load_policy(const TensorArchive& ar, const std::string& prefix) {
  PolicyParams p;
  p.embed = named(ar, prefix + ".embed", "embed");
  p.w1 = named(ar, prefix + ".w1", "w1");
  p.b1 = named(ar, prefix + ".b1", "b1");
  p.w2 = named(ar, prefix + ".w2", "w2");
  p.b2 = named(ar, prefix + ".b2", "b2");
  return p;
}

CriticParams load_critic(const TensorArchive& ar, const std::string& prefix) {
  CriticParams p;
  p.embed = named(ar, prefix + ".embed", "embed");
  p.w1 = named(ar, prefix + ".w1", "w1");
  p.b1 = named(ar, prefix + ".b1", "b1");
  p.w2 = named(ar, prefix + ".w2", "w2");
  p.b2 = named(ar, prefix + ".b2", "b2");
  return p;
}

AdamState load_adam(const TensorArchive& ar, const std::string& prefix,
                    const std::vector<std::string>& names) {
  AdamState s;
  s.step = static_cast<int64_t>(ar.scalar(prefix + ".step"));
  for (const std::string& n : names) {
    s.m.push_back(named(ar, prefix + ".m." + n, n));
    s.v.push_back(named(ar, prefix + ".v." + n, n));
  }
  return s;
}

const std::vector<std::string> kNetTensorNames = {"embed", "w1", "b1", "w2",
                                                  "b2"};

struct RunState {
  std::vector<PrompterNets> nets;
  std::optional<OpponentPool> pool;
  uint64_t iteration = 0;
};

RunState fresh_state(const RunConfig& cfg) {
  RunState state;
  state.nets = init_nets(cfg.to_setup());
  if (cfg.mode == RunMode::kCompetition) {
    OpponentPool pool(cfg.competition.pool_capacity);
    pool.push(state.nets[0].policy);  // former copy #0: the initial weights
    state.pool = std::move(pool);
  }
  return state;
}

RunState load_state(const RunConfig& cfg, const fs::path& ckpt) {
  const TensorArchive ar(load_tensors(ckpt));
  RunState state;
  state.iteration = static_cast<uint64_t>(ar.scalar("meta.iteration"));
  const int n = cfg.mode == RunMode::kCompetition ? 1 : cfg.n;
  for (int i = 0; i < n; ++i) {
    const std::string p = "prompter." + std::to_string(i);
    PrompterNets nets;
    nets.policy = load_policy(ar, p + ".policy");
    nets.critic = load_critic(ar, p + ".critic");
    nets.adam_policy = load_adam(ar, p + ".adam_policy", kNetTensorNames);
    nets.adam_critic = load_adam(ar, p + ".adam_critic", kNetTensorNames);
    state.nets.push_back(std::move(nets));
  }
  if (cfg.mode == RunMode::kCompetition) {
    const int count = static_cast<int>(ar.scalar("pool.count"));
    const uint64_t pushed = static_cast<uint64_t>(ar.scalar("pool.pushed"));
    std::vector<PolicyParams> ring;
    ring.reserve(static_cast<size_t>(count));
    for (int s = 0; s < count; ++s) {
      ring.push_back(load_policy(ar, "pool." + std::to_string(s)));
    }
    state.pool = OpponentPool::restore(cfg.competition.pool_capacity,
                                       std::move(ring), pushed);
  }
  return state;
}

void save_state(const fs::path& run_dir, const RunState& state) {
  const fs::path dir = run_dir / "checkpoints";
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_%06llu.bin",
                static_cast<unsigned long long>(state.iteration));
  const fs::path tmp = dir / (std::string(name) + ".tmp");
  save_tensors(tmp, pack_run_state(
                        state.nets, state.pool ? &*state.pool : nullptr,
                        state.iteration));
  fs::rename(tmp, dir / name);
}

EvalSummary write_eval_summary(const fs::path& run_dir,
                               const EvalSummary& summary) {
  std::ofstream out(run_dir / "eval.summary", std::ios::trunc);
  out << "episodes = " << summary.episodes << "\n";
  out << "reward_mean = " << fmt_exact(summary.reward_mean) << "\n";
  out << "reward_std = " << fmt_exact(summary.reward_std) << "\n";
  out << "mean_tokens = " << fmt_exact(summary.mean_tokens) << "\n";
  return summary;
}

}  // namespace

std::vector<ParamTensor> pack_run_state(const std::vector<PrompterNets>& nets,
                                        const OpponentPool* pool,
                                        uint64_t iteration) {
  std::vector<ParamTensor> out;
  out.push_back(scalar_tensor("meta.iteration", static_cast<double>(iteration)));
  for (size_t i = 0; i < nets.size(); ++i) {
    const std::string p = "prompter." + std::to_string(i);
    append_params(out, p + ".policy", nets[i].policy.tensors());
    append_params(out, p + ".critic", nets[i].critic.tensors());
    append_adam(out, p + ".adam_policy", nets[i].adam_policy);
    append_adam(out, p + ".adam_critic", nets[i].adam_critic);
  }
  if (pool) {
    out.push_back(scalar_tensor("pool.count", static_cast<double>(pool->size())));
    out.push_back(
        scalar_tensor("pool.pushed", static_cast<double>(pool->pushed_count())));
    for (int s = 0; s < pool->size(); ++s) {
      append_params(out, "pool." + std::to_string(s),
                    pool->snapshot(s).tensors());
    }
  }
  return out;
}

std::filesystem::path latest_checkpoint(const fs::path& run_dir) {
  const fs::path dir = run_dir / "checkpoints";
  fs::path best;
  if (!fs::exists(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("ckpt_", 0) == 0 && name.size() >= 5 &&
        entry.path().extension() == ".bin") {
      if (best.empty() || entry.path().filename() > best.filename()) {
        best = entry.path();
      }
    }
  }
  return best;
}

EvalSummary evaluate_params(const RunConfig& cfg,
                            const std::vector<PrompterNets>& nets,
                            int episodes) {
  const TrainSetup setup = cfg.to_setup();
  const Vocabulary vocab = setup.game.vocab;
  std::vector<PolicyHandle> handles;
  for (const PrompterNets& n : nets) {
    handles.push_back(cfg.eval_greedy
                          ? make_greedy_handle(n.policy, setup.encoder)
                          : make_sampling_handle(n.policy, setup.encoder));
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  double tokens = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Rng ep_rng(episode_seed(cfg.seed, streams::kEval, 0,
                            static_cast<uint64_t>(e)));
    Rng prompt_rng(episode_seed(cfg.seed, streams::kEval, 1,
                                static_cast<uint64_t>(e)));
    const Prompt& prompt =
        setup.prompts.select(static_cast<uint64_t>(e), prompt_rng);
    const Trajectory traj =
        run_episode(handles, prompt, setup.game, ep_rng);
    const double r = composite_reward(prompt, traj, vocab, setup.reward,
                                      RewardMode::kEval);
    sum += r;
    sum_sq += r * r;
    tokens += static_cast<double>(clean_continuation(traj, vocab).size());
  }

  EvalSummary summary;
  summary.episodes = episodes;
  summary.reward_mean = sum / episodes;
  if (episodes > 1) {
    const double var =
        (sum_sq - sum * sum / episodes) / static_cast<double>(episodes - 1);
    summary.reward_std = std::sqrt(std::max(0.0, var));
  }
  summary.mean_tokens = tokens / episodes;
  return summary;
}

std::filesystem::path run_training(const RunConfig& cfg,
                                   const RunOptions& opts) {
  cfg.validate();
  if (cfg.output_dir.empty()) {
    throw Error("config", "run.output_dir must be set for training runs");
  }
  const fs::path run_dir(cfg.output_dir);
  fs::create_directories(run_dir / "checkpoints");
  RunLock lock(run_dir);

  const std::string snapshot = serialize_config(cfg);
  const fs::path snapshot_path = run_dir / "config.snapshot";
  if (fs::exists(snapshot_path)) {
    std::ifstream in(snapshot_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (buf.str() != snapshot) {
      throw Error("usage",
                  "run directory holds a different config; refusing to mix");
    }
  } else {
    std::ofstream out(snapshot_path, std::ios::trunc);
    out << snapshot;
  }

  const TrainSetup setup = cfg.to_setup();
  const fs::path metrics_path = run_dir / "metrics.csv";
  const fs::path timing_path = run_dir / "timing.csv";
  const fs::path evals_path = run_dir / "evals.csv";

  RunState state;
  const fs::path ckpt = latest_checkpoint(run_dir);
  if (!ckpt.empty()) {
    state = load_state(cfg, ckpt);
    truncate_csv(metrics_path, state.iteration);
    truncate_csv(timing_path, state.iteration);
    if (cfg.eval_interval > 0 && fs::exists(evals_path)) {
      truncate_csv(evals_path,
                   state.iteration / static_cast<uint64_t>(cfg.eval_interval));
    }
    log_info("resuming " + run_dir.string() + " from iteration " +
             std::to_string(state.iteration));
  } else {
    state = fresh_state(cfg);
    std::ofstream metrics(metrics_path, std::ios::trunc);
    metrics << metrics_header(setup.game.n) << "\n";
    std::ofstream timing(timing_path, std::ios::trunc);
    timing << "iteration,wall_ms\n";
    if (cfg.eval_interval > 0) {
      std::ofstream evals(evals_path, std::ios::trunc);
      evals << "iteration,reward_mean,reward_std,mean_tokens\n";
    }
    save_state(run_dir, state);  // iteration 0: the initial parameters
  }

  std::ofstream metrics(metrics_path, std::ios::app);
  std::ofstream timing(timing_path, std::ios::app);

  try {
    for (uint64_t it = state.iteration + 1;
         it <= static_cast<uint64_t>(cfg.iterations); ++it) {
      const auto start = std::chrono::steady_clock::now();
      IterationMetrics m;
      if (cfg.mode == RunMode::kCompetition) {
        m = self_play_iteration(setup, cfg.competition, state.nets[0],
                                *state.pool, it);
      } else {
        m = train_iteration(setup, state.nets, it);
      }
      state.iteration = it;
      const double wall_ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - start)
              .count();

      metrics << metrics_row(it, m) << "\n";
      metrics.flush();
      timing << it << "," << fmt(wall_ms) << "\n";
      timing.flush();
      log_debug("iteration " + std::to_string(it) + " reward " +
                fmt(m.mean_reward));

      if (cfg.eval_interval > 0 &&
          it % static_cast<uint64_t>(cfg.eval_interval) == 0) {
        const EvalSummary s =
            evaluate_params(cfg, state.nets, cfg.eval_episodes);
        std::ofstream evals(evals_path, std::ios::app);
        evals << it << "," << fmt(s.reward_mean) << "," << fmt(s.reward_std)
              << "," << fmt(s.mean_tokens) << "\n";
      }

      const bool last = it == static_cast<uint64_t>(cfg.iterations);
      if (it % static_cast<uint64_t>(cfg.checkpoint_interval) == 0 || last) {
        save_state(run_dir, state);
      }
      if (opts.stop_after > 0 &&
          it >= static_cast<uint64_t>(opts.stop_after) && !last) {
        log_info("stopping after iteration " + std::to_string(it) +
                 " as requested");
        return run_dir;
      }
    }
  } catch (const Error& e) {
    std::ofstream failed(run_dir / "FAILED", std::ios::trunc);
    failed << "iteration = " << state.iteration + 1 << "\n"
           << "seed = " << cfg.seed << "\n"
           << "error = " << e.code() << ": " << e.what() << "\n";
    throw;
  }

  write_eval_summary(run_dir,
                     evaluate_params(cfg, state.nets, cfg.eval_episodes));
  log_info("run complete: " + run_dir.string());
  return run_dir;
}

std::filesystem::path run_training(const std::filesystem::path& config_path,
                                   const RunOptions& opts) {
  return run_training(parse_config_file(config_path), opts);
}

EvalSummary evaluate_run(const std::filesystem::path& run_dir,
                         int episodes_override) {
  const fs::path snapshot = run_dir / "config.snapshot";
  if (!fs::exists(snapshot)) {
    throw Error("usage", "no config.snapshot in " + run_dir.string());
  }
  const RunConfig cfg = parse_config_file(snapshot);
  const fs::path ckpt = latest_checkpoint(run_dir);
  if (ckpt.empty()) {
    throw Error("usage", "no checkpoint in " + run_dir.string());
  }
  const RunState state = load_state(cfg, ckpt);
  const int episodes =
      episodes_override > 0 ? episodes_override : cfg.eval_episodes;
  return write_eval_summary(run_dir,
                            evaluate_params(cfg, state.nets, episodes));
}

std::vector<SweepRow> sweep_n(const RunConfig& base,
                              std::span<const int> n_values) {
  if (n_values.empty()) throw Error("usage", "sweep needs at least one n");
  if (base.output_dir.empty()) {
    throw Error("config", "run.output_dir must be set for sweeps");
  }
  std::vector<int> ns(n_values.begin(), n_values.end());
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  const fs::path root(base.output_dir);
  fs::create_directories(root);
  std::vector<SweepRow> rows;
  for (int n : ns) {
    RunConfig cfg = base;
    cfg.n = n;
    cfg.output_dir = (root / ("n_" + std::to_string(n))).string();
    SweepRow row;
    row.n = n;
    try {
      run_training(cfg);
      row.summary = evaluate_run(cfg.output_dir);
      row.ok = true;
    } catch (const Error& e) {
      log_info("sweep n=" + std::to_string(n) + " failed: " + e.what());
      std::ofstream fail(root / "failures.log", std::ios::app);
      fail << "n=" << n << " " << e.code() << ": " << e.what() << "\n";
    }
    rows.push_back(row);
  }

  std::ofstream out(root / "sweep.csv", std::ios::trunc);
  out << "n,reward_mean,reward_std\n";
  for (const SweepRow& r : rows) {
    out << r.n << "," << (r.ok ? fmt(r.summary.reward_mean) : "nan") << ","
        << (r.ok ? fmt(r.summary.reward_std) : "nan") << "\n";
  }
  return rows;
}

std::vector<AblationRow> ablation_grid(const RunConfig& base) {
  if (base.mode != RunMode::kCooperative) {
    throw Error("usage", "the ablation grid applies to cooperative mode");
  }
  if (base.output_dir.empty()) {
    throw Error("config", "run.output_dir must be set for the ablation grid");
  }
  const fs::path root(base.output_dir);
  fs::create_directories(root);

  const bool flags[4][2] = {
      {false, false}, {true, false}, {false, true}, {true, true}};
  std::vector<AblationRow> rows;
  for (const auto&[learned, centralized] : flags) {
    RunConfig cfg = base;
    cfg.learned_decomposition = learned;
    cfg.centralized_critic = centralized;
    cfg.output_dir = (root / (std::string("cell_l") + (learned ? "1" : "0") +
                              "_c" + (centralized ? "1" : "0")))
                         .string();
    run_training(cfg);
    AblationRow row;
    row.learned = learned;
    row.centralized = centralized;
    row.summary = evaluate_run(cfg.output_dir);
    rows.push_back(row);
  }

  std::ofstream out(root / "ablation.csv", std::ios::trunc);
  out << "learned_decomposition,centralized_critic,reward_mean,reward_std\n";
  for (const AblationRow& r : rows) {
    out << (r.learned ? "true" : "false") << ","
        << (r.centralized ? "true" : "false") << ","
        << fmt(r.summary.reward_mean) << "," << fmt(r.summary.reward_std)
        << "\n";
  }
  return rows;
}

std::vector<std::filesystem::path> emit_plots(
    std::span<const std::filesystem::path> run_dirs,
    const std::filesystem::path& out_dir) {
  struct Curve {
    std::vector<std::vector<double>> rewards;  // one vector per run
  };
  std::map<std::string, Curve> groups;

  for (const fs::path& dir : run_dirs) {
    const fs::path snapshot = dir / "config.snapshot";
    std::string tag = dir.filename().string();
    if (fs::exists(snapshot)) {
      const RunConfig cfg = parse_config_file(snapshot);
      if (!cfg.tag.empty()) tag = cfg.tag;
    }
    std::vector<double> rewards;
    const fs::path metrics = dir / "metrics.csv";
    if (fs::exists(metrics)) {
      const std::vector<std::string> lines = read_lines(metrics);
      for (size_t k = 1; k < lines.size(); ++k) {
        const auto first_comma = lines[k].find(',');
        const auto second_comma = lines[k].find(',', first_comma + 1);
        rewards.push_back(std::stod(
            lines[k].substr(first_comma + 1, second_comma - first_comma - 1)));
      }
    }
    if (rewards.empty()) {
      log_info("no metrics rows in " + dir.string() + "; emitting nothing for it");
      continue;
    }
    groups[tag].rewards.push_back(std::move(rewards));
  }

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& [tag, curve] : groups) {
    std::string safe = tag;
    for (char& c : safe) {
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    }
    const fs::path file = out_dir / (safe + "_reward.csv");
    std::ofstream out(file, std::ios::trunc);
    out << "iteration,reward_mean,reward_std\n";
    size_t rows = curve.rewards.front().size();
    for (const auto& r : curve.rewards) rows = std::min(rows, r.size());
    const double k = static_cast<double>(curve.rewards.size());
    for (size_t it = 0; it < rows; ++it) {
      double mean = 0.0;
      for (const auto& r : curve.rewards) mean += r[it];
      mean /= k;
      double std_dev = 0.0;
      if (curve.rewards.size() > 1) {
        double var = 0.0;
        for (const auto& r : curve.rewards) {
          var += (r[it] - mean) * (r[it] - mean);
        }
        std_dev = std::sqrt(var / (k - 1.0));
      }
      out << (it + 1) << "," << fmt(mean) << "," << fmt(std_dev) << "\n";
    }
    written.push_back(file);
  }
  return written;
}

}  // namespace coprompt
