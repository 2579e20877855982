#ifndef COPROMPT_CORE_RUN_HPP_
#define COPROMPT_CORE_RUN_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coprompt/config.hpp"

namespace coprompt {

// Run directory layout:
//   config.snapshot   resolved config (byte-stable round trip)
//   metrics.csv       one row per completed iteration (deterministic)
//   timing.csv        per-iteration wall time, excluded from determinism
//   evals.csv         periodic evaluation rows when run.eval_interval > 0
//   checkpoints/      ckpt_NNNNNN.bin tensor archives
//   eval.summary      final evaluation
//   FAILED            written with a diagnostic if the run aborts
struct RunOptions {
  // Stop after this many completed iterations without final checkpoint or
  // evaluation, as an interruption would. 0 runs to completion.
  int stop_after = 0;
};

// Executes (or resumes) the configured training run in cfg.output_dir and
// returns that directory. A run owns its directory exclusively via a lock
// file; a stale config.snapshot that does not match cfg is an error.
std::filesystem::path run_training(const RunConfig& cfg,
                                   const RunOptions& opts = {});
std::filesystem::path run_training(const std::filesystem::path& config_path,
                                   const RunOptions& opts = {});

struct EvalSummary {
  int episodes = 0;
  double reward_mean = 0.0;  // task reward only
  double reward_std = 0.0;
  double mean_tokens = 0.0;  // non-EOS tokens
};

// Greedy or sampled decoding per the config, task reward only, its own seed
// stream. episodes_override = 0 uses run.eval_episodes. Rewrites
// eval.summary in the run directory.
EvalSummary evaluate_run(const std::filesystem::path& run_dir,
                         int episodes_override = 0);

// In-memory evaluation of a parameter set (used internally and by tests).
EvalSummary evaluate_params(const RunConfig& cfg,
                            const std::vector<PrompterNets>& nets,
                            int episodes);

struct SweepRow {
  int n = 0;
  bool ok = false;
  EvalSummary summary;
};

// One run per n (ascending), each in <base output_dir>/n_<n>. Failures are
// recorded and the sweep continues. Writes <base output_dir>/sweep.csv.
std::vector<SweepRow> sweep_n(const RunConfig& base, std::span<const int> n_values);

struct AblationRow {
  bool learned = false;
  bool centralized = false;
  EvalSummary summary;
};

// The 2x2 learned-decomposition x centralized-critic grid with identical
// seeds, each cell in <base output_dir>/cell_l<0|1>_c<0|1>. Writes
// ablation.csv. Requires cooperative mode.
std::vector<AblationRow> ablation_grid(const RunConfig& base);

// Tidy per-tag training-curve data: for each group of runs sharing a config
// tag (untagged runs group by directory name), writes
// <out_dir>/<tag>_reward.csv with iteration, mean and sample std across the
// group. Returns the written files.
std::vector<std::filesystem::path> emit_plots(
    std::span<const std::filesystem::path> run_dirs,
    const std::filesystem::path& out_dir);

// Internal helpers exposed for tests.
std::filesystem::path latest_checkpoint(const std::filesystem::path& run_dir);
std::vector<ParamTensor> pack_run_state(const std::vector<PrompterNets>& nets,
                                        const OpponentPool* pool,
                                        uint64_t iteration);

}  // namespace coprompt

#endif  // COPROMPT_CORE_RUN_HPP_
