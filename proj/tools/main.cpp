// Command-line front end: config-driven training runs, evaluation, sweeps,
// the ablation grid, brute-force enumeration, plot-data emission, and the
// problem-size calculator. Exit code 0 on success; on failure a single
// machine-readable JSON error line goes to stderr.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "coprompt/enumeration.hpp"
#include "coprompt/error.hpp"
#include "coprompt/run.hpp"

namespace {

using coprompt::BigInt;
using coprompt::Error;
using coprompt::RunConfig;

std::vector<int64_t> parse_lengths(const std::string& csv) {
  std::vector<int64_t> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) out.push_back(std::stoll(item));
  return out;
}

int max_len_within_guard(const RunConfig& cfg) {
  if (cfg.enumerate_max_len >= 0) return cfg.enumerate_max_len;
  const BigInt base = cfg.vocab_size - 1;
  BigInt total = 1;
  BigInt term = 1;
  int len = 0;
  while (len < cfg.token_limit) {
    term *= base;
    if (total + term > 10'000'000) break;
    total += term;
    ++len;
  }
  return len;
}

void print_summary(const coprompt::EvalSummary& s) {
  std::cout << "episodes = " << s.episodes << "\n"
            << "reward_mean = " << s.reward_mean << "\n"
            << "reward_std = " << s.reward_std << "\n"
            << "mean_tokens = " << s.mean_tokens << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative prompt optimization runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  std::string n_csv = "1,2,3";
  std::string lengths_csv;
  std::vector<std::string> plot_dirs;
  std::string plot_out = "plots";
  int episodes = 0;
  int stop_after = 0;
  int64_t vocab = 0;

  CLI::App* train = app.add_subcommand("train", "run a training config");
  train->add_option("config", config_path)->required();
  train->add_option("--stop-after", stop_after,
                    "stop after this many iterations (resumable)");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "evaluate a run directory");
  evaluate->add_option("run_dir", run_dir)->required();
  evaluate->add_option("--episodes", episodes);

  CLI::App* sweep = app.add_subcommand("sweep-n", "one run per prompter count");
  sweep->add_option("config", config_path)->required();
  sweep->add_option("--n", n_csv, "comma-separated prompter counts");

  CLI::App* ablate =
      app.add_subcommand("ablate", "2x2 decomposition/critic grid");
  ablate->add_option("config", config_path)->required();

  CLI::App* enumerate_cmd =
      app.add_subcommand("enumerate", "brute-force the oracle optimum");
  enumerate_cmd->add_option("config", config_path)->required();

  CLI::App* plot = app.add_subcommand("plot", "emit training-curve CSVs");
  plot->add_option("run_dirs", plot_dirs)->required()->expected(-1);
  plot->add_option("--out", plot_out);

  CLI::App* size = app.add_subcommand("size", "decomposition problem sizes");
  size->add_option("--vocab", vocab)->required();
  size->add_option("--lengths", lengths_csv, "comma-separated subprompt lengths")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      coprompt::RunOptions opts;
      opts.stop_after = stop_after;
      const auto dir = coprompt::run_training(
          std::filesystem::path(config_path), opts);
      std::cout << dir.string() << "\n";
    } else if (evaluate->parsed()) {
      print_summary(coprompt::evaluate_run(run_dir, episodes));
    } else if (sweep->parsed()) {
      const RunConfig cfg = coprompt::parse_config_file(config_path);
      std::vector<int> ns;
      for (int64_t v : parse_lengths(n_csv)) ns.push_back(static_cast<int>(v));
      const auto rows = coprompt::sweep_n(cfg, ns);
      std::cout << "n,reward_mean,reward_std\n";
      for (const auto& r : rows) {
        if (r.ok) {
          std::cout << r.n << "," << r.summary.reward_mean << ","
                    << r.summary.reward_std << "\n";
        } else {
          std::cout << r.n << ",nan,nan\n";
        }
      }
    } else if (ablate->parsed()) {
      const RunConfig cfg = coprompt::parse_config_file(config_path);
      const auto rows = coprompt::ablation_grid(cfg);
      std::cout << "learned_decomposition,centralized_critic,reward_mean,"
                   "reward_std\n";
      for (const auto& r : rows) {
        std::cout << (r.learned ? "true" : "false") << ","
                  << (r.centralized ? "true" : "false") << ","
                  << r.summary.reward_mean << "," << r.summary.reward_std
                  << "\n";
      }
    } else if (enumerate_cmd->parsed()) {
      const RunConfig cfg = coprompt::parse_config_file(config_path);
      const int max_len = max_len_within_guard(cfg);
      coprompt::Prompt x;
      if (!cfg.prompts.empty()) x = cfg.prompts.front();
      const auto result = coprompt::enumerate_optimal(
          cfg.oracle, x, cfg.vocabulary(), max_len);
      std::cout << "max_len = " << max_len << "\n";
      std::cout << "best_reward = " << result.best_reward << "\n";
      std::cout << "best_sequence =";
      for (coprompt::TokenId t : result.best_sequence) std::cout << " " << t;
      std::cout << "\n";
      std::cout << "states_visited = " << result.states_visited << "\n";
    } else if (plot->parsed()) {
      std::vector<std::filesystem::path> dirs(plot_dirs.begin(),
                                              plot_dirs.end());
      for (const auto& file : coprompt::emit_plots(dirs, plot_out)) {
        std::cout << file.string() << "\n";
      }
    } else if (size->parsed()) {
      const auto lengths = parse_lengths(lengths_csv);
      const auto [multi, single] = coprompt::problem_size(vocab, lengths);
      std::cout << "multi = " << multi.str() << "\n";
      std::cout << "single = " << single.str() << "\n";
    }
  } catch (const Error& e) {
    const nlohmann::json err = {{"error", e.code()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const nlohmann::json err = {{"error", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
