#pragma once
// Command-line pipeline: every subcommand is driven by a RunConfig that is
// written next to its outputs, so any run can be repeated from that file.
#include "edu/common.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace edu {

struct RunConfig {
  std::string subcommand;
  std::string family = "chain-arithmetic";
  std::size_t count = 50;
  int difficulty = 4;
  std::string model = "builtin:chain-arithmetic";
  std::vector<std::string> strategies;
  std::vector<std::size_t> max_branches{8};
  double entropy_threshold = 1.0;
  std::vector<double> thresholds{0.8, 1.2, 1.6, 2.0, 2.4};
  std::string whitelist;  // file; empty means the default set
  double prune_threshold = 0.2;
  bool prune_first_branch_only = false;
  std::size_t mcts_depth = 3;
  double temperature = 0.7;
  std::size_t length_cap = 256;
  std::uint64_t seed = 1234;
  std::size_t repeats = 1;
  std::string scorer = "oracle";
  std::string selection = "prm";
  std::string tasks;
  std::vector<std::string> trees;
  std::string dataset;
  std::size_t extra_completions = 0;
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  std::size_t hidden = 0;
  std::size_t batch_size = 32;
  std::size_t bins = 10;
  std::size_t corpus_size = 100000;
  std::size_t order = 5;
  double smoothing = 1e-3;
  // Execution settings; they never change outputs and are not serialized.
  std::string out = ".";
  std::size_t workers = 1;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Raised for invalid flag values; exits with status 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string flag, const std::string& message)
      : std::runtime_error(flag + ": " + message), flag_(std::move(flag)) {}
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

/// Entry point of the `edu` binary. Returns the process exit status: 0 on
/// success, 2 on configuration errors, 1 on runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs one subcommand from an already-validated config.
void run_command(const RunConfig& config, std::ostream& out);

}  // namespace edu
