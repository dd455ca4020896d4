#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wristnet/preprocess.hpp"
#include "wristnet/synth.hpp"
#include "wristnet/training.hpp"

namespace wristnet::cli {

// Effective settings of one invocation. The JSON form is what --config
// reads and what the run manifest echoes under "config".
struct CliConfig {
  SynthSpec synth;
  ModelConfig model;
  std::size_t n_batches = 10;
  std::size_t workers = 1;
  ResampleMethod resample = ResampleMethod::Fourier;
  double val_fraction = 0.1;  // train: share of participants held out for early stopping
};

nlohmann::json to_json(const CliConfig& config);
// Accepts either a config document or a run manifest (its "config" field).
CliConfig cli_config_from_json(const nlohmann::json& j);

// Runs one command line. Returns the process exit status: 0 on success,
// 1 on runtime or integrity failures, 2 on usage and validation errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wristnet::cli
