// Copyright 2026 The ADML-KWS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADML_CLI_PIPELINE_HPP_
#define ADML_CLI_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adml/config/run_config.hpp"
#include "adml/eval/scoring.hpp"
#include "adml/train/trainer.hpp"

namespace adml {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

// Maps the error taxonomy onto process exit codes.
int exit_code_for(const std::exception& e);

// Defaults, then the file, then ADML_* environment variables; resolved and validated.
RunConfig build_config(const std::optional<std::filesystem::path>& path, const Overrides& overrides = {});

struct TrainResult {
  TrainState state;
  std::vector<EpochRecord> epochs;
};

// out_dir may be empty for in-memory runs.
TrainResult train_run(const RunConfig& cfg, const Corpus& corpus, const std::filesystem::path& out_dir);

struct EvalResult {
  TrialSet trials;
  MetricReport report;
  std::optional<ProbeResult> probe;
};

EvalResult eval_run(const RunConfig& cfg, const Model& model, const Corpus& corpus, const std::filesystem::path& out_dir);

void write_scores(const std::filesystem::path& path, const TrialSet& trials);
TrialSet read_scores(const std::filesystem::path& path);

Model load_checkpoint(const std::filesystem::path& path, RunConfig* cfg_out = nullptr);

struct Rung {
  std::string name;
  Overrides set;
};

struct Ladder {
  std::vector<Rung> rungs;
  std::vector<std::uint64_t> seeds;
};

Ladder parse_ladder(const std::string& yaml_text);
Ladder load_ladder(const std::filesystem::path& path);

struct LadderCell {
  std::string rung;
  std::uint64_t seed = 0;
  MetricReport report;
  double probe_accuracy = 0.0;
  std::string data_hash;
  std::string config_hash;
};

using CellCallback = std::function<void(const LadderCell&)>;

// Runs every rung for every seed on one shared corpus; cells are appended to out_dir/results.jsonl as they finish.
std::vector<LadderCell> run_ladder(const RunConfig& base, const Ladder& ladder, const Corpus& corpus,
                                   const std::filesystem::path& out_dir, const CellCallback& on_cell = {});

std::string ladder_table(const Ladder& ladder, const std::vector<LadderCell>& cells);

int cmd_gen_data(const std::optional<std::filesystem::path>& config, const std::filesystem::path& out,
                 std::optional<std::uint64_t> seed);
int cmd_train(const std::optional<std::filesystem::path>& config, const std::filesystem::path& corpus,
              const std::filesystem::path& out, std::optional<std::uint64_t> seed);
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& corpus,
             const std::filesystem::path& out);
int cmd_ablate(const std::optional<std::filesystem::path>& config, const std::filesystem::path& ladder,
               const std::optional<std::filesystem::path>& corpus, const std::filesystem::path& out,
               std::optional<std::uint64_t> seed);

}  // namespace adml

#endif  // ADML_CLI_PIPELINE_HPP_
