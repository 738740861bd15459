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

#include <CLI11.hpp>

#include <optional>
#include <string>

#include "adml/cli/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Text-enrolled keyword spotting with modality adversarial metric learning"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string corpus;
  std::string checkpoint;
  std::string ladder;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Run configuration (YAML)");
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->add_option("--seed", seed, "Root seed override");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Generate the synthetic corpus");
  add_common(gen);

  CLI::App* train = app.add_subcommand("train", "Train encoders on a corpus");
  add_common(train);
  train->add_option("--corpus", corpus, "Corpus directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "Score held-out trials with a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint archive")->required();
  eval->add_option("--corpus", corpus, "Corpus directory")->required();
  eval->add_option("--out", out, "Output directory")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Train and evaluate every rung of a ladder");
  add_common(ablate);
  ablate->add_option("--ladder", ladder, "Ladder file (YAML)")->required();
  ablate->add_option("--corpus", corpus, "Shared corpus directory (generated when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : adml::kExitConfig;
  }

  const std::optional<std::filesystem::path> cfg =
      config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config);
  if (*gen) return adml::cmd_gen_data(cfg, out, seed);
  if (*train) return adml::cmd_train(cfg, corpus, out, seed);
  if (*eval) return adml::cmd_eval(checkpoint, corpus, out);
  const std::optional<std::filesystem::path> shared =
      corpus.empty() ? std::nullopt : std::optional<std::filesystem::path>(corpus);
  return adml::cmd_ablate(cfg, ladder, shared, out, seed);
}
