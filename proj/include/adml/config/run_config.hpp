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

#ifndef ADML_CONFIG_RUN_CONFIG_HPP_
#define ADML_CONFIG_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adml/data/synth.hpp"
#include "adml/encoders/encoders.hpp"
#include "adml/eval/scoring.hpp"
#include "adml/train/trainer.hpp"

namespace adml {

struct EvalConfig {
  int neg_ratio = 50;
  Split split = Split::kEval;
  std::uint64_t seed = 7;
  ProbeConfig probe;
};

struct RunConfig {
  CorpusConfig data;
  EncoderConfig model;
  TrainConfig train;
  EvalConfig eval;

  // Copies data dimensions into the model section and checks every section.
  void resolve();
};

// Keys are "section.name"; values are parsed the same way as YAML scalars.
using Overrides = std::map<std::string, std::string>;

std::vector<std::string> config_keys();
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::filesystem::path& path);

// Every known key is looked up as ADML_<SECTION>_<NAME> (upper case).
void apply_env_overrides(RunConfig& cfg);

std::string dump_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);
std::string data_hash(const CorpusConfig& data);

}  // namespace adml

#endif  // ADML_CONFIG_RUN_CONFIG_HPP_
