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

#ifndef ADML_IO_ARCHIVE_HPP_
#define ADML_IO_ARCHIVE_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include <json.hpp>

#include "adml/core/types.hpp"
#include "adml/data/synth.hpp"
#include "adml/train/model.hpp"

namespace adml::io {

// Shape-tagged array: u32 rank (2), u64 rows, u64 cols, then row-major float64, all little-endian.
void write_array(std::ostream& os, const Matrix& m);
Matrix read_array(std::istream& is);

void save_array(const std::filesystem::path& path, const Matrix& m);
Matrix load_array(const std::filesystem::path& path);

struct Archive {
  nlohmann::json manifest = nlohmann::json::object();
  std::map<std::string, Matrix> arrays;
};

void save_archive(const std::filesystem::path& path, const Archive& archive);
Archive load_archive(const std::filesystem::path& path);

Archive model_archive(Model& model);
// Overwrites every parameter of `model` from the archive; names and shapes must match exactly.
void restore_model(Model& model, const Archive& archive);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// manifest.json plus features/<utterance>.f64
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus, const std::string& data_hash);
Corpus load_corpus(const std::filesystem::path& dir, std::string* data_hash = nullptr);
nlohmann::json corpus_manifest(const Corpus& corpus, const std::string& data_hash);

}  // namespace adml::io

#endif  // ADML_IO_ARCHIVE_HPP_
