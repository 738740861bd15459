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

#include "adml/io/archive.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace adml::io {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'M', 'L', 'A', 'R', 'C', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("archive: unexpected end of data");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

void write_array(std::ostream& os, const Matrix& m) {
  put<std::uint32_t>(os, 2);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put<double>(os, m.data()[i]);
}

Matrix read_array(std::istream& is) {
  const auto rank = get<std::uint32_t>(is);
  if (rank != 2) throw IoError("array: unsupported rank " + std::to_string(rank));
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw IoError("array: implausible shape");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>(is);
  return m;
}

void save_array(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os = open_out(path);
  write_array(os, m);
  if (!os) throw IoError("write failed: " + path.string());
}

Matrix load_array(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  return read_array(is);
}

void save_archive(const std::filesystem::path& path, const Archive& archive) {
  std::ofstream os = open_out(path);
  os.write(kMagic, sizeof(kMagic));
  const std::string manifest = archive.manifest.dump();
  put<std::uint64_t>(os, manifest.size());
  os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  put<std::uint64_t>(os, archive.arrays.size());
  for (const auto& [name, m] : archive.arrays) {
    put<std::uint64_t>(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_array(os, m);
  }
  if (!os) throw IoError("write failed: " + path.string());
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a parameter archive: " + path.string());
  }
  auto read_string = [&] {
    const auto n = get<std::uint64_t>(is);
    if (n > (1ULL << 30)) throw IoError("archive: implausible string length");
    std::string s(n, '\0');
    if (!is.read(s.data(), static_cast<std::streamsize>(n))) throw IoError("archive: unexpected end of data");
    return s;
  };
  Archive a;
  try {
    a.manifest = nlohmann::json::parse(read_string());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("archive manifest: ") + e.what());
  }
  const auto count = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = read_string();
    a.arrays.emplace(std::move(name), read_array(is));
  }
  return a;
}

Archive model_archive(Model& model) {
  Archive a;
  model.visit([&](const std::string& name, Matrix& value, ParamGroup) { a.arrays.emplace(name, value); });
  return a;
}

void restore_model(Model& model, const Archive& archive) {
  std::set<std::string> used;
  model.visit([&](const std::string& name, Matrix& value, ParamGroup) {
    auto it = archive.arrays.find(name);
    if (it == archive.arrays.end()) throw IoError("checkpoint lacks parameter " + name);
    if (it->second.rows() != value.rows() || it->second.cols() != value.cols()) {
      std::ostringstream os;
      os << "checkpoint shape mismatch for " << name << ": " << it->second.rows() << "x" << it->second.cols()
         << " vs " << value.rows() << "x" << value.cols();
      throw IoError(os.str());
    }
    value = it->second;
    used.insert(name);
  });
  for (const auto& [name, m] : archive.arrays) {
    if (!used.count(name)) throw IoError("checkpoint has unknown parameter " + name);
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os = open_out(path);
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json corpus_manifest(const Corpus& corpus, const std::string& data_hash) {
  const CorpusConfig& c = corpus.config;
  nlohmann::json j;
  j["format"] = "adml-corpus/1";
  j["data_hash"] = data_hash;
  j["seed"] = c.seed;
  j["vocab_size"] = c.vocab_size;
  j["feature_dim"] = c.feature_dim;
  j["synthesis"] = {{"dur_min", c.dur_min}, {"dur_max", c.dur_max}, {"jitter", c.jitter}, {"speaker", c.speaker},
                    {"noise", c.noise},     {"mean_normalize", c.mean_normalize}};
  j["substreams"] = {"data/lexicon", "data/prototypes", "data/utt/<keyword>/<index>"};
  nlohmann::json kws = nlohmann::json::array();
  for (int k = 0; k < corpus.lexicon.size(); ++k) {
    kws.push_back({{"id", k},
                   {"phonemes", corpus.lexicon.phonemes(k)},
                   {"split", corpus.keyword_split[static_cast<std::size_t>(k)] == Split::kTrain ? "train" : "eval"}});
  }
  j["keywords"] = kws;
  nlohmann::json utts = nlohmann::json::array();
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    const Utterance& utt = corpus.utterances[u];
    utts.push_back({{"index", u},
                    {"keyword", utt.keyword_id},
                    {"frames", utt.features.rows()},
                    {"file", "features/" + std::to_string(u) + ".f64"}});
  }
  j["utterances"] = utts;
  j["config"] = {{"num_train_keywords", c.num_train_keywords}, {"num_eval_keywords", c.num_eval_keywords},
                 {"utterances_per_keyword", c.utterances_per_keyword}, {"min_phonemes", c.min_phonemes},
                 {"max_phonemes", c.max_phonemes}};
  return j;
}

void save_corpus(const std::filesystem::path& dir, const Corpus& corpus, const std::string& data_hash) {
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    save_array(dir / "features" / (std::to_string(u) + ".f64"), corpus.utterances[u].features);
  }
  write_text(dir / "manifest.json", corpus_manifest(corpus, data_hash).dump(2) + "\n");
}

Corpus load_corpus(const std::filesystem::path& dir, std::string* data_hash) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(dir / "manifest.json"));
    Corpus c;
    CorpusConfig& cfg = c.config;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.feature_dim = j.at("feature_dim").get<int>();
    const auto& syn = j.at("synthesis");
    cfg.dur_min = syn.at("dur_min").get<int>();
    cfg.dur_max = syn.at("dur_max").get<int>();
    cfg.jitter = syn.at("jitter").get<double>();
    cfg.speaker = syn.at("speaker").get<double>();
    cfg.noise = syn.at("noise").get<double>();
    cfg.mean_normalize = syn.at("mean_normalize").get<bool>();
    const auto& cc = j.at("config");
    cfg.num_train_keywords = cc.at("num_train_keywords").get<int>();
    cfg.num_eval_keywords = cc.at("num_eval_keywords").get<int>();
    cfg.utterances_per_keyword = cc.at("utterances_per_keyword").get<int>();
    cfg.min_phonemes = cc.at("min_phonemes").get<int>();
    cfg.max_phonemes = cc.at("max_phonemes").get<int>();
    c.lexicon.vocab_size = cfg.vocab_size;
    for (const auto& k : j.at("keywords")) {
      c.lexicon.sequences.push_back(k.at("phonemes").get<std::vector<int>>());
      c.keyword_split.push_back(k.at("split").get<std::string>() == "train" ? Split::kTrain : Split::kEval);
    }
    for (const auto& u : j.at("utterances")) {
      Utterance utt;
      utt.keyword_id = u.at("keyword").get<int>();
      utt.split = c.keyword_split.at(static_cast<std::size_t>(utt.keyword_id));
      utt.features = load_array(dir / u.at("file").get<std::string>());
      c.utterances.push_back(std::move(utt));
    }
    if (data_hash) *data_hash = j.at("data_hash").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corpus manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace adml::io
