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

#include "adml/config/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>

#include "adml/core/rng.hpp"

namespace adml {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, s, "a number");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "True" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "False" || s == "no" || s == "off" || s == "0") return false;
  bad_value(key, s, "a boolean");
}

template <typename Get>
Field int_field(std::string key, Get ref) {
  return {key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [key, ref](RunConfig& c, const std::string& s) { ref(c) = parse_number<int>(key, s); }};
}

template <typename Get>
Field u64_field(std::string key, Get ref) {
  return {key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [key, ref](RunConfig& c, const std::string& s) { ref(c) = parse_number<std::uint64_t>(key, s); }};
}

template <typename Get>
Field real_field(std::string key, Get ref) {
  return {key, [ref](const RunConfig& c) { return fmt_double(ref(const_cast<RunConfig&>(c))); },
          [key, ref](RunConfig& c, const std::string& s) { ref(c) = parse_number<double>(key, s); }};
}

template <typename Get>
Field bool_field(std::string key, Get ref) {
  return {key, [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [key, ref](RunConfig& c, const std::string& s) { ref(c) = parse_bool(key, s); }};
}

#define ADML_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(u64_field("data.seed", ADML_REF(data.seed)));
    f.push_back(int_field("data.num_train_keywords", ADML_REF(data.num_train_keywords)));
    f.push_back(int_field("data.num_eval_keywords", ADML_REF(data.num_eval_keywords)));
    f.push_back(int_field("data.utterances_per_keyword", ADML_REF(data.utterances_per_keyword)));
    f.push_back(int_field("data.vocab_size", ADML_REF(data.vocab_size)));
    f.push_back(int_field("data.feature_dim", ADML_REF(data.feature_dim)));
    f.push_back(int_field("data.min_phonemes", ADML_REF(data.min_phonemes)));
    f.push_back(int_field("data.max_phonemes", ADML_REF(data.max_phonemes)));
    f.push_back(int_field("data.dur_min", ADML_REF(data.dur_min)));
    f.push_back(int_field("data.dur_max", ADML_REF(data.dur_max)));
    f.push_back(real_field("data.jitter", ADML_REF(data.jitter)));
    f.push_back(real_field("data.speaker", ADML_REF(data.speaker)));
    f.push_back(real_field("data.noise", ADML_REF(data.noise)));
    f.push_back(bool_field("data.mean_normalize", ADML_REF(data.mean_normalize)));

    f.push_back(int_field("model.embed_dim", ADML_REF(model.embed_dim)));
    f.push_back(int_field("model.conv_layers", ADML_REF(model.conv_layers)));
    f.push_back(int_field("model.conv_channels", ADML_REF(model.conv_channels)));
    f.push_back(int_field("model.conv_kernel", ADML_REF(model.conv_kernel)));
    f.push_back(int_field("model.rnn_units", ADML_REF(model.rnn_units)));
    f.push_back(int_field("model.ccsp_hidden", ADML_REF(model.ccsp_hidden)));
    f.push_back(real_field("model.ccsp_eps", ADML_REF(model.ccsp_eps)));

    f.push_back({"losses.phoneme",
                 [](const RunConfig& c) { return std::string(to_string(c.train.losses.phoneme)); },
                 [](RunConfig& c, const std::string& s) {
                   try {
                     c.train.losses.phoneme = parse_phoneme_loss(s);
                   } catch (const std::exception&) {
                     bad_value("losses.phoneme", s, "a phoneme loss kind");
                   }
                 }});
    f.push_back({"losses.utterance",
                 [](const RunConfig& c) { return std::string(c.train.losses.utterance_rp ? "rp" : "none"); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "rp") c.train.losses.utterance_rp = true;
                   else if (s == "none") c.train.losses.utterance_rp = false;
                   else bad_value("losses.utterance", s, "'rp' or 'none'");
                 }});
    f.push_back({"losses.classifier",
                 [](const RunConfig& c) { return std::string(to_string(c.train.losses.classifier)); },
                 [](RunConfig& c, const std::string& s) {
                   try {
                     c.train.losses.classifier = parse_classifier(s);
                   } catch (const std::exception&) {
                     bad_value("losses.classifier", s, "a classifier kind");
                   }
                 }});
    f.push_back(bool_field("losses.monotonic_matching", ADML_REF(train.losses.monotonic_matching)));
    f.push_back(real_field("losses.mm_width", ADML_REF(train.losses.mm_width)));
    f.push_back(real_field("losses.lambda_phn", ADML_REF(train.losses.lambda_phn)));
    f.push_back(real_field("losses.alpha", ADML_REF(train.losses.alpha)));
    f.push_back(real_field("losses.beta", ADML_REF(train.losses.beta)));
    f.push_back(real_field("losses.lambda", ADML_REF(train.losses.lambda)));
    f.push_back(real_field("losses.rp_dist_weight", ADML_REF(train.losses.rp_weights.dist)));
    f.push_back(real_field("losses.rp_angle_weight", ADML_REF(train.losses.rp_weights.angle)));
    f.push_back(real_field("losses.rp_proto_weight", ADML_REF(train.losses.rp_weights.proto)));
    f.push_back(real_field("losses.huber_delta", ADML_REF(train.losses.rp.huber_delta)));
    f.push_back(real_field("losses.proto_tau", ADML_REF(train.losses.rp.proto_tau)));
    f.push_back(real_field("losses.infonce_tau", ADML_REF(train.losses.phn.infonce_tau)));
    f.push_back(real_field("losses.triplet_margin", ADML_REF(train.losses.phn.triplet_margin)));
    f.push_back(real_field("losses.cls_scale", ADML_REF(train.losses.cls_scale)));
    f.push_back(real_field("losses.cls_margin", ADML_REF(train.losses.cls_margin)));
    f.push_back(real_field("losses.sf2_t", ADML_REF(train.losses.sf2_t)));
    f.push_back(real_field("losses.key_triplet_margin", ADML_REF(train.losses.key_triplet_margin)));

    f.push_back(bool_field("adv.enabled_phn", ADML_REF(train.adv.enabled_phn)));
    f.push_back(bool_field("adv.enabled_utt", ADML_REF(train.adv.enabled_utt)));
    f.push_back(real_field("adv.lambda", ADML_REF(train.adv.lambda)));
    f.push_back(int_field("adv.hidden", ADML_REF(train.adv.hidden)));
    f.push_back({"adv.activation",
                 [](const RunConfig& c) {
                   return std::string(c.train.adv.activation == HiddenActivation::kRelu ? "relu" : "tanh");
                 },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "relu") c.train.adv.activation = HiddenActivation::kRelu;
                   else if (s == "tanh") c.train.adv.activation = HiddenActivation::kTanh;
                   else bad_value("adv.activation", s, "'relu' or 'tanh'");
                 }});
    f.push_back(bool_field("adv.normalize_input", ADML_REF(train.adv.normalize_input)));

    f.push_back(int_field("train.keywords_per_batch", ADML_REF(train.keywords_per_batch)));
    f.push_back(int_field("train.utterances_per_keyword", ADML_REF(train.utterances_per_keyword)));
    f.push_back(int_field("train.epochs", ADML_REF(train.epochs)));
    f.push_back(real_field("train.base_lr", ADML_REF(train.base_lr)));
    f.push_back(int_field("train.lr_halving_period", ADML_REF(train.lr_halving_period)));
    f.push_back(real_field("train.weight_decay", ADML_REF(train.weight_decay)));
    f.push_back(real_field("train.grad_clip", ADML_REF(train.grad_clip)));
    f.push_back(real_field("train.adam_beta1", ADML_REF(train.adam_beta1)));
    f.push_back(real_field("train.adam_beta2", ADML_REF(train.adam_beta2)));
    f.push_back(real_field("train.adam_eps", ADML_REF(train.adam_eps)));
    f.push_back(int_field("train.checkpoint_every", ADML_REF(train.checkpoint_every)));
    f.push_back(u64_field("train.seed", ADML_REF(train.seed)));

    f.push_back(int_field("eval.neg_ratio", ADML_REF(eval.neg_ratio)));
    f.push_back({"eval.split",
                 [](const RunConfig& c) { return std::string(c.eval.split == Split::kEval ? "eval" : "train"); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "eval") c.eval.split = Split::kEval;
                   else if (s == "train") c.eval.split = Split::kTrain;
                   else bad_value("eval.split", s, "'eval' or 'train'");
                 }});
    f.push_back(u64_field("eval.seed", ADML_REF(eval.seed)));
    f.push_back(int_field("eval.probe_hidden", ADML_REF(eval.probe.hidden)));
    f.push_back(int_field("eval.probe_steps", ADML_REF(eval.probe.steps)));
    f.push_back(real_field("eval.probe_lr", ADML_REF(eval.probe.lr)));
    return f;
  }();
  return all;
}

#undef ADML_REF

const Field& find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string env_name(const std::string& key) {
  std::string out = "ADML_";
  for (char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

void RunConfig::resolve() {
  model.feature_dim = data.feature_dim;
  model.vocab_size = data.vocab_size;
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (data.num_train_keywords < 1) fail("data.num_train_keywords must be >= 1");
  if (data.num_eval_keywords < 0) fail("data.num_eval_keywords must be >= 0");
  if (data.utterances_per_keyword < 1) fail("data.utterances_per_keyword must be >= 1");
  if (data.vocab_size < 1 || data.feature_dim < 1) fail("data.vocab_size and data.feature_dim must be >= 1");
  if (data.min_phonemes < 1 || data.max_phonemes < data.min_phonemes) fail("data phoneme length range is empty");
  if (data.dur_min < 1 || data.dur_max < data.dur_min) fail("data duration range is invalid");
  if (data.jitter < 0 || data.speaker < 0 || data.noise < 0) fail("data noise levels must be >= 0");
  if (model.embed_dim < 1 || model.conv_layers < 1 || model.conv_channels < 1 || model.rnn_units < 1 ||
      model.ccsp_hidden < 1) {
    fail("model dimensions must be >= 1");
  }
  if (model.conv_kernel < 1 || model.conv_kernel % 2 == 0) fail("model.conv_kernel must be odd");
  if (eval.neg_ratio < 0) fail("eval.neg_ratio must be >= 0");
  if (eval.probe.hidden < 1 || eval.probe.steps < 0) fail("eval probe settings are invalid");
  train.validate();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, value);
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("config root must be a mapping of sections");
  for (const auto& section : root) {
    const std::string name = section.first.as<std::string>();
    if (!section.second.IsMap()) {
      if (section.second.IsNull()) continue;
      throw ConfigError("config section '" + name + "' must be a mapping");
    }
    for (const auto& kv : section.second) {
      const std::string key = name + "." + kv.first.as<std::string>();
      if (!kv.second.IsScalar()) throw ConfigError("config key '" + key + "' must be a scalar");
      apply_override(cfg, key, kv.second.as<std::string>());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void apply_env_overrides(RunConfig& cfg) {
  for (const Field& f : fields()) {
    if (const char* v = std::getenv(env_name(f.key).c_str())) f.set(cfg, v);
  }
}

std::string dump_config(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  std::string current;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string section = f.key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << YAML::EndMap;
      out << YAML::Key << section << YAML::Value << YAML::BeginMap;
      current = section;
    }
    out << YAML::Key << f.key.substr(dot + 1) << YAML::Value << f.get(cfg);
  }
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(dump_config(cfg))); }

std::string data_hash(const CorpusConfig& data) {
  RunConfig tmp;
  tmp.data = data;
  std::string text;
  for (const Field& f : fields()) {
    if (f.key.rfind("data.", 0) == 0) text += f.key + "=" + f.get(tmp) + "\n";
  }
  return hex64(fnv1a64(text));
}

}  // namespace adml
