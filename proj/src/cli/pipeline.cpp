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

#include "adml/cli/pipeline.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "adml/io/archive.hpp"

namespace adml {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitFailure;
}

RunConfig build_config(const std::optional<fs::path>& path, const Overrides& overrides) {
  RunConfig cfg = path ? load_config(*path) : RunConfig{};
  apply_env_overrides(cfg);
  for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
  cfg.resolve();
  return cfg;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json metrics_json(const StepMetrics& m) {
  return {{"l_utt", m.l_utt},
          {"l_key", m.l_key},
          {"l_mm", m.l_mm},
          {"l_phn", m.l_phn},
          {"l_adv_phn", m.l_adv_phn},
          {"l_adv_utt", m.l_adv_utt},
          {"total", m.total},
          {"objective", m.objective},
          {"grad_norm_emb", m.grad_norm_emb},
          {"grad_norm_mod", m.grad_norm_mod},
          {"modality_accuracy", m.modality_accuracy}};
}

json report_json(const MetricReport& r) {
  return {{"ap", r.ap}, {"eer", r.eer}, {"auc", r.auc}, {"positives", r.positives}, {"negatives", r.negatives}};
}

void save_checkpoint(const fs::path& path, TrainState& state, const RunConfig& cfg) {
  io::Archive a = io::model_archive(state.model);
  a.manifest = {{"config_hash", config_hash(cfg)},
                {"data_hash", data_hash(cfg.data)},
                {"seed", cfg.train.seed},
                {"epoch", state.epoch},
                {"step", state.step},
                {"num_classes", state.model.head.num_classes()},
                {"config", dump_config(cfg)}};
  io::save_archive(path, a);
}

int num_classes(const Corpus& corpus) { return static_cast<int>(corpus.keywords(Split::kTrain).size()); }

}  // namespace

TrainResult train_run(const RunConfig& cfg, const Corpus& corpus, const fs::path& out_dir) {
  TrainResult result;
  result.state = init_train_state(cfg.model, cfg.train, num_classes(corpus));
  std::ofstream log;
  if (!out_dir.empty()) {
    io::write_text(out_dir / "config.yaml", dump_config(cfg));
    log.open(out_dir / "metrics.jsonl", std::ios::trunc);
    if (!log) throw IoError("cannot write " + (out_dir / "metrics.jsonl").string());
  }
  fit(result.state, corpus, cfg.train, [&](const EpochRecord& rec, TrainState& st) {
    result.epochs.push_back(rec);
    if (out_dir.empty()) return;
    json line = metrics_json(rec.mean);
    line["epoch"] = rec.epoch;
    line["step"] = rec.step;
    line["lr"] = rec.lr;
    line["batches"] = rec.batches;
    log << line.dump() << "\n" << std::flush;
    const int every = cfg.train.checkpoint_every;
    if (every > 0 && st.epoch % every == 0 && st.epoch < cfg.train.epochs) {
      save_checkpoint(out_dir / ("checkpoint_epoch" + std::to_string(st.epoch) + ".adml"), st, cfg);
    }
  });
  if (!out_dir.empty()) save_checkpoint(out_dir / "checkpoint.adml", result.state, cfg);
  return result;
}

void write_scores(const fs::path& path, const TrialSet& trials) {
  if (trials.scores.size() != trials.trials.size()) throw StructuralError("write_scores: trials are not scored");
  std::ostringstream os;
  os << "trial_id\tkeyword_id\tutterance\tlabel\tscore\n";
  for (std::size_t i = 0; i < trials.trials.size(); ++i) {
    const Trial& t = trials.trials[i];
    os << t.trial_id << '\t' << t.keyword_id << '\t' << t.utterance << '\t' << (t.match ? 1 : 0) << '\t'
       << g17(trials.scores[i]) << '\n';
  }
  io::write_text(path, os.str());
}

TrialSet read_scores(const fs::path& path) {
  std::istringstream is(io::read_text(path));
  std::string line;
  std::getline(is, line);
  TrialSet out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Trial t;
    int label = 0;
    std::string score;
    if (!(ls >> t.trial_id >> t.keyword_id >> t.utterance >> label >> score)) {
      throw IoError("malformed score line: " + line);
    }
    t.match = label == 1;
    out.trials.push_back(t);
    out.scores.push_back(std::strtod(score.c_str(), nullptr));
  }
  return out;
}

EvalResult eval_run(const RunConfig& cfg, const Model& model, const Corpus& corpus, const fs::path& out_dir) {
  if (corpus.keywords(cfg.eval.split).empty()) throw StructuralError("corpus has no keywords in the eval split");
  EvalResult r;
  Rng rng = substream(cfg.eval.seed, "eval/trials");
  r.trials = generate_trials(corpus.segments(cfg.eval.split), corpus.keywords(cfg.eval.split), cfg.eval.neg_ratio, rng);
  r.trials = score_trials(model, corpus, std::move(r.trials));
  r.report = compute_metrics(r.trials);
  if (cfg.eval.probe.steps > 0) {
    r.probe = train_modality_probe(frozen_embeddings(model, corpus, cfg.eval.split), cfg.eval.probe, cfg.eval.seed);
  }
  if (!out_dir.empty()) {
    write_scores(out_dir / "scores.tsv", r.trials);
    json rep = report_json(r.report);
    rep["config_hash"] = config_hash(cfg);
    rep["data_hash"] = data_hash(cfg.data);
    rep["neg_ratio"] = cfg.eval.neg_ratio;
    rep["trials"] = r.trials.trials.size();
    rep["negatives_with_replacement"] = r.trials.negatives_with_replacement;
    if (r.probe) rep["probe"] = {{"train_accuracy", r.probe->train_accuracy}, {"test_accuracy", r.probe->test_accuracy}};
    io::write_text(out_dir / "report.json", rep.dump(2) + "\n");
  }
  return r;
}

Model load_checkpoint(const fs::path& path, RunConfig* cfg_out) {
  io::Archive a = io::load_archive(path);
  RunConfig cfg;
  int classes = 0;
  try {
    cfg = parse_config(a.manifest.at("config").get<std::string>());
    classes = a.manifest.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw IoError("checkpoint manifest: " + std::string(e.what()));
  }
  cfg.resolve();
  Model m = Model::create(cfg.model, cfg.train.losses, cfg.train.adv, classes, cfg.train.seed);
  io::restore_model(m, a);
  if (cfg_out) *cfg_out = cfg;
  return m;
}

Ladder parse_ladder(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("ladder is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("ladder must be a mapping with 'seeds' and 'rungs'");
  Ladder l;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (key == "seeds") {
      for (const auto& s : kv.second) l.seeds.push_back(s.as<std::uint64_t>());
    } else if (key == "rungs") {
      for (const auto& r : kv.second) {
        Rung rung;
        for (const auto& f : r) {
          const std::string fk = f.first.as<std::string>();
          if (fk == "name") {
            rung.name = f.second.as<std::string>();
          } else if (fk == "set") {
            for (const auto& o : f.second) rung.set[o.first.as<std::string>()] = o.second.as<std::string>();
          } else {
            throw ConfigError("unknown rung key '" + fk + "'");
          }
        }
        if (rung.name.empty()) throw ConfigError("every rung needs a name");
        RunConfig probe;
        for (const auto& [k, v] : rung.set) apply_override(probe, k, v);
        l.rungs.push_back(std::move(rung));
      }
    } else {
      throw ConfigError("unknown ladder key '" + key + "'");
    }
  }
  if (l.rungs.empty() || l.seeds.empty()) throw ConfigError("ladder needs at least one rung and one seed");
  return l;
}

Ladder load_ladder(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read ladder file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_ladder(ss.str());
}

std::vector<LadderCell> run_ladder(const RunConfig& base, const Ladder& ladder, const Corpus& corpus,
                                   const fs::path& out_dir, const CellCallback& on_cell) {
  std::vector<LadderCell> cells;
  std::ofstream results;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    results.open(out_dir / "results.jsonl", std::ios::trunc);
    if (!results) throw IoError("cannot write " + (out_dir / "results.jsonl").string());
  }
  for (const Rung& rung : ladder.rungs) {
    for (std::uint64_t seed : ladder.seeds) {
      RunConfig cfg = base;
      for (const auto& [k, v] : rung.set) apply_override(cfg, k, v);
      cfg.train.seed = seed;
      cfg.resolve();
      const fs::path dir = out_dir.empty() ? fs::path() : out_dir / rung.name / ("seed_" + std::to_string(seed));
      TrainResult tr = train_run(cfg, corpus, dir);
      EvalResult ev = eval_run(cfg, tr.state.model, corpus, dir);
      LadderCell cell{rung.name, seed, ev.report, ev.probe ? ev.probe->test_accuracy : std::nan(""),
                      data_hash(cfg.data), config_hash(cfg)};
      cells.push_back(cell);
      if (results.is_open()) {
        json line = report_json(cell.report);
        line["rung"] = cell.rung;
        line["seed"] = cell.seed;
        line["probe_accuracy"] = cell.probe_accuracy;
        line["data_hash"] = cell.data_hash;
        line["config_hash"] = cell.config_hash;
        results << line.dump() << "\n" << std::flush;
      }
      if (on_cell) on_cell(cell);
    }
  }
  return cells;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

std::string pm(const std::vector<double>& v, double scale) {
  const auto [m, s] = mean_std(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", m * scale, s * scale);
  return buf;
}

}  // namespace

std::string ladder_table(const Ladder& ladder, const std::vector<LadderCell>& cells) {
  std::ostringstream os;
  os << "| rung | runs | AP (%) | EER (%) | AUC (%) | probe acc (%) |\n";
  os << "|---|---|---|---|---|---|\n";
  for (const Rung& rung : ladder.rungs) {
    std::vector<double> ap, eer_v, auc_v, probe;
    for (const LadderCell& c : cells) {
      if (c.rung != rung.name) continue;
      ap.push_back(c.report.ap);
      eer_v.push_back(c.report.eer);
      auc_v.push_back(c.report.auc);
      probe.push_back(c.probe_accuracy);
    }
    if (ap.empty()) continue;
    os << "| " << rung.name << " | " << ap.size() << " | " << pm(ap, 100) << " | " << pm(eer_v, 100) << " | "
       << pm(auc_v, 100) << " | " << pm(probe, 100) << " |\n";
  }
  return os.str();
}

namespace {

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

Corpus corpus_for(const RunConfig& cfg, const fs::path& dir) {
  std::string stored;
  Corpus c = io::load_corpus(dir, &stored);
  const std::string expected = data_hash(cfg.data);
  if (stored != expected) {
    throw ConfigError("corpus data hash " + stored + " does not match config data hash " + expected);
  }
  return c;
}

}  // namespace

int cmd_gen_data(const std::optional<fs::path>& config, const fs::path& out, std::optional<std::uint64_t> seed) {
  return guarded([&] {
    Overrides o;
    if (seed) o["data.seed"] = std::to_string(*seed);
    const RunConfig cfg = build_config(config, o);
    const Corpus corpus = generate_corpus(cfg.data);
    io::save_corpus(out, corpus, data_hash(cfg.data));
    io::write_text(out / "config.yaml", dump_config(cfg));
    std::cout << "wrote " << corpus.lexicon.size() << " keywords, " << corpus.utterances.size()
              << " utterances to " << out.string() << " (data hash " << data_hash(cfg.data) << ")\n";
  });
}

int cmd_train(const std::optional<fs::path>& config, const fs::path& corpus_dir, const fs::path& out,
              std::optional<std::uint64_t> seed) {
  return guarded([&] {
    Overrides o;
    if (seed) o["train.seed"] = std::to_string(*seed);
    const RunConfig cfg = build_config(config, o);
    const Corpus corpus = corpus_for(cfg, corpus_dir);
    TrainResult r = train_run(cfg, corpus, out);
    const StepMetrics last = r.epochs.empty() ? StepMetrics{} : r.epochs.back().mean;
    std::cout << "trained " << r.state.epoch << " epochs (" << r.state.step << " steps); final L_emb " << g17(last.total)
              << "\n";
  });
}

int cmd_eval(const fs::path& checkpoint, const fs::path& corpus_dir, const fs::path& out) {
  return guarded([&] {
    RunConfig cfg;
    const Model model = load_checkpoint(checkpoint, &cfg);
    apply_env_overrides(cfg);
    cfg.resolve();
    const Corpus corpus = corpus_for(cfg, corpus_dir);
    io::write_text(out / "config.yaml", dump_config(cfg));
    const EvalResult r = eval_run(cfg, model, corpus, out);
    std::cout << "trials " << r.trials.trials.size() << "  AP " << g17(r.report.ap) << "  EER " << g17(r.report.eer)
              << "  AUC " << g17(r.report.auc) << "\n";
  });
}

int cmd_ablate(const std::optional<fs::path>& config, const fs::path& ladder_path,
               const std::optional<fs::path>& corpus_dir, const fs::path& out, std::optional<std::uint64_t> seed) {
  return guarded([&] {
    const RunConfig base = build_config(config);
    Ladder ladder = load_ladder(ladder_path);
    if (seed) ladder.seeds = {*seed};
    Corpus corpus;
    if (corpus_dir) {
      corpus = corpus_for(base, *corpus_dir);
    } else {
      corpus = generate_corpus(base.data);
      io::save_corpus(out / "corpus", corpus, data_hash(base.data));
    }
    std::vector<LadderCell> cells;
    try {
      cells = run_ladder(base, ladder, corpus, out, [&](const LadderCell& c) {
        cells.push_back(c);
        std::cout << c.rung << " seed " << c.seed << ": AP " << g17(c.report.ap) << " EER " << g17(c.report.eer)
                  << " AUC " << g17(c.report.auc) << "\n"
                  << std::flush;
      });
    } catch (...) {
      io::write_text(out / "table.md", ladder_table(ladder, cells));
      throw;
    }
    const std::string table = ladder_table(ladder, cells);
    io::write_text(out / "table.md", table);
    std::cout << table;
  });
}

}  // namespace adml
