// Copyright 2026 The Triplet Tagger Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.h"
#include "triplet_tagger/checkpoint.h"
#include "triplet_tagger/corpus.h"
#include "triplet_tagger/errors.h"
#include "triplet_tagger/grad_check_suite.h"
#include "triplet_tagger/metrics.h"
#include "triplet_tagger/random.h"
#include "triplet_tagger/trainer.h"

namespace tagger::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> EnvSeed() {
  const char* raw = std::getenv(kSeedEnvVar);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t value = 0;
  std::istringstream in(raw);
  if (std::string(raw).find('-') != std::string::npos || !(in >> value) || !in.eof()) {
    throw UsageError(std::string(kSeedEnvVar) + " must be a non-negative integer, got '" +
                     raw + "'");
  }
  return value;
}

std::string Hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t HashFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

// JSONL by default; ".conll" files go through the tolerant CoNLL reader.
std::vector<CatalogItem> LoadItems(const fs::path& path, const TagScheme& scheme,
                                   std::ostream& err) {
  if (path.extension() == ".conll") {
    ConllImport imported = ImportConll(path, std::nullopt, scheme);
    for (const std::string& w : imported.warnings) err << "warning: " << w << "\n";
    return std::move(imported.items);
  }
  return LoadCatalog(path, scheme);
}

std::vector<TagSequence> TagNames(const std::vector<std::vector<int>>& ids,
                                  const TagScheme& scheme) {
  std::vector<TagSequence> out;
  out.reserve(ids.size());
  for (const std::vector<int>& row : ids) {
    TagSequence names;
    names.reserve(row.size());
    for (int id : row) names.push_back(scheme.Name(id));
    out.push_back(std::move(names));
  }
  return out;
}

// Predicted tags, BIO-repaired so span extraction is always defined.
std::vector<TagSequence> PredictItems(const Checkpoint& ckpt,
                                      std::span<const CatalogItem> items) {
  std::vector<EncodedItem> encoded;
  encoded.reserve(items.size());
  for (const CatalogItem& item : items) {
    if (item.title_tokens.size() > ckpt.params.config.max_len) {
      throw DimensionError("title of " + item.id + " has " +
                           std::to_string(item.title_tokens.size()) +
                           " tokens, max_len is " +
                           std::to_string(ckpt.params.config.max_len));
    }
    EncodedItem e;
    e.title_ids = EncodeTokens(item.title_tokens, ckpt.vocab);
    encoded.push_back(std::move(e));
  }
  std::vector<TagSequence> tags = TagNames(PredictEncoded(ckpt.params, encoded), ckpt.tags);
  for (TagSequence& t : tags) RepairBio(t);
  return tags;
}

int GenData(std::optional<std::uint64_t> seed, std::size_t n, const fs::path& out_path,
            const std::optional<fs::path>& conll, std::ostream& out) {
  if (n == 0) throw UsageError("gen-data: --n must be at least 1");
  const std::uint64_t s = seed ? *seed : EnvSeed().value_or(1);
  const std::vector<CatalogItem> items = GenerateSynthetic(s, n);
  SaveCatalog(items, out_path);
  if (conll) ExportConll(items, *conll);
  out << "wrote " << items.size() << " items to " << out_path.string() << " (seed " << s
      << ")\n";
  return kExitOk;
}

int TrainCommand(const fs::path& config_path, const std::vector<std::string>& overrides,
                 std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    rc = LoadRunConfig(config_path, overrides, EnvSeed());
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const TagScheme scheme;
  const std::vector<CatalogItem> items = LoadCatalog(rc.catalog, scheme);
  const HoldoutSplit split = SplitHoldout(items, rc.holdout_fraction, rc.effective_split_seed());

  Vocabulary vocab;
  if (rc.train.warm_start) {
    vocab = LoadCheckpoint(*rc.train.warm_start).vocab;
  } else {
    vocab = BuildVocab(split.train, rc.min_freq);
  }
  EncoderConfig encoder = rc.encoder;
  encoder.vocab_size = vocab.size();
  encoder.n_tags = scheme.size();
  const std::vector<EncodedItem> train = EncodeCatalog(split.train, vocab, scheme, encoder.max_len);
  const std::vector<EncodedItem> test = EncodeCatalog(split.test, vocab, scheme, encoder.max_len);

  out << "train " << ModeName(rc.train.mode) << ": " << split.train.size() << " train / "
      << split.test.size() << " holdout items, vocab " << vocab.size() << "\n";
  TrainState state = InitTrainState(encoder, rc.train);
  TrainResult result = Train(rc.train, std::move(state), train, test, [&](const EpochSummary& s) {
    out << "epoch " << s.epoch + 1 << "/" << rc.train.epochs << " loss " << std::setprecision(6)
        << s.mean_total << " ner " << s.mean_ner;
    if (s.mean_triplet) out << " triplet " << *s.mean_triplet;
    if (s.dev_exact_match) out << " holdout_exact_match " << *s.dev_exact_match;
    out << "\n" << std::flush;
  });

  std::error_code ec;
  fs::create_directories(rc.output_dir, ec);
  if (ec) throw DataError("cannot create " + rc.output_dir.string() + ": " + ec.message());

  Checkpoint ckpt{result.state.params, vocab, scheme, result.state.optimizer,
                  result.state.epochs_completed, result.state.global_step,
                  std::string(ModeName(rc.train.mode))};
  SaveCheckpoint(ckpt, rc.output_dir / "checkpoint.bin");
  WriteText(rc.output_dir / "history.csv", result.history.ToCsv());
  SaveCatalog(split.test, rc.output_dir / "holdout.jsonl");

  nlohmann::ordered_json manifest;
  manifest["config"] = rc.ToJson();
  manifest["seeds"] = {{"train", rc.train.seed},
                       {"split", rc.effective_split_seed()},
                       {"init", MixSeed(rc.train.seed, 1)}};
  manifest["data"] = {{"catalog_fnv1a64", Hex64(HashFile(rc.catalog))},
                      {"n_items", items.size()},
                      {"n_train", split.train.size()},
                      {"n_holdout", split.test.size()}};
  manifest["vocab"] = {{"size", vocab.size()}, {"fnv1a64", Hex64(vocab.Hash())}};
  manifest["result"] = {{"epochs_completed", result.state.epochs_completed},
                        {"global_step", result.state.global_step}};
  WriteText(rc.output_dir / "manifest.json", manifest.dump(2) + "\n");
  out << "wrote checkpoint.bin, history.csv, manifest.json, holdout.jsonl to "
      << rc.output_dir.string() << "\n";
  (void)err;
  return kExitOk;
}

struct EvalArgs {
  std::optional<fs::path> checkpoint;
  std::optional<fs::path> predicted;
  std::optional<fs::path> config;
  fs::path data;
  fs::path out;
  std::optional<fs::path> predictions_out;
  std::optional<std::string> name;
};

int EvalCommand(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  if (args.checkpoint.has_value() == args.predicted.has_value()) {
    throw UsageError("eval: give exactly one of --checkpoint or --predicted");
  }
  std::vector<TagSequence> predicted;
  std::vector<CatalogItem> items;
  std::string name;
  if (args.checkpoint) {
    Checkpoint ckpt = LoadCheckpoint(*args.checkpoint);
    if (args.config) {
      RunConfig rc;
      try {
        rc = LoadRunConfig(*args.config, {}, EnvSeed());
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      EncoderConfig expected = rc.encoder;
      expected.vocab_size = ckpt.vocab.size();
      expected.n_tags = TagScheme().size();
      RequireSameConfig(ckpt.params.config, expected);
    }
    items = LoadItems(args.data, ckpt.tags, err);
    predicted = PredictItems(ckpt, items);
    name = args.name.value_or(ckpt.label.empty() ? "model" : ckpt.label);
  } else {
    const TagScheme scheme;
    items = LoadItems(args.data, scheme, err);
    std::vector<CatalogItem> pred_items = LoadItems(*args.predicted, scheme, err);
    if (pred_items.size() != items.size()) {
      throw DataError("eval: " + std::to_string(pred_items.size()) + " predicted sentences for " +
                      std::to_string(items.size()) + " gold sentences");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (pred_items[i].title_tokens != items[i].title_tokens) {
        throw DataError("eval: predicted sentence " + std::to_string(i + 1) + " (" +
                        pred_items[i].id + ") does not match the gold tokens");
      }
      predicted.push_back(std::move(pred_items[i].title_tags));
    }
    name = args.name.value_or("predictions");
  }
  std::vector<TagSequence> gold;
  gold.reserve(items.size());
  for (const CatalogItem& item : items) gold.push_back(item.title_tags);

  const MetricsReport report = Evaluate(name, gold, predicted);
  WriteText(args.out, report.ToJson() + "\n");
  if (args.predictions_out) {
    std::vector<CatalogItem> tagged = items;
    for (std::size_t i = 0; i < tagged.size(); ++i) {
      tagged[i].title_tags = predicted[i];
      tagged[i].description.clear();
    }
    ExportConll(tagged, *args.predictions_out);
  }
  const MetricsReport rows[] = {report};
  out << RenderComparison(rows).table;
  return kExitOk;
}

int CompareCommand(const std::vector<fs::path>& paths, const std::optional<fs::path>& json_out,
                   std::ostream& out) {
  std::vector<MetricsReport> rows;
  for (const fs::path& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read report " + p.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
      rows.push_back(MetricsReport::FromJson(text.str()));
    } catch (const DataError& e) {
      throw DataError(p.string() + ": " + e.what());
    }
  }
  const Comparison comparison = RenderComparison(rows);
  out << comparison.table;
  if (json_out) WriteText(*json_out, comparison.json + "\n");
  return kExitOk;
}

int GradCheckCommand(std::size_t points, std::optional<std::uint64_t> seed, bool fault_fixture,
                     std::ostream& out) {
  GradCheckSuiteOptions options;
  if (points == 0) throw UsageError("grad-check: --points must be at least 1");
  options.points = points;
  if (seed) {
    options.seed = *seed;
  } else if (std::optional<std::uint64_t> env = EnvSeed()) {
    options.seed = *env;
  }
  std::vector<GradCheckCase> cases = StandardGradCheckCases(options);
  if (fault_fixture) cases.push_back(CorruptedGradCheckCase());
  const std::vector<GradCheckResult> results = RunGradCheckSuite(cases, options);

  std::size_t width = 2;
  for (const GradCheckResult& r : results) width = std::max(width, r.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "op"
      << "  points  max_rel_error  status\n";
  bool all_ok = true;
  for (const GradCheckResult& r : results) {
    char err_buf[32];
    std::snprintf(err_buf, sizeof(err_buf), "%.3e", r.max_rel_error);
    out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::right
        << std::setw(6) << r.points << "  " << std::setw(13) << err_buf << "  "
        << (r.passed ? "PASS" : "FAIL") << "\n";
    all_ok = all_ok && r.passed;
  }
  out << (all_ok ? "grad-check passed" : "grad-check FAILED") << " (tolerance "
      << options.tolerance << ")\n";
  return all_ok ? kExitOk : kExitNumeric;
}

int PredictCommand(const fs::path& checkpoint, const std::optional<fs::path>& input,
                   const std::optional<fs::path>& out_path, std::istream& in, std::ostream& out) {
  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  std::ifstream file;
  if (input) {
    file.open(*input);
    if (!file) throw DataError("cannot read " + input->string());
  }
  std::istream& source = input ? static_cast<std::istream&>(file) : in;
  std::vector<CatalogItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    std::vector<std::string> tokens = Tokenize(line);
    if (tokens.empty()) continue;
    char id[32];
    std::snprintf(id, sizeof(id), "line-%06zu", line_no);
    items.push_back(CatalogItem{id, std::move(tokens), {}, ""});
  }
  const std::vector<TagSequence> tags = PredictItems(ckpt, items);
  for (std::size_t i = 0; i < items.size(); ++i) items[i].title_tags = tags[i];
  if (out_path) {
    ExportConll(items, *out_path);
  } else {
    WriteConll(items, out);
  }
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in) {
  CLI::App app{"Multitask title/description NER tagger", "triplet_tagger"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> gen_seed;
  std::size_t gen_n = 0;
  fs::path gen_out;
  std::optional<fs::path> gen_conll;
  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic catalog as JSONL");
  gen->add_option("--seed", gen_seed, "Generator seed (default: $" + std::string(kSeedEnvVar) +
                                          ", then 1)");
  gen->add_option("--n", gen_n, "Number of items")->required();
  gen->add_option("--out", gen_out, "Output JSONL path")->required();
  gen->add_option("--conll", gen_conll, "Also export titles as CoNLL");

  fs::path train_config;
  CLI::App* train = app.add_subcommand("train", "Train a tagger from a JSON run config");
  train->add_option("--config", train_config, "Run config JSON")->required();
  train->allow_extras();
  train->footer("Any config field can be overridden, e.g. --train.lr=0.001 or --train.mode baseline");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score predictions on a labelled catalog");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Trained checkpoint");
  eval->add_option("--predicted", eval_args.predicted,
                   "Pre-computed predictions (JSONL or .conll) instead of a checkpoint");
  eval->add_option("--config", eval_args.config,
                   "Run config whose encoder section must match the checkpoint");
  eval->add_option("--data", eval_args.data, "Gold catalog (JSONL or .conll)")->required();
  eval->add_option("--out", eval_args.out, "Report JSON path")->required();
  eval->add_option("--predictions", eval_args.predictions_out, "Write predicted tags as CoNLL");
  eval->add_option("--name", eval_args.name, "Algorithm name in the report");

  std::vector<fs::path> compare_paths;
  std::optional<fs::path> compare_json;
  CLI::App* compare = app.add_subcommand("compare", "Tabulate metric reports");
  compare->add_option("reports", compare_paths, "Report JSON files")->required();
  compare->add_option("--json", compare_json, "Also write the comparison as JSON");

  std::size_t gc_points = GradCheckSuiteOptions().points;
  std::optional<std::uint64_t> gc_seed;
  bool gc_fault = false;
  CLI::App* grad = app.add_subcommand("grad-check", "Finite-difference check of every op");
  grad->add_option("--points", gc_points, "Random points per op");
  grad->add_option("--seed", gc_seed, "Input seed");
  grad->add_flag("--fault-fixture", gc_fault, "Add a case with a deliberately wrong backward rule");

  fs::path predict_ckpt;
  std::optional<fs::path> predict_in;
  std::optional<fs::path> predict_out;
  CLI::App* predict = app.add_subcommand("predict", "Tag titles, one per line, as CoNLL");
  predict->add_option("--checkpoint", predict_ckpt, "Trained checkpoint")->required();
  predict->add_option("--input", predict_in, "Titles file (default: stdin)");
  predict->add_option("--out", predict_out, "CoNLL output path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return GenData(gen_seed, gen_n, gen_out, gen_conll, out);
    if (*train) return TrainCommand(train_config, train->remaining(), out, err);
    if (*eval) return EvalCommand(eval_args, out, err);
    if (*compare) return CompareCommand(compare_paths, compare_json, out);
    if (*grad) return GradCheckCommand(gc_points, gc_seed, gc_fault, out);
    if (*predict) return PredictCommand(predict_ckpt, predict_in, predict_out, in, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tagger::cli
