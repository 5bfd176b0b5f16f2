// spoofguard.cc

// Copyright 2026  SpoofGuard authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spoofguard/autoencoder.h"
#include "spoofguard/config.h"
#include "spoofguard/cqcc.h"
#include "spoofguard/dataset.h"
#include "spoofguard/experiment.h"
#include "spoofguard/metrics.h"
#include "spoofguard/siamese.h"

namespace fs = std::filesystem;
using namespace spoofguard;

namespace {

const char *kUsage =
    "Replay-spoofing countermeasure toolkit.\n"
    "Typical pipeline:\n"
    "  spoofguard synth   --out corpus\n"
    "  spoofguard extract --protocol corpus/protocol.txt --out feats\n"
    "  spoofguard train-ae --protocol corpus/protocol.txt --features feats --out ae.txt\n"
    "  spoofguard encode  --model ae.txt --protocol corpus/protocol.txt --features feats --out bn\n"
    "  spoofguard train   --protocol train.txt --features bn --out siamese.txt\n"
    "  spoofguard score   --model siamese.txt --protocol eval.txt --features bn --out scores.txt\n"
    "  spoofguard eval    --scores scores.txt\n";

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

struct Failure {
  std::string stage;
  std::string message;
};

// Runs `body` and tags any toolkit error with `stage`.
void Stage(const std::string &stage, const std::function<void()> &body) {
  try {
    body();
  } catch (const Error &e) {
    throw Failure{stage, std::string(ErrorCodeName(e.code())) + ": " + e.what()};
  } catch (const std::exception &e) {
    throw Failure{stage, e.what()};
  }
}

Config ResolveConfig(const CommonOptions &opts) {
  Config config;
  Stage("config", [&] {
    if (!opts.config_path.empty()) config.LoadFile(opts.config_path);
    for (const auto &o : opts.overrides) config.Override(o);
    // The real corpus, when present, is found through the environment.
    const char *root = std::getenv("SPOOFGUARD_DATA_ROOT");
    if (root && *root && config.Get("data.protocol").empty() &&
        config.Get("data.train_protocol").empty())
      ApplyDataRoot(&config, root);
  });
  return config;
}

void AddCommon(CLI::App *cmd, CommonOptions *opts) {
  cmd->add_option("-c,--config", opts->config_path, "key = value config file");
  cmd->add_option("--set", opts->overrides, "override a config key (key=value)");
}

/// Snapshot next to a file output, or inside a directory output.
void Snapshot(const Config &config, const fs::path &out, bool is_dir) {
  Stage("snapshot", [&] {
    if (is_dir)
      config.WriteSnapshot(out / "config.txt");
    else
      config.WriteSnapshot(fs::path(out.string() + ".config.txt"));
  });
}

fs::path FeaturePath(const fs::path &dir, const Trial &t) {
  return dir / (t.utterance_id + ".feat");
}

std::vector<Trial> LoadTrials(const std::string &protocol, const std::string &audio_dir) {
  std::vector<Trial> trials;
  Stage("protocol", [&] {
    const fs::path p(protocol);
    trials = ParseProtocolFile(p, audio_dir.empty() ? p.parent_path() / "wav" : fs::path(audio_dir));
  });
  return trials;
}

FeatureSet LoadFeatureSet(const std::vector<Trial> &trials, const fs::path &dir,
                          FeatureKind kind) {
  FeatureSet set;
  Stage("features", [&] {
    set.trials = trials;
    for (const auto &t : trials) set.features.push_back(ReadFeatureFile(FeaturePath(dir, t), kind));
  });
  return set;
}

FeatureKind ParseKind(const std::string &kind) {
  if (kind == "cqcc") return FeatureKind::kCqcc;
  if (kind == "bottleneck") return FeatureKind::kBottleneck;
  throw Failure{"arguments", "unknown feature kind '" + kind + "'"};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{kUsage, "spoofguard"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out, protocol, audio_dir, features, model_path, scores_path, system = "system",
      det_path, kind = "cqcc";

  auto *synth = app.add_subcommand("synth", "generate the synthetic replay corpus");
  AddCommon(synth, &common);
  synth->add_option("--out", out, "output directory")->required();

  auto *extract = app.add_subcommand("extract", "dump CQCC features, one file per trial");
  AddCommon(extract, &common);
  extract->add_option("--protocol", protocol, "protocol file")->required();
  extract->add_option("--audio-dir", audio_dir, "WAV directory (default <protocol dir>/wav)");
  extract->add_option("--out", out, "feature directory")->required();

  auto *train_ae = app.add_subcommand("train-ae", "train the bottleneck autoencoder");
  AddCommon(train_ae, &common);
  train_ae->add_option("--protocol", protocol, "training protocol")->required();
  train_ae->add_option("--features", features, "CQCC feature directory")->required();
  train_ae->add_option("--out", out, "model file")->required();

  auto *encode = app.add_subcommand("encode", "apply a trained autoencoder");
  AddCommon(encode, &common);
  encode->add_option("--model", model_path, "autoencoder model")->required();
  encode->add_option("--protocol", protocol, "protocol file")->required();
  encode->add_option("--features", features, "CQCC feature directory")->required();
  encode->add_option("--out", out, "bottleneck feature directory")->required();

  auto *train = app.add_subcommand("train", "train the Siamese network");
  AddCommon(train, &common);
  train->add_option("--protocol", protocol, "training protocol")->required();
  train->add_option("--features", features, "feature directory")->required();
  train->add_option("--kind", kind, "cqcc | bottleneck");
  train->add_option("--out", out, "model file")->required();

  auto *score = app.add_subcommand("score", "score trials against the stored references");
  AddCommon(score, &common);
  score->add_option("--model", model_path, "Siamese model")->required();
  score->add_option("--protocol", protocol, "protocol file")->required();
  score->add_option("--features", features, "feature directory")->required();
  score->add_option("--kind", kind, "cqcc | bottleneck");
  score->add_option("--out", out, "score file")->required();

  auto *eval = app.add_subcommand("eval", "EER and minimum normalized t-DCF of a score file");
  AddCommon(eval, &common);
  eval->add_option("--scores", scores_path, "score file")->required();
  eval->add_option("--system", system, "system name for the report");
  eval->add_option("--det", det_path, "also write operating points here");

  auto *plan = app.add_subcommand("plan", "run an experiment grid (plan.* keys)");
  AddCommon(plan, &common);
  plan->add_option("--out", out, "output root")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    const Config config = ResolveConfig(common);

    if (*synth) {
      std::vector<Trial> trials;
      Stage("synth", [&] { trials = GenerateSyntheticCorpus(SynthConfigFrom(config), out); });
      Snapshot(config, out, true);
      const KeyCounts c = CountKeys(trials);
      std::cout << "wrote " << trials.size() << " utterances (" << c.bonafide << " bonafide, "
                << c.spoof << " spoof) to " << out << '\n';
    } else if (*extract) {
      const auto trials = LoadTrials(protocol, audio_dir);
      Stage("extract", [&] {
        fs::create_directories(out);
        const CqccExtractor extractor(CqccConfigFrom(config));
        for (const auto &t : trials)
          WriteFeatureFile(extractor.Extract(LoadWav(t.audio_path)), FeaturePath(out, t));
      });
      Snapshot(config, out, true);
      std::cout << "extracted " << trials.size() << " feature files to " << out << '\n';
    } else if (*train_ae) {
      const auto trials = LoadTrials(protocol, "");
      const FeatureSet set = LoadFeatureSet(trials, features, FeatureKind::kCqcc);
      Stage("train-ae", [&] {
        AeTrainReport report;
        const auto model = AeTrain(set.features, static_cast<int>(config.GetInt("ae.bottleneck")),
                                   AeHyperFrom(config), &report);
        SaveAutoencoder(model, out);
        std::cout << "autoencoder " << model.input_dim() << "x" << model.bottleneck_dim()
                  << " loss " << report.epoch_losses.front() << " -> "
                  << report.epoch_losses.back() << '\n';
      });
      Snapshot(config, out, false);
    } else if (*encode) {
      const auto trials = LoadTrials(protocol, "");
      const FeatureSet set = LoadFeatureSet(trials, features, FeatureKind::kCqcc);
      Stage("encode", [&] {
        const auto model = LoadAutoencoder(model_path);
        fs::create_directories(out);
        for (size_t i = 0; i < trials.size(); ++i)
          WriteFeatureFile(AeEncode(model, set.features[i]), FeaturePath(out, trials[i]));
      });
      Snapshot(config, out, true);
      std::cout << "encoded " << trials.size() << " feature files to " << out << '\n';
    } else if (*train) {
      const auto trials = LoadTrials(protocol, "");
      const FeatureSet set = LoadFeatureSet(trials, features, ParseKind(kind));
      Stage("train", [&] {
        const PipelineSettings settings = PipelineSettings::FromConfig(config);
        const SiameseConfig network =
            settings.Network(static_cast<int>(set.features.front().dim()));
        TrainReport report;
        const SiameseModel model =
            TrainSiameseSystem(set, network, settings.classifier,
                               CellSeeds::From(config.GetSeed("siamese.seed")),
                               settings.references, &report);
        SaveSiamese(model, out);
        std::cout << "siamese config " << network.config_id << ": loss " << report.initial_loss
                  << " -> " << report.final_loss << " over " << report.steps << " steps\n";
      });
      Snapshot(config, out, false);
    } else if (*score) {
      const auto trials = LoadTrials(protocol, "");
      const FeatureSet set = LoadFeatureSet(trials, features, ParseKind(kind));
      Stage("score", [&] {
        const SiameseModel model = LoadSiamese(model_path);
        WriteScores(ScoreSiameseSystem(model, set, ScoreModeFrom(config)), fs::path(out));
      });
      Snapshot(config, out, false);
      std::cout << "scored " << trials.size() << " trials to " << out << '\n';
    } else if (*eval) {
      Stage("eval", [&] {
        const ScoreSet scores = ReadScores(fs::path(scores_path));
        const TdcfParams params = TdcfParamsFrom(config);
        if (!det_path.empty()) {
          std::ofstream os(det_path);
          if (!os) Fail(ErrorCode::kIo, "cannot write " + det_path);
          WriteDetCurve(scores, params, os);
        }
        std::cout << "system EER% min-tDCF\n"
                  << FormatReport(Evaluate(system, scores, params)) << '\n';
      });
    } else if (*plan) {
      std::vector<RunRecord> records;
      Stage("plan", [&] { records = RunPlan(ExperimentPlan::FromConfig(config), config, out); });
      size_t failed = 0;
      for (const auto &r : records) {
        std::cout << r.SummaryLine() << (r.resumed ? "  (resumed)" : "") << '\n';
        if (!r.ok) {
          ++failed;
          std::cerr << "cell " << r.cell.Name() << " failed: " << r.failure << '\n';
        }
      }
      if (failed > 0) {
        std::cerr << "spoofguard plan: " << failed << " of " << records.size()
                  << " cells failed; see " << (fs::path(out) / "failures.txt").string() << '\n';
        return 1;
      }
    }
  } catch (const Failure &f) {
    std::cerr << "spoofguard " << f.stage << ": " << f.message << '\n';
    return 1;
  }
  return 0;
}
