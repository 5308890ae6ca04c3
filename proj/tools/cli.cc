// Copyright 2026 The PTAL Authors
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

#include "cli.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptal/corpus_io.h"
#include "ptal/datagen.h"
#include "ptal/error.h"
#include "ptal/eval.h"
#include "ptal/inference.h"
#include "ptal/keypoint.h"
#include "ptal/localizer.h"
#include "ptal/mapper.h"
#include "ptal/model_io.h"
#include "ptal/run_config.h"

namespace ptal::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Line-delimited JSON progress records on standard error.
class Logger {
 public:
  explicit Logger(bool quiet) : quiet_(quiet) {}

  void Event(const std::string& event, json fields = json::object()) const {
    if (quiet_) return;
    json line;
    line["event"] = event;
    for (auto it = fields.begin(); it != fields.end(); ++it) {
      line[it.key()] = it.value();
    }
    std::cerr << line.dump() << "\n";
  }

 private:
  bool quiet_;
};

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// Flags override the config file, which overrides the defaults. Each flag
// stores its value separately and is applied only when given.
class Overrides {
 public:
  template <typename T, typename Apply>
  CLI::Option* Add(CLI::App* app, const std::string& name,
                   const std::string& help, Apply apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    entries_.emplace_back(opt, [value, apply](RunConfig& c) { apply(c, *value); });
    return opt;
  }

  template <typename Apply>
  CLI::Option* Flag(CLI::App* app, const std::string& name,
                    const std::string& help, Apply apply) {
    CLI::Option* opt = app->add_flag(name, help);
    entries_.emplace_back(opt, [apply](RunConfig& c) { apply(c); });
    return opt;
  }

  void Apply(RunConfig* config) const {
    for (const auto& [opt, apply] : entries_) {
      if (opt->count() > 0) apply(*config);
    }
  }

 private:
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>>
      entries_;
};

struct Common {
  std::string config_path;
  bool quiet = false;
  Overrides overrides;
};

void AddCommon(CLI::App* app, Common* common) {
  app->add_option("--config", common->config_path,
                  "JSON run config; flags take precedence");
  app->add_flag("--quiet", common->quiet, "Suppress progress logging");
  common->overrides.Add<std::uint64_t>(
      app, "--seed", "Seed for every random draw",
      [](RunConfig& c, std::uint64_t v) {
        c.seed = v;
        c.data.seed = v;
      });
  common->overrides.Add<int>(app, "--threads",
                             "Worker threads (default $PTAL_THREADS or 1)",
                             [](RunConfig& c, int v) { c.threads = v; });
}

void AddDataFlags(CLI::App* app, Overrides* o) {
  o->Add<int>(app, "--T", "Frames per video",
              [](RunConfig& c, int v) { c.data.frames = v; });
  o->Add<int>(app, "--D", "Feature dimension",
              [](RunConfig& c, int v) { c.data.feature_dim = v; });
  o->Add<int>(app, "--C", "Number of action classes",
              [](RunConfig& c, int v) { c.data.num_classes = v; });
  o->Add<int>(app, "--videos", "Total number of videos",
              [](RunConfig& c, int v) { c.data.num_videos = v; });
  o->Add<int>(app, "--test-videos", "Videos in the held-out split",
              [](RunConfig& c, int v) { c.data.num_test = v; });
  o->Add<int>(app, "--instances-min", "Fewest instances per video",
              [](RunConfig& c, int v) { c.data.instances_per_video.min = v; });
  o->Add<int>(app, "--instances-max", "Most instances per video",
              [](RunConfig& c, int v) { c.data.instances_per_video.max = v; });
  o->Add<int>(app, "--length-min", "Shortest instance in frames",
              [](RunConfig& c, int v) { c.data.length_range.min = v; });
  o->Add<int>(app, "--length-max", "Longest instance in frames",
              [](RunConfig& c, int v) { c.data.length_range.max = v; });
  o->Add<int>(app, "--gap-min", "Minimum background gap in frames",
              [](RunConfig& c, int v) { c.data.gap_min = v; });
  o->Add<double>(app, "--noise", "Feature noise standard deviation",
                 [](RunConfig& c, double v) { c.data.noise_sigma = v; });
  o->Add<std::string>(app, "--points", "Point label distribution",
                      [](RunConfig& c, const std::string& v) {
                        c.data.point_distribution =
                            data::ParsePointDistribution(v);
                      })
      ->check(CLI::IsMember({"uniform", "gaussian"}));
}

void AddMapperFlags(CLI::App* app, Overrides* o) {
  o->Add<int>(app, "--ts", "Short-video length T_s",
              [](RunConfig& c, int v) { c.ts = v; });
  o->Add<std::size_t>(app, "--pairs", "Simulated training pairs",
                      [](RunConfig& c, std::size_t v) { c.mapper_pairs = v; });
  o->Add<int>(app, "--mapper-batch", "Mapper minibatch size",
              [](RunConfig& c, int v) { c.mapper_batch = v; });
  o->Add<int>(app, "--mapper-max-epochs", "Mapper epoch limit",
              [](RunConfig& c, int v) { c.mapper_max_epochs = v; });
  o->Add<double>(app, "--mapper-min-accuracy",
                 "Fail unless the hold-out accuracy reaches this",
                 [](RunConfig& c, double v) { c.mapper_min_accuracy = v; });
  o->Add<double>(app, "--mapper-stop-accuracy",
                 "Stop once the hold-out accuracy reaches this",
                 [](RunConfig& c, double v) { c.mapper_stop_accuracy = v; });
}

void AddKeypointTrainFlags(CLI::App* app, Overrides* o) {
  o->Add<int>(app, "--keypoint-epochs", "Keypoint detector epochs",
              [](RunConfig& c, int v) { c.keypoint_epochs = v; });
  o->Add<int>(app, "--detector-hidden", "Detector hidden width",
              [](RunConfig& c, int v) { c.detector.hidden = v; });
  o->Add<int>(app, "--detector-kernel", "Detector kernel size",
              [](RunConfig& c, int v) { c.detector.kernel = v; });
  o->Add<int>(app, "--detector-depth", "Detector hidden layers",
              [](RunConfig& c, int v) { c.detector.depth = v; });
}

void AddKeypointFlags(CLI::App* app, Overrides* o) {
  o->Add<double>(app, "--theta", "Keypoint threshold",
                 [](RunConfig& c, double v) { c.theta = v; });
  o->Add<std::string>(app, "--theta-preset", "thumos, beoid or gtea",
                      [](RunConfig& c, const std::string& v) {
                        c.theta = keypoint::ThetaPreset(v);
                      });
  o->Add<int>(app, "--sg-window", "Savitzky-Golay window",
              [](RunConfig& c, int v) { c.sg_window = v; });
  o->Add<int>(app, "--sg-order", "Savitzky-Golay polynomial order",
              [](RunConfig& c, int v) { c.sg_order = v; });
}

void AddLocalizerFlags(CLI::App* app, Overrides* o) {
  o->Add<double>(app, "--beta", "Foreground loss weight",
                 [](RunConfig& c, double v) { c.beta = v; });
  o->Add<std::string>(app, "--beta-preset", "thumos, beoid or gtea",
                      [](RunConfig& c, const std::string& v) {
                        c.beta = localizer::BetaPreset(v);
                      });
  o->Add<int>(app, "--localizer-epochs", "Localizer epochs",
              [](RunConfig& c, int v) { c.localizer_epochs = v; });
  o->Add<int>(app, "--localizer-batch", "Localizer minibatch size",
              [](RunConfig& c, int v) { c.localizer_batch = v; });
  o->Flag(app, "--no-center-offset", "Fix the centre at the keypoint",
          [](RunConfig& c) { c.use_center_offset = false; });
  o->Flag(app, "--no-background-loss", "Drop the background term",
          [](RunConfig& c) { c.use_background_loss = false; });
  o->Add<std::string>(app, "--pool-divisor", "frames or mask_sum",
                      [](RunConfig& c, const std::string& v) {
                        c.pool_divisor = localizer::ParsePoolDivisor(v);
                      })
      ->check(CLI::IsMember({"frames", "mask_sum"}));
}

void AddEvalFlags(CLI::App* app, Overrides* o) {
  o->Add<std::vector<double>>(app, "--ious", "Comma-separated IoU thresholds",
                              [](RunConfig& c, const std::vector<double>& v) {
                                c.iou_thresholds = v;
                              })
      ->delimiter(',');
  o->Add<double>(app, "--stats-iou", "IoU for the detection statistics",
                 [](RunConfig& c, double v) { c.stats_iou = v; });
}

RunConfig Resolve(const Common& common) {
  RunConfig config;
  config.threads = ThreadsFromEnv(1);
  if (!common.config_path.empty()) {
    config = LoadRunConfig(common.config_path, config);
  }
  common.overrides.Apply(&config);
  config.Validate();
  return config;
}

void WriteJsonFile(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw FormatError("failed writing " + path.string());
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

data::Corpus LoadCorpus(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / data::kManifestName)) {
    throw FormatError("no corpus at " + dir + " (missing " +
                      data::kManifestName + ")");
  }
  return data::ReadCorpus(dir);
}

void CheckCorpusConsistency(const data::Corpus& corpus,
                            const nn::Network& detector) {
  if (detector.input_dim() != corpus.feature_dim ||
      detector.output_dim() != corpus.num_classes) {
    throw DimensionError("keypoint model maps " +
                         std::to_string(detector.input_dim()) + " -> " +
                         std::to_string(detector.output_dim()) +
                         " but the corpus has D=" +
                         std::to_string(corpus.feature_dim) +
                         ", C=" + std::to_string(corpus.num_classes));
  }
}

inference::InferConfig MakeInferConfig(const RunConfig& config) {
  inference::InferConfig ic;
  ic.theta = config.theta;
  ic.smoothing = config.smoothing();
  ic.threads = config.threads;
  return ic;
}

// ---------------------------------------------------------------------------
// Stages shared by the individual subcommands and e2e.

data::Corpus StageGenData(const RunConfig& config, const fs::path& out,
                          const Logger& log) {
  Stopwatch watch;
  data::Corpus corpus = data::GenerateDataset(config.data);
  data::WriteCorpus(out, corpus, config.ToJson());
  log.Event("gen_data", {{"videos", corpus.videos.size()},
                         {"out", out.string()},
                         {"seconds", watch.Seconds()}});
  return corpus;
}

nn::Network StageTrainMapper(const RunConfig& config, const fs::path& out,
                             const Logger& log, mapper::MapperReport* report) {
  Stopwatch watch;
  const std::vector<mapper::MapperPair> pairs =
      mapper::SimulatePairs(config.mapper_pairs, config.ts, config.seed);
  mapper::MapperTrainConfig mc;
  mc.ts = config.ts;
  mc.lr = config.lr_mapper;
  mc.batch_size = config.mapper_batch;
  mc.max_epochs = config.mapper_max_epochs;
  mc.stop_accuracy = config.mapper_stop_accuracy;
  mc.min_accuracy = config.mapper_min_accuracy;
  mc.seed = config.seed;
  mc.arch = config.mapper_arch;
  nn::Network net = mapper::TrainMapper(
      pairs, mc, report, [&](int epoch, double loss, double acc) {
        log.Event("epoch", {{"stage", "mapper"},
                            {"epoch", epoch},
                            {"loss", loss},
                            {"holdout_accuracy", acc},
                            {"seconds", watch.Seconds()}});
      });
  EnsureParent(out);
  SaveMapper(out, net, config.ToJson());
  log.Event("train_mapper", {{"out", out.string()},
                             {"epochs", report->epochs},
                             {"holdout_accuracy", report->holdout_accuracy},
                             {"seconds", watch.Seconds()}});
  return net;
}

nn::Network StageTrainKeypoint(const RunConfig& config,
                               const data::Corpus& corpus, const fs::path& out,
                               const Logger& log, double* final_loss) {
  Stopwatch watch;
  keypoint::KeypointTrainConfig kc;
  kc.epochs = config.keypoint_epochs;
  kc.lr = config.lr_main;
  kc.seed = config.seed;
  kc.arch = config.detector;
  const std::vector<const data::Video*> train =
      corpus.SplitVideos(data::Split::kTrain);
  double last = 0.0;
  nn::Network net = keypoint::TrainKeypointDetector(
      train, corpus.num_classes, kc, [&](int epoch, double loss) {
        last = loss;
        log.Event("epoch", {{"stage", "keypoint"},
                            {"epoch", epoch},
                            {"loss", loss},
                            {"seconds", watch.Seconds()}});
      });
  if (final_loss != nullptr) *final_loss = last;
  EnsureParent(out);
  SaveDetector(out, net, config.ToJson());
  log.Event("train_keypoint",
            {{"out", out.string()}, {"seconds", watch.Seconds()}});
  return net;
}

json KeypointsJson(const RunConfig& config, const data::Corpus& corpus,
                   const nn::Network& detector) {
  json videos = json::array();
  for (const data::Video& video : corpus.videos) {
    json kps = json::array();
    for (const keypoint::Keypoint& k : inference::DetectKeypoints(
             detector, video.features, config.theta, config.smoothing())) {
      kps.push_back({{"t", k.t}, {"class_id", k.class_id}, {"prob", k.prob}});
    }
    videos.push_back({{"video_id", video.id},
                      {"split", data::ToString(video.split)},
                      {"keypoints", kps}});
  }
  json doc;
  doc["run_config"] = json::parse(config.ToJson());
  doc["videos"] = std::move(videos);
  return doc;
}

struct LocalizerStats {
  int samples = 0;
  int skipped = 0;
};

localizer::LocalizerModel StageTrainLocalizer(const RunConfig& config,
                                              const data::Corpus& corpus,
                                              const nn::Network& detector,
                                              const nn::Network& mapper,
                                              const fs::path& out,
                                              const Logger& log,
                                              LocalizerStats* stats) {
  Stopwatch watch;
  CheckCorpusConsistency(corpus, detector);
  if (mapper.output_dim() != config.ts) {
    throw DimensionError("mapper was trained for T_s=" +
                         std::to_string(mapper.output_dim()) +
                         " but T_s=" + std::to_string(config.ts) +
                         " is configured");
  }
  std::vector<localizer::TrainingSample> samples;
  int skipped = 0;
  for (const data::Video* video : corpus.SplitVideos(data::Split::kTrain)) {
    const std::vector<keypoint::Keypoint> kps = inference::DetectKeypoints(
        detector, video->features, config.theta, config.smoothing());
    int dropped = 0;
    for (auto& s :
         localizer::BuildTrainingSamples(*video, kps, config.ts, &dropped)) {
      samples.push_back(std::move(s));
    }
    skipped += dropped;
  }
  log.Event("localizer_samples",
            {{"samples", samples.size()}, {"skipped_without_label", skipped}});
  if (samples.empty()) {
    throw AnnotationError(
        "no training short videos: no detected keypoint span contains a point "
        "label");
  }
  localizer::LocalizerTrainConfig lc;
  lc.epochs = config.localizer_epochs;
  lc.lr = config.lr_main;
  lc.batch_size = config.localizer_batch;
  lc.beta = config.beta;
  lc.use_center_offset = config.use_center_offset;
  lc.use_background_loss = config.use_background_loss;
  lc.divisor = config.pool_divisor;
  lc.seed = config.seed;
  lc.predictor = config.predictor;
  lc.classifier = config.classifier;
  nn::Network frozen = mapper;
  frozen.SetTrainable(false);
  localizer::LocalizerModel model = localizer::TrainLocalizer(
      samples, frozen, corpus.feature_dim, corpus.num_classes, lc,
      [&](int epoch, double loss, double fg, double bg) {
        log.Event("epoch", {{"stage", "localizer"},
                            {"epoch", epoch},
                            {"loss", loss},
                            {"fg_loss", fg},
                            {"bg_loss", bg},
                            {"seconds", watch.Seconds()}});
      });
  EnsureParent(out);
  SaveLocalizer(out, model, config.ToJson());
  if (stats != nullptr) {
    stats->samples = static_cast<int>(samples.size());
    stats->skipped = skipped;
  }
  log.Event("train_localizer",
            {{"out", out.string()}, {"seconds", watch.Seconds()}});
  return model;
}

std::vector<eval::Detection> StageInfer(const RunConfig& config,
                                        const data::Corpus& corpus,
                                        data::Split split,
                                        const nn::Network& detector,
                                        const localizer::LocalizerModel& model,
                                        bool baseline, const fs::path& out,
                                        const Logger& log) {
  Stopwatch watch;
  CheckCorpusConsistency(corpus, detector);
  inference::InferConfig ic = MakeInferConfig(config);
  if (baseline) ic.fixed_length = config.baseline_length;
  const std::vector<eval::Detection> dets =
      inference::InferVideos(corpus.SplitVideos(split), detector, model, ic);
  EnsureParent(out);
  eval::WriteDetections(out, dets, config.ToJson());
  log.Event("infer", {{"out", out.string()},
                      {"baseline", baseline},
                      {"detections", dets.size()},
                      {"seconds", watch.Seconds()}});
  return dets;
}

json EvalJson(const RunConfig& config, const data::Corpus& corpus,
              data::Split split, const std::vector<eval::Detection>& dets,
              const Logger& log) {
  const std::vector<eval::GroundTruth> gts =
      eval::CollectGroundTruth(corpus, split);
  const eval::EvalReport report =
      eval::Evaluate(dets, gts, corpus.num_classes, config.iou_thresholds,
                     config.stats_iou);
  for (int c = 0; c < corpus.num_classes; ++c) {
    bool missing = false;
    eval::AveragePrecision({}, gts, c, 0.5, &missing);
    if (missing) {
      log.Event("warning", {{"message", "class has no ground truth; AP is 0 "
                                        "and the class is left out of mAP"},
                            {"class_id", c}});
    }
  }
  if (report.stats.no_predictions) {
    log.Event("warning",
              {{"message", "no predictions; precision and false alarm are 0"}});
  }
  return json::parse(eval::ReportToJson(report));
}

// ---------------------------------------------------------------------------
// Subcommands.

struct Paths {
  std::string out;
  std::string data;
  std::string model;
  std::string keypoint_model;
  std::string mapper;
  std::string localizer;
  std::string preds;
  std::string report;
  std::string split = "test";
  bool baseline = false;
};

void RecordPaths(const Paths& p, RunConfig* config) {
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) config->paths[key] = v;
  };
  put("out", p.out);
  put("data", p.data);
  put("model", p.model);
  put("keypoint_model", p.keypoint_model);
  put("mapper", p.mapper);
  put("localizer", p.localizer);
  put("preds", p.preds);
  put("report", p.report);
}

int RunGenData(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  const data::Corpus corpus = StageGenData(config, p.out, log);
  std::cout << json{{"out", p.out}, {"videos", corpus.videos.size()}}.dump()
            << "\n";
  return kExitOk;
}

int RunTrainMapper(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  mapper::MapperReport report;
  StageTrainMapper(config, p.out, log, &report);
  std::cout << json{{"out", p.out},
                    {"epochs", report.epochs},
                    {"holdout_accuracy", report.holdout_accuracy}}
                   .dump()
            << "\n";
  return kExitOk;
}

int RunTrainKeypoint(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  const data::Corpus corpus = LoadCorpus(p.data);
  double loss = 0.0;
  StageTrainKeypoint(config, corpus, p.out, log, &loss);
  std::cout << json{{"out", p.out}, {"final_loss", loss}}.dump() << "\n";
  return kExitOk;
}

int RunKeypoints(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const data::Corpus corpus = LoadCorpus(p.data);
  const nn::Network detector = LoadDetector(p.model);
  CheckCorpusConsistency(corpus, detector);
  const json doc = KeypointsJson(config, corpus, detector);
  WriteJsonFile(p.out, doc);
  std::size_t total = 0;
  for (const json& v : doc["videos"]) total += v["keypoints"].size();
  std::cout << json{{"out", p.out}, {"keypoints", total}}.dump() << "\n";
  return kExitOk;
}

int RunTrainLocalizer(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  const data::Corpus corpus = LoadCorpus(p.data);
  const nn::Network detector = LoadDetector(p.keypoint_model);
  const nn::Network mapper = LoadMapper(p.mapper);
  config.ts = mapper.output_dim();
  LocalizerStats stats;
  StageTrainLocalizer(config, corpus, detector, mapper, p.out, log, &stats);
  std::cout << json{{"out", p.out},
                    {"samples", stats.samples},
                    {"skipped_without_label", stats.skipped}}
                   .dump()
            << "\n";
  return kExitOk;
}

int RunInfer(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  const data::Corpus corpus = LoadCorpus(p.data);
  const nn::Network detector = LoadDetector(p.keypoint_model);
  const nn::Network mapper = LoadMapper(p.mapper);
  const localizer::LocalizerModel model = LoadLocalizer(p.localizer, mapper);
  const std::vector<eval::Detection> dets =
      StageInfer(config, corpus, data::ParseSplit(p.split), detector, model,
                 p.baseline, p.out, log);
  std::cout << json{{"out", p.out}, {"detections", dets.size()}}.dump() << "\n";
  return kExitOk;
}

int RunEval(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  if (!fs::exists(p.preds)) {
    throw FormatError("predictions file not found: " + p.preds);
  }
  const std::vector<eval::Detection> dets = eval::ReadDetections(p.preds);
  const data::Corpus corpus = LoadCorpus(p.data);
  json report = EvalJson(config, corpus, data::ParseSplit(p.split), dets, log);
  report["run_config"] = json::parse(config.ToJson());
  if (!p.report.empty()) WriteJsonFile(p.report, report);
  std::cout << report.dump() << "\n";
  return kExitOk;
}

int RunE2e(const Common& common, const Paths& p) {
  RunConfig config = Resolve(common);
  RecordPaths(p, &config);
  const Logger log(common.quiet);
  Stopwatch watch;
  const fs::path out(p.out);
  fs::create_directories(out);

  const data::Corpus corpus = StageGenData(config, out / "data", log);
  mapper::MapperReport mapper_report;
  const nn::Network mapper =
      StageTrainMapper(config, out / "mapper.bin", log, &mapper_report);
  double kp_loss = 0.0;
  const nn::Network detector =
      StageTrainKeypoint(config, corpus, out / "keypoint.bin", log, &kp_loss);
  WriteJsonFile(out / "keypoints.json", KeypointsJson(config, corpus, detector));
  LocalizerStats stats;
  const localizer::LocalizerModel model = StageTrainLocalizer(
      config, corpus, detector, mapper, out / "localizer.bin", log, &stats);
  const std::vector<eval::Detection> dets =
      StageInfer(config, corpus, data::Split::kTest, detector, model, false,
                 out / "preds.json", log);
  const std::vector<eval::Detection> base =
      StageInfer(config, corpus, data::Split::kTest, detector, model, true,
                 out / "preds_baseline.json", log);

  json report;
  report["run_config"] = json::parse(config.ToJson());
  report["eval"] = EvalJson(config, corpus, data::Split::kTest, dets, log);
  report["baseline_eval"] =
      EvalJson(config, corpus, data::Split::kTest, base, log);
  report["mapper"] = {{"epochs", mapper_report.epochs},
                      {"holdout_accuracy", mapper_report.holdout_accuracy}};
  report["keypoint"] = {{"final_loss", kp_loss}};
  report["localizer"] = {{"samples", stats.samples},
                         {"skipped_without_label", stats.skipped}};
  WriteJsonFile(out / "report.json", report);
  log.Event("e2e", {{"out", out.string()}, {"seconds", watch.Seconds()}});

  std::cout << json{{"report", (out / "report.json").string()},
                    {"avg_map", report["eval"]["avg_map"]},
                    {"map_per_iou", report["eval"]["map_per_iou"]},
                    {"baseline_avg_map", report["baseline_eval"]["avg_map"]}}
                   .dump()
            << "\n";
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args) {
  CLI::App app{"Point-level temporal action localization toolkit", "ptal"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Common common;
  Paths paths;
  std::function<int()> action;

  auto add = [&](const std::string& name, const std::string& help,
                 auto runner) {
    CLI::App* sub = app.add_subcommand(name, help);
    AddCommon(sub, &common);
    sub->callback([&action, runner, &common, &paths] {
      action = [runner, &common, &paths] { return runner(common, paths); };
    });
    return sub;
  };

  CLI::App* gen = add("gen-data", "Generate a synthetic corpus", RunGenData);
  gen->add_option("--out", paths.out, "Corpus directory")->required();
  AddDataFlags(gen, &common.overrides);

  CLI::App* tm = add("train-mapper", "Pre-train the proposal-to-mask mapper",
                     RunTrainMapper);
  tm->add_option("--out", paths.out, "Mapper checkpoint")->required();
  AddMapperFlags(tm, &common.overrides);
  common.overrides.Add<double>(tm, "--lr", "Mapper learning rate",
                               [](RunConfig& c, double v) { c.lr_mapper = v; });

  CLI::App* tk = add("train-keypoint", "Train the keypoint detector",
                     RunTrainKeypoint);
  tk->add_option("--data", paths.data, "Corpus directory")->required();
  tk->add_option("--out", paths.out, "Detector checkpoint")->required();
  AddKeypointTrainFlags(tk, &common.overrides);
  common.overrides.Add<int>(tk, "--epochs", "Training epochs",
                            [](RunConfig& c, int v) { c.keypoint_epochs = v; });
  common.overrides.Add<double>(tk, "--lr", "Learning rate",
                               [](RunConfig& c, double v) { c.lr_main = v; });

  CLI::App* kp = add("keypoints", "Extract keypoints for every video",
                     RunKeypoints);
  kp->add_option("--data", paths.data, "Corpus directory")->required();
  kp->add_option("--model", paths.model, "Detector checkpoint")->required();
  kp->add_option("--out", paths.out, "Keypoints JSON")->required();
  AddKeypointFlags(kp, &common.overrides);

  CLI::App* tl = add("train-localizer",
                     "Train the location predictor and classifier",
                     RunTrainLocalizer);
  tl->add_option("--data", paths.data, "Corpus directory")->required();
  tl->add_option("--keypoint-model", paths.keypoint_model,
                 "Detector checkpoint")
      ->required();
  tl->add_option("--mapper", paths.mapper, "Mapper checkpoint")->required();
  tl->add_option("--out", paths.out, "Localizer checkpoint")->required();
  AddKeypointFlags(tl, &common.overrides);
  AddLocalizerFlags(tl, &common.overrides);
  common.overrides.Add<int>(tl, "--epochs", "Training epochs",
                            [](RunConfig& c, int v) { c.localizer_epochs = v; });
  common.overrides.Add<double>(tl, "--lr", "Learning rate",
                               [](RunConfig& c, double v) { c.lr_main = v; });

  CLI::App* inf = add("infer", "Localize actions in one split", RunInfer);
  inf->add_option("--data", paths.data, "Corpus directory")->required();
  inf->add_option("--keypoint-model", paths.keypoint_model,
                  "Detector checkpoint")
      ->required();
  inf->add_option("--mapper", paths.mapper, "Mapper checkpoint")->required();
  inf->add_option("--localizer", paths.localizer, "Localizer checkpoint")
      ->required();
  inf->add_option("--out", paths.out, "Predictions JSON")->required();
  inf->add_option("--split", paths.split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  inf->add_flag("--baseline", paths.baseline,
                "Fixed-length proposals centred on the keypoints");
  AddKeypointFlags(inf, &common.overrides);
  common.overrides.Add<double>(inf, "--baseline-length",
                               "Proposal length used by --baseline",
                               [](RunConfig& c, double v) {
                                 c.baseline_length = v;
                               });

  CLI::App* ev = add("eval", "Score predictions against the corpus", RunEval);
  ev->add_option("--preds", paths.preds, "Predictions JSON")->required();
  ev->add_option("--data", paths.data, "Corpus directory")->required();
  ev->add_option("--report", paths.report, "Report JSON");
  ev->add_option("--split", paths.split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  AddEvalFlags(ev, &common.overrides);

  CLI::App* e2e = add("e2e", "Run every stage with one seed", RunE2e);
  e2e->add_option("--out", paths.out, "Run directory")->required();
  AddDataFlags(e2e, &common.overrides);
  AddMapperFlags(e2e, &common.overrides);
  AddKeypointTrainFlags(e2e, &common.overrides);
  AddKeypointFlags(e2e, &common.overrides);
  AddLocalizerFlags(e2e, &common.overrides);
  AddEvalFlags(e2e, &common.overrides);
  common.overrides.Add<double>(e2e, "--lr", "Main learning rate",
                               [](RunConfig& c, double v) { c.lr_main = v; });
  common.overrides.Add<double>(e2e, "--lr-mapper", "Mapper learning rate",
                               [](RunConfig& c, double v) { c.lr_mapper = v; });

  std::vector<char*> argv;
  std::vector<std::string> storage(args.begin(), args.end());
  if (storage.empty()) storage.emplace_back("ptal");
  for (std::string& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk
                                                              : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << json{{"event", "error"}, {"kind", "config"}, {"message", e.what()}}
                     .dump()
              << "\n";
    return kExitDataError;
  } catch (const Error& e) {
    std::cerr << json{{"event", "error"}, {"message", e.what()}}.dump() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << json{{"event", "error"}, {"message", e.what()}}.dump() << "\n";
    return kExitDataError;
  }
}

}  // namespace ptal::cli
