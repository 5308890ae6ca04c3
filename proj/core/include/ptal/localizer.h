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

// Location prediction stage. For every short video a predictor emits a
// centre offset and a length around the keypoint; the frozen mapper turns the
// proposal into a soft mask; mask-weighted foreground and background features
// are classified by one shared classifier, foreground against the annotated
// class and background against the extra background class C.

#ifndef PTAL_LOCALIZER_H_
#define PTAL_LOCALIZER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptal/datagen.h"
#include "ptal/keypoint.h"
#include "ptal/mapper.h"
#include "ptal/network.h"
#include "ptal/tensor.h"

namespace ptal::localizer {

// kFrames divides the pooled sums by T_s; kMaskSum divides the foreground by
// sum_t m_t and the background by sum_t (1 - m_t), i.e. a true weighted mean.
enum class PoolDivisor { kFrames, kMaskSum };

std::string ToString(PoolDivisor divisor);
PoolDivisor ParsePoolDivisor(const std::string& name);

struct PredictorArch {
  int hidden = 64;
  int kernel = 3;
};

struct ClassifierArch {
  int hidden = 64;
};

// conv1d(k, D -> hidden, relu) -> temporal mean -> dense(hidden -> hidden,
// relu) -> dense(hidden -> 2). Output 0 drives the centre offset, output 1
// the length.
std::vector<nn::LayerSpec> PredictorLayers(int feature_dim,
                                           const PredictorArch& arch);

// dense(D -> hidden, relu) -> dense(hidden -> C + 1, softmax).
std::vector<nn::LayerSpec> ClassifierLayers(int feature_dim, int num_classes,
                                            const ClassifierArch& arch);

struct LocalizerModel {
  nn::Network predictor;
  nn::Network classifier;
  nn::Network mapper;  // frozen
  int ts = 64;
  int num_classes = 0;
  bool use_center_offset = true;
  PoolDivisor divisor = PoolDivisor::kFrames;

  int feature_dim() const { return predictor.input_dim(); }
};

// Offset 0.5 * tanh(raw[0]) (0 when the offset is disabled) and length
// sigmoid(raw[1]); the centre is clamp(keypoint_pos + offset, 0, 1).
mapper::Proposal ProposalFromRaw(double keypoint_pos, double raw_offset,
                                 double raw_length, bool use_center_offset);

// Throws DimensionError when the features are not T_s x D.
mapper::Proposal PredictProposal(const LocalizerModel& model,
                                 const keypoint::ShortVideo& sv);

// (1 / T_s) sum_t m_t x_t, or sum_t m_t x_t / sum_t m_t with kMaskSum (zero
// when the mask is empty). Throws DimensionError on a length mismatch.
RowVector PoolForeground(const Matrix& features, std::span<const double> mask,
                         PoolDivisor divisor = PoolDivisor::kFrames);

// The same with weights 1 - m_t.
RowVector PoolBackground(const Matrix& features, std::span<const double> mask,
                         PoolDivisor divisor = PoolDivisor::kFrames);

// H(y_bg, y_bg_hat) + beta * H(y_fg, y_fg_hat) with categorical
// cross-entropy; y_fg is one-hot at `target_class`, y_bg one-hot at the last
// index. Throws AnnotationError unless 0 <= target_class < size - 1 and
// DimensionError on mismatched sizes.
double ClassificationLoss(std::span<const double> fg_pred,
                          std::span<const double> bg_pred, int target_class,
                          double beta);

// Foreground weight presets: "thumos" and "beoid" 1.25, "gtea" 2. Throws
// ConfigError for other names.
double BetaPreset(const std::string& name);

struct LocalizerTrainConfig {
  int epochs = 50;
  double lr = 1e-4;
  int batch_size = 1;
  double beta = 1.25;
  bool use_center_offset = true;
  bool use_background_loss = true;
  PoolDivisor divisor = PoolDivisor::kFrames;
  std::uint64_t seed = 7;
  PredictorArch predictor;
  ClassifierArch classifier;
};

// A short video with the class of the point label it was built around.
struct TrainingSample {
  keypoint::ShortVideo video;
  int label = 0;
};

// Short videos of one training video: detected keypoints cut the video as in
// inference, and each span takes the class of the annotated point inside it
// nearest to its keypoint. Spans without an annotation are dropped and
// counted in `skipped`.
std::vector<TrainingSample> BuildTrainingSamples(
    const data::Video& video, std::span<const keypoint::Keypoint> keypoints,
    int ts, int* skipped = nullptr);

// Loss terms of one sample together with the gradients of the total loss.
struct SampleGradients {
  double loss = 0.0;
  double fg_loss = 0.0;  // unweighted H(y_fg, y_fg_hat)
  double bg_loss = 0.0;
  std::vector<double> predictor;   // d loss / d predictor params
  std::vector<double> classifier;  // d loss / d classifier params
  std::vector<double> mapper;      // always zero: the mapper is frozen
};

// Forward and backward pass for a single sample.
SampleGradients ComputeSampleGradients(const LocalizerModel& model,
                                       const TrainingSample& sample,
                                       const LocalizerTrainConfig& config);

// Called after every epoch with the mean total, foreground and background
// losses.
using LocalizerEpochCallback = std::function<void(
    int epoch, double loss, double fg_loss, double bg_loss)>;

// Joint Adam training of predictor and classifier; the mapper must be frozen
// and is never modified. Throws TrainingError on a non-finite loss and
// ConfigError when the mapper is trainable or its T_s differs.
LocalizerModel TrainLocalizer(std::span<const TrainingSample> samples,
                              const nn::Network& mapper, int feature_dim,
                              int num_classes,
                              const LocalizerTrainConfig& config,
                              const LocalizerEpochCallback& on_epoch = {});

}  // namespace ptal::localizer

#endif  // PTAL_LOCALIZER_H_
