// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include "tagdet/data/annotations.hpp"
#include "tagdet/data/dataset.hpp"
#include "tagdet/eval/map.hpp"
#include "tagdet/eval/postprocess.hpp"
#include "tagdet/model/detector.hpp"
#include "tagdet/train/trainer.hpp"

namespace tagdet {

/// Converts second-based annotations to feature-row units.
std::vector<train::TrainSample> make_train_samples(const data::Split& split);

/// Runs the detector on every video. Videos are independent, so they are
/// spread over `threads` workers (0 picks the hardware concurrency). Output
/// order follows the input.
std::vector<data::VideoPredictions> run_inference(model::Detector& model,
                                                  std::span<const data::FeatureSequence> videos,
                                                  const eval::InferenceConfig& cfg, unsigned threads = 0);

std::vector<eval::Detection> flatten(std::span<const data::VideoPredictions> predictions);
std::vector<eval::GroundTruth> ground_truth(const data::AnnotationSet& annotations);

eval::EvalReport evaluate(std::span<const data::VideoPredictions> predictions,
                          const data::AnnotationSet& annotations, std::span<const double> thresholds);

}  // namespace tagdet
