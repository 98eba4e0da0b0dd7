// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace tagdet {

std::vector<train::TrainSample> make_train_samples(const data::Split& split) {
    std::vector<train::TrainSample> out;
    out.reserve(split.features.size());
    for (std::size_t i = 0; i < split.features.size(); ++i) {
        const data::FeatureSequence& f = split.features[i];
        train::TrainSample s;
        s.id = f.video_id;
        s.features = f.values;
        for (const data::ActionSegment& a : split.annotations.videos.at(i).segments)
            s.segments.push_back({a.start / f.delta_seconds, a.end / f.delta_seconds, a.label});
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<data::VideoPredictions> run_inference(model::Detector& model,
                                                  std::span<const data::FeatureSequence> videos,
                                                  const eval::InferenceConfig& cfg, unsigned threads) {
    std::vector<data::VideoPredictions> out(videos.size());
    auto one = [&](std::size_t i) {
        const data::FeatureSequence& f = videos[i];
        const auto levels = model.predict(f.values);
        out[i] = {f.video_id, eval::detect(levels, f.delta_seconds, f.duration_seconds, cfg)};
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, videos.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < videos.size(); ++i) one(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < videos.size();) {
                try {
                    one(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                    next = videos.size();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::vector<eval::Detection> flatten(std::span<const data::VideoPredictions> predictions) {
    std::vector<eval::Detection> out;
    for (const auto& v : predictions)
        for (const auto& d : v.detections) out.push_back({v.id, d});
    return out;
}

std::vector<eval::GroundTruth> ground_truth(const data::AnnotationSet& annotations) {
    std::vector<eval::GroundTruth> out;
    for (const auto& v : annotations.videos)
        for (const auto& s : v.segments) out.push_back({v.id, s.start, s.end, s.label});
    return out;
}

eval::EvalReport evaluate(std::span<const data::VideoPredictions> predictions,
                          const data::AnnotationSet& annotations, std::span<const double> thresholds) {
    const auto dets = flatten(predictions);
    const auto gt = ground_truth(annotations);
    return eval::mean_average_precision(dets, gt, thresholds);
}

}  // namespace tagdet
