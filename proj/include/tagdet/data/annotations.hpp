// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tagdet/segment.hpp"

namespace tagdet::data {

/// Ground-truth action instance in seconds. Labels are 1-based.
struct ActionSegment {
    double start = 0.0;
    double end = 0.0;
    int label = 1;
};

struct VideoAnnotation {
    std::string id;
    double duration = 0.0;
    std::vector<ActionSegment> segments;
};

/// JSON schema:
///   {"labels": ["name", ...],
///    "videos": [{"id": "...", "duration": 12.5,
///                "segments": [{"start": 1.0, "end": 3.5, "label": 1}, ...]}]}
struct AnnotationSet {
    std::vector<std::string> labels;
    std::vector<VideoAnnotation> videos;

    std::size_t num_classes() const { return labels.size(); }
    const VideoAnnotation* find(const std::string& id) const;
    /// Requires 0 <= start < end <= duration and 1 <= label <= num_classes. Throws ConfigError.
    void validate() const;
};

nlohmann::json to_json(const AnnotationSet& set);
AnnotationSet annotations_from_json(const nlohmann::json& j);
void save_annotations(const std::filesystem::path& path, const AnnotationSet& set);
AnnotationSet load_annotations(const std::filesystem::path& path);

/// Detections for one video.
struct VideoPredictions {
    std::string id;
    std::vector<ScoredSegment> detections;
};

/// {"videos": [{"id": "...", "detections": [{"start", "end", "label", "score"}]}]}
/// Reading also accepts an annotation document: "segments" in place of
/// "detections", with the score defaulting to 1.
nlohmann::json predictions_to_json(const std::vector<VideoPredictions>& preds);
std::vector<VideoPredictions> predictions_from_json(const nlohmann::json& j);
void save_predictions(const std::filesystem::path& path, const std::vector<VideoPredictions>& preds);
std::vector<VideoPredictions> load_predictions(const std::filesystem::path& path);

/// Parses a JSON file; errors become ConfigError naming the path.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace tagdet::data
