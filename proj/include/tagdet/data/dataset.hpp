// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tagdet/data/annotations.hpp"
#include "tagdet/data/feature_file.hpp"

namespace tagdet::data {

/// Dataset directory layout:
///   manifest.json
///   annotations_<split>.json
///   features/<video id>.tadf
///
/// manifest.json:
///   {"version": 1, "feature_dim": 16, "num_classes": 3,
///    "splits": {"train": {"annotations": "annotations_train.json", "videos": ["..."]}}}
struct SplitEntry {
    std::string annotations;  // relative to the dataset root
    std::vector<std::string> videos;
};

struct Manifest {
    int version = 1;
    std::size_t feature_dim = 0;
    std::size_t num_classes = 0;
    std::map<std::string, SplitEntry> splits;
};

struct Split {
    std::vector<FeatureSequence> features;  // in manifest order
    AnnotationSet annotations;              // in manifest order
};

Manifest load_manifest(const std::filesystem::path& root);

/// Writes features, annotations and manifest. All splits must agree on D and C.
void write_dataset(const std::filesystem::path& root, const std::map<std::string, Split>& splits);

/// Loads one split and cross-checks it against the manifest: every listed
/// video has features of the declared D, an annotation entry, and a duration
/// consistent with the feature file.
Split load_split(const std::filesystem::path& root, const std::string& name);

std::filesystem::path feature_path(const std::filesystem::path& root, const std::string& video_id);

}  // namespace tagdet::data
