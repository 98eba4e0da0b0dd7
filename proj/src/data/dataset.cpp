// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/data/dataset.hpp"

#include <cmath>

#include "tagdet/errors.hpp"
#include "tagdet/io/binary.hpp"

namespace tagdet::data {

using nlohmann::json;

std::filesystem::path feature_path(const std::filesystem::path& root, const std::string& video_id) {
    return root / "features" / (video_id + ".tadf");
}

Manifest load_manifest(const std::filesystem::path& root) {
    const auto path = root / "manifest.json";
    if (!std::filesystem::exists(path)) throw MissingInput("no dataset manifest at " + path.string());
    const json j = read_json(path);
    Manifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != 1) throw ConfigError("unsupported manifest version " + std::to_string(m.version));
        m.feature_dim = j.at("feature_dim").get<std::size_t>();
        m.num_classes = j.at("num_classes").get<std::size_t>();
        for (const auto& [name, js] : j.at("splits").items())
            m.splits[name] = {js.at("annotations").get<std::string>(),
                              js.at("videos").get<std::vector<std::string>>()};
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (m.feature_dim < 1 || m.num_classes < 1)
        throw ConfigError(path.string() + ": feature_dim and num_classes must be >= 1");
    return m;
}

void write_dataset(const std::filesystem::path& root, const std::map<std::string, Split>& splits) {
    if (splits.empty()) throw ConfigError("dataset: no splits to write");
    json manifest = {{"version", 1}, {"splits", json::object()}};
    std::size_t dim = 0, classes = 0;
    for (const auto& [name, split] : splits) {
        if (split.features.size() != split.annotations.videos.size())
            throw ConfigError("dataset: split '" + name + "' has mismatched feature and annotation counts");
        split.annotations.validate();
        if (classes == 0) classes = split.annotations.num_classes();
        if (split.annotations.num_classes() != classes)
            throw ConfigError("dataset: splits disagree on the number of classes");
        std::vector<std::string> ids;
        for (const auto& f : split.features) {
            if (dim == 0) dim = f.dim();
            if (f.dim() != dim) throw ConfigError("dataset: splits disagree on the feature dimension");
            write_features(feature_path(root, f.video_id), f);
            ids.push_back(f.video_id);
        }
        const std::string ann = "annotations_" + name + ".json";
        save_annotations(root / ann, split.annotations);
        manifest["splits"][name] = {{"annotations", ann}, {"videos", ids}};
    }
    manifest["feature_dim"] = dim;
    manifest["num_classes"] = classes;
    io::write_text_atomic(root / "manifest.json", manifest.dump(2) + "\n");
}

Split load_split(const std::filesystem::path& root, const std::string& name) {
    const Manifest m = load_manifest(root);
    const auto it = m.splits.find(name);
    if (it == m.splits.end()) throw ConfigError("dataset " + root.string() + " has no split '" + name + "'");
    const AnnotationSet all = load_annotations(root / it->second.annotations);
    if (all.num_classes() != m.num_classes)
        throw ConfigError("annotations declare " + std::to_string(all.num_classes()) + " classes, manifest " +
                          std::to_string(m.num_classes));

    Split split;
    split.annotations.labels = all.labels;
    for (const std::string& id : it->second.videos) {
        const VideoAnnotation* ann = all.find(id);
        if (!ann) throw ConfigError("split '" + name + "': video '" + id + "' has no annotation entry");
        const auto path = feature_path(root, id);
        if (!std::filesystem::exists(path)) throw MissingInput("missing feature file " + path.string());
        FeatureSequence f = load_features(path, m.feature_dim);
        f.video_id = id;
        if (std::abs(f.duration_seconds - ann->duration) > 1e-6 * std::max(1.0, ann->duration))
            throw ConfigError("video '" + id + "': feature duration " + std::to_string(f.duration_seconds) +
                              " disagrees with annotation duration " + std::to_string(ann->duration));
        split.features.push_back(std::move(f));
        split.annotations.videos.push_back(*ann);
    }
    return split;
}

}  // namespace tagdet::data
