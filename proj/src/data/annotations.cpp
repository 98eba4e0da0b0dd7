// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/data/annotations.hpp"

#include <cmath>
#include <fstream>

#include "tagdet/errors.hpp"
#include "tagdet/io/binary.hpp"

namespace tagdet::data {
namespace {

using nlohmann::json;

double number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError(where + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

int integer(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw ConfigError(where + ": missing integer field '" + key + "'");
    return j.at(key).get<int>();
}

const json& array(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
        throw ConfigError(where + ": missing array '" + key + "'");
    return j.at(key);
}

std::string string_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ConfigError(where + ": missing string field '" + key + "'");
    return j.at(key).get<std::string>();
}

}  // namespace

const VideoAnnotation* AnnotationSet::find(const std::string& id) const {
    for (const auto& v : videos)
        if (v.id == id) return &v;
    return nullptr;
}

void AnnotationSet::validate() const {
    const int C = static_cast<int>(labels.size());
    if (C < 1) throw ConfigError("annotations: at least one label is required");
    for (const auto& v : videos) {
        if (!std::isfinite(v.duration) || !(v.duration > 0.0))
            throw ConfigError("annotations: video '" + v.id + "' has a non-positive duration");
        for (const auto& s : v.segments) {
            if (!(std::isfinite(s.start) && std::isfinite(s.end) && 0.0 <= s.start && s.start < s.end &&
                  s.end <= v.duration))
                throw ConfigError("annotations: video '" + v.id + "' has segment [" + std::to_string(s.start) +
                                  ", " + std::to_string(s.end) + "] outside [0, duration]");
            if (s.label < 1 || s.label > C)
                throw ConfigError("annotations: video '" + v.id + "' uses label " + std::to_string(s.label) +
                                  " outside 1.." + std::to_string(C));
        }
    }
}

json to_json(const AnnotationSet& set) {
    json videos = json::array();
    for (const auto& v : set.videos) {
        json segs = json::array();
        for (const auto& s : v.segments) segs.push_back({{"start", s.start}, {"end", s.end}, {"label", s.label}});
        videos.push_back({{"id", v.id}, {"duration", v.duration}, {"segments", std::move(segs)}});
    }
    return {{"labels", set.labels}, {"videos", std::move(videos)}};
}

AnnotationSet annotations_from_json(const json& j) {
    AnnotationSet set;
    for (const auto& l : array(j, "labels", "annotations")) {
        if (!l.is_string()) throw ConfigError("annotations: labels must be strings");
        set.labels.push_back(l.get<std::string>());
    }
    for (const auto& jv : array(j, "videos", "annotations")) {
        VideoAnnotation v;
        v.id = string_field(jv, "id", "annotations video");
        const std::string where = "annotations video '" + v.id + "'";
        v.duration = number(jv, "duration", where);
        for (const auto& js : array(jv, "segments", where))
            v.segments.push_back({number(js, "start", where), number(js, "end", where), integer(js, "label", where)});
        set.videos.push_back(std::move(v));
    }
    set.validate();
    return set;
}

void save_annotations(const std::filesystem::path& path, const AnnotationSet& set) {
    io::write_text_atomic(path, to_json(set).dump(2) + "\n");
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
    try {
        return annotations_from_json(read_json(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json predictions_to_json(const std::vector<VideoPredictions>& preds) {
    json videos = json::array();
    for (const auto& v : preds) {
        json dets = json::array();
        for (const auto& d : v.detections)
            dets.push_back({{"start", d.start}, {"end", d.end}, {"label", d.label}, {"score", d.score}});
        videos.push_back({{"id", v.id}, {"detections", std::move(dets)}});
    }
    return {{"videos", std::move(videos)}};
}

std::vector<VideoPredictions> predictions_from_json(const json& j) {
    std::vector<VideoPredictions> out;
    for (const auto& jv : array(j, "videos", "predictions")) {
        VideoPredictions v;
        v.id = string_field(jv, "id", "predictions video");
        const std::string where = "predictions video '" + v.id + "'";
        const char* key = jv.contains("detections") ? "detections" : "segments";
        for (const auto& jd : array(jv, key, where)) {
            ScoredSegment s;
            s.start = number(jd, "start", where);
            s.end = number(jd, "end", where);
            s.label = integer(jd, "label", where);
            s.score = jd.contains("score") ? number(jd, "score", where) : 1.0;
            if (!(s.start < s.end) || !std::isfinite(s.score))
                throw ConfigError(where + ": malformed detection");
            v.detections.push_back(s);
        }
        out.push_back(std::move(v));
    }
    return out;
}

void save_predictions(const std::filesystem::path& path, const std::vector<VideoPredictions>& preds) {
    io::write_text_atomic(path, predictions_to_json(preds).dump(2) + "\n");
}

std::vector<VideoPredictions> load_predictions(const std::filesystem::path& path) {
    try {
        return predictions_from_json(read_json(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace tagdet::data
