// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "tagdet/errors.hpp"
#include "tagdet/eval/map.hpp"

namespace tagdet::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ConfigError("config: " + std::string(key) + " = '" + std::string(value) + "': expected " +
                      std::string(expected));
}

template <class T>
T parse_int(std::string_view key, std::string_view v) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    bad_value(key, v, "true or false");
}

std::string real_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Shortest form that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

struct Entry {
    std::string key;
    std::string help;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define TAGDET_SIZE(KEY, FIELD, HELP)                                                                   \
    Entry {                                                                                            \
        KEY, HELP, [](RunConfig& c, std::string_view v) { c.FIELD = parse_int<std::size_t>(KEY, v); }, \
            [](const RunConfig& c) { return std::to_string(c.FIELD); }                                 \
    }
#define TAGDET_REAL(KEY, FIELD, HELP)                                                     \
    Entry {                                                                              \
        KEY, HELP, [](RunConfig& c, std::string_view v) { c.FIELD = parse_real(KEY, v); }, \
            [](const RunConfig& c) { return real_text(c.FIELD); }                        \
    }
#define TAGDET_BOOL(KEY, FIELD, HELP)                                                     \
    Entry {                                                                              \
        KEY, HELP, [](RunConfig& c, std::string_view v) { c.FIELD = parse_bool(KEY, v); }, \
            [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }   \
    }
#define TAGDET_TEXT(KEY, FIELD, HELP)                                                 \
    Entry {                                                                          \
        KEY, HELP, [](RunConfig& c, std::string_view v) { c.FIELD = std::string(v); }, \
            [](const RunConfig& c) { return c.FIELD; }                               \
    }

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        Entry{"seed", "seed for initialization, data order and synthesis",
              [](RunConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>("seed", v); },
              [](const RunConfig& c) { return std::to_string(c.seed); }},

        TAGDET_SIZE("synth.num_videos", synth.num_videos, "training videos to synthesize"),
        TAGDET_SIZE("synth.val_videos", synth_val_videos, "validation videos to synthesize"),
        TAGDET_SIZE("synth.length", synth.length, "feature rows per video"),
        TAGDET_SIZE("synth.dim", synth.dim, "feature dimension"),
        TAGDET_SIZE("synth.classes", synth.classes, "number of action classes"),
        TAGDET_SIZE("synth.segments_min", synth.segments_min, "fewest segments per video"),
        TAGDET_SIZE("synth.segments_max", synth.segments_max, "most segments per video"),
        TAGDET_SIZE("synth.segment_length_min", synth.segment_length_min, "shortest segment, rows"),
        TAGDET_SIZE("synth.segment_length_max", synth.segment_length_max, "longest segment, rows"),
        TAGDET_REAL("synth.noise", synth.noise, "standard deviation of the feature noise"),
        TAGDET_REAL("synth.delta_seconds", synth.delta_seconds, "seconds covered by one feature row"),
        Entry{"synth.prototype_seed", "seed of the class prototype vectors",
              [](RunConfig& c, std::string_view v) {
                  c.synth.prototype_seed = parse_int<std::uint64_t>("synth.prototype_seed", v);
              },
              [](const RunConfig& c) { return std::to_string(c.synth.prototype_seed); }},
        TAGDET_BOOL("synth.overlap", synth.allow_overlap, "allow overlapping segments"),

        TAGDET_SIZE("model.input_dim", model.pyramid.input_dim, "input feature dimension, 0 to take it from the dataset"),
        TAGDET_SIZE("model.classes", model.head.num_classes, "number of classes, 0 to take it from the dataset"),
        TAGDET_SIZE("model.dim", model.pyramid.tag.dim, "model width"),
        TAGDET_SIZE("model.levels", model.pyramid.levels, "pyramid levels"),
        TAGDET_SIZE("model.embed_kernel", model.pyramid.embed_kernel, "embedding convolution kernel"),
        TAGDET_SIZE("model.window", model.pyramid.tag.window, "small convolution window w"),
        TAGDET_REAL("model.scale", model.pyramid.tag.scale, "large window factor k"),
        TAGDET_SIZE("model.baseline_window", model.pyramid.tag.baseline_window, "weighting window of Baseline fusion"),
        TAGDET_SIZE("model.gate_hidden", model.pyramid.tag.gate_hidden, "gate MLP hidden width, 0 for model.dim"),
        Entry{"model.fusion", "gating | average | maximum | baseline",
              [](RunConfig& c, std::string_view v) {
                  try {
                      c.model.pyramid.tag.fusion = model::parse_fusion_mode(v);
                  } catch (const std::exception&) {
                      bad_value("model.fusion", v, "gating, average, maximum or baseline");
                  }
              },
              [](const RunConfig& c) { return std::string(model::to_string(c.model.pyramid.tag.fusion)); }},
        TAGDET_BOOL("model.context", model.pyramid.tag.use_context, "enable the cross-attention context branch"),
        TAGDET_BOOL("model.gating", model.pyramid.tag.use_gating, "false forces Baseline fusion"),
        TAGDET_SIZE("model.bins", model.head.bins, "boundary bins B"),
        TAGDET_SIZE("model.head_depth", model.head.depth, "conv layers per head tower"),
        TAGDET_SIZE("model.head_kernel", model.head.kernel, "head convolution kernel"),
        TAGDET_REAL("model.prior_prob", model.head.prior_prob, "initial class probability"),

        TAGDET_REAL("loss.alpha", loss.alpha, "focal alpha"),
        TAGDET_REAL("loss.gamma", loss.gamma, "focal gamma"),
        Entry{"loss.iou", "plain | generalized",
              [](RunConfig& c, std::string_view v) {
                  if (v == "plain")
                      c.loss.iou = ad::IouVariant::Plain;
                  else if (v == "generalized")
                      c.loss.iou = ad::IouVariant::Generalized;
                  else
                      bad_value("loss.iou", v, "plain or generalized");
              },
              [](const RunConfig& c) {
                  return std::string(c.loss.iou == ad::IouVariant::Plain ? "plain" : "generalized");
              }},
        TAGDET_REAL("loss.center_radius", loss.center_radius, "center sampling radius, in strides"),
        TAGDET_REAL("loss.iou_floor", loss.iou_floor, "lower bound of the IoU classification weight"),
        TAGDET_REAL("loss.cls_weight", loss.cls_weight, "classification term weight"),
        TAGDET_REAL("loss.reg_weight", loss.reg_weight, "regression term weight"),

        TAGDET_SIZE("train.epochs", train.epochs, "epochs in the lr schedule"),
        TAGDET_SIZE("train.warmup_epochs", train.warmup_epochs, "linear warmup epochs"),
        TAGDET_REAL("train.lr", train.lr, "peak learning rate"),
        TAGDET_SIZE("train.batch_size", train.batch_size, "videos per step"),
        TAGDET_SIZE("train.max_steps", train.max_steps, "stop early after this many steps, 0 for none"),
        TAGDET_REAL("train.beta1", train.adam.beta1, "Adam beta1"),
        TAGDET_REAL("train.beta2", train.adam.beta2, "Adam beta2"),
        TAGDET_REAL("train.eps", train.adam.eps, "Adam epsilon"),
        TAGDET_REAL("train.weight_decay", train.adam.weight_decay, "decoupled weight decay"),
        TAGDET_SIZE("train.log_every", log_every, "steps between metric lines"),
        TAGDET_SIZE("train.checkpoint_every", checkpoint_every, "steps between checkpoints, 0 for end only"),

        TAGDET_REAL("infer.score_threshold", infer.score_threshold, "candidates must score above this"),
        TAGDET_SIZE("infer.top_k", infer.top_k, "pre-NMS candidates per video"),
        TAGDET_SIZE("infer.max_detections", infer.max_detections, "post-NMS detections per video, 0 for all"),
        Entry{"infer.nms", "gaussian | linear | hard",
              [](RunConfig& c, std::string_view v) {
                  try {
                      c.infer.nms.method = eval::parse_nms_method(v);
                  } catch (const std::exception&) {
                      bad_value("infer.nms", v, "gaussian, linear or hard");
                  }
              },
              [](const RunConfig& c) { return std::string(eval::to_string(c.infer.nms.method)); }},
        TAGDET_REAL("infer.nms_sigma", infer.nms.sigma, "Gaussian Soft-NMS sigma"),
        TAGDET_REAL("infer.nms_iou_threshold", infer.nms.iou_threshold, "linear/hard NMS IoU threshold"),
        TAGDET_REAL("infer.min_score", infer.nms.min_score, "drop segments decayed below this"),
        Entry{"infer.threads", "evaluation workers, 0 for all cores",
              [](RunConfig& c, std::string_view v) { c.threads = parse_int<unsigned>("infer.threads", v); },
              [](const RunConfig& c) { return std::to_string(c.threads); }},

        TAGDET_TEXT("eval.thresholds", thresholds, "IoU thresholds, start:step:stop or a comma list"),
        TAGDET_TEXT("eval.split", split, "split evaluated by eval, infer and ablate"),
        TAGDET_TEXT("data.dir", data_dir, "dataset directory"),
        TAGDET_TEXT("run.dir", run_dir, "output directory for checkpoints, logs and reports"),
    };
    return entries;
}

const Entry& lookup(std::string_view key) {
    for (const Entry& e : registry())
        if (e.key == key) return e;
    throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

}  // namespace

RunConfig::RunConfig() {
    model.pyramid.input_dim = 0;
    model.head.num_classes = 0;
    sync_seeds();
}

void RunConfig::set(std::string_view key, std::string_view value) { lookup(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return lookup(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const Entry& e : registry()) out.push_back(e.key);
    return out;
}

std::string RunConfig::help(std::string_view key) { return lookup(key).help; }

void RunConfig::apply_text(std::string_view text, std::string_view source) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
        try {
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    sync_seeds();
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    apply_text(ss.str(), path);
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const Entry& e : registry()) out += e.key + " = " + e.get(*this) + "\n";
    return out;
}

void RunConfig::sync_seeds() {
    train.seed = seed;
    synth.seed = seed;
}

void RunConfig::validate() const {
    model::ModelConfig m = model;
    if (m.pyramid.input_dim == 0) m.pyramid.input_dim = 1;
    if (m.head.num_classes == 0) m.head.num_classes = 1;
    m.pyramid.validate();
    m.head.validate();
    loss.validate();
    train.validate();
    if (log_every < 1) throw ConfigError("config: train.log_every must be >= 1");
    if (!(infer.score_threshold >= 0.0 && infer.score_threshold < 1.0))
        throw ConfigError("config: infer.score_threshold must lie in [0, 1)");
    if (!(infer.nms.sigma > 0.0)) throw ConfigError("config: infer.nms_sigma must be positive");
    if (!(infer.nms.iou_threshold >= 0.0 && infer.nms.iou_threshold <= 1.0))
        throw ConfigError("config: infer.nms_iou_threshold must lie in [0, 1]");
    if (!(infer.nms.min_score >= 0.0)) throw ConfigError("config: infer.min_score must be >= 0");
    try {
        eval::parse_thresholds(thresholds);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: eval.thresholds: ") + e.what());
    }
}

}  // namespace tagdet::cli
