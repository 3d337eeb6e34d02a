#pragma once

#include <cstdint>
#include <string>

#include "soctrack/embedding.hpp"
#include "soctrack/field_mask.hpp"
#include "soctrack/pseudo_label.hpp"
#include "soctrack/soft_nms.hpp"
#include "soctrack/synth.hpp"
#include "soctrack/tracker.hpp"

namespace soctrack {

struct ReidConfig {
  double tau_iou = 0.7;
  int min_len = 5;  // kept tracks must be strictly longer than this
  int k = 5;        // identities per batch
  int t = 10;       // samples per identity
  double margin = 2.0;
  std::uint64_t seed = 7;
};

struct AugmentConfig {
  double min_scale = 0.1;
  bool random_offset = false;
  std::uint64_t seed = 7;
};

struct EmbeddingConfig {
  std::string provider = "histogram";  // "histogram" or "external"
  HistogramConfig histogram;
  double external_scale = 4.0;
};

struct MetricsConfig {
  double iou_thresh = 0.5;
  double conf_thresh = 0.5;
};

struct AppConfig {
  TrackerConfig tracker;
  // When true the visual gate follows the embedding provider's default
  // (JSON: tracker.d_visual_max = null); tracker.d_visual_max holds an
  // explicit override otherwise.
  bool gate_from_provider = true;
  bool nms_enabled = false;
  SoftNmsConfig nms;
  FieldMaskConfig field_mask;
  PseudoLabelConfig pseudo_label;
  ReidConfig reid;
  AugmentConfig augment;
  EmbeddingConfig embedding;
  MetricsConfig metrics;
  ScenarioSpec synth;
  NoiseSpec noise;
};

AppConfig default_config();

// Strict parse: unknown keys, wrong types, and out-of-range enums all raise
// ParseError. Absent keys keep their defaults.
AppConfig load_config(const std::string& path);
AppConfig parse_config_text(const std::string& text, const std::string& origin);

// Applies one "dotted.path=json_value" override on top of a config. Bare
// words that fail to parse as JSON are taken as strings.
void apply_override(AppConfig& cfg, const std::string& assignment);

std::string config_to_json(const AppConfig& cfg);

}  // namespace soctrack
