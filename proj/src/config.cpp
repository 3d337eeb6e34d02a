#include "soctrack/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "soctrack/errors.hpp"

namespace soctrack {
namespace {

using nlohmann::json;

// Wraps one JSON object; every field accessor marks its key as consumed so
// finish() can reject typos instead of silently ignoring them.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  const json* field(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = field(key)) {
      if (!v->is_number()) throw ParseError(loc(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = field(key)) {
      if (!v->is_number_integer()) {
        throw ParseError(loc(key) + ": expected an integer");
      }
      out = v->get<int>();
    }
  }

  void seed(const char* key, std::uint64_t& out) {
    if (const json* v = field(key)) {
      if (!v->is_number_unsigned() &&
          !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw ParseError(loc(key) + ": expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = field(key)) {
      if (!v->is_boolean()) throw ParseError(loc(key) + ": expected a boolean");
      out = v->get<bool>();
    }
  }

  void text(const char* key, std::string& out) {
    if (const json* v = field(key)) {
      if (!v->is_string()) throw ParseError(loc(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void hsv_triple(const char* key, Hsv& out) {
    if (const json* v = field(key)) {
      if (!v->is_array() || v->size() != 3) {
        throw ParseError(loc(key) + ": expected [h, s, v]");
      }
      int vals[3];
      for (int i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number_integer()) {
          throw ParseError(loc(key) + ": expected integer components");
        }
        vals[i] = (*v)[i].get<int>();
      }
      out = Hsv{vals[0], vals[1], vals[2]};
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ParseError(path_ + ": unknown key \"" + it.key() + "\"");
      }
    }
  }

  std::string loc(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_tracker(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "tracker");
  r.number("sigma_track", cfg.tracker.sigma_track);
  r.number("tau_iou", cfg.tracker.tau_iou);
  r.integer("n_reid", cfg.tracker.n_reid);
  if (const json* v = r.field("d_visual_max")) {
    if (v->is_null()) {
      cfg.gate_from_provider = true;
    } else if (v->is_number()) {
      cfg.gate_from_provider = false;
      cfg.tracker.d_visual_max = v->get<double>();
    } else {
      throw ParseError("tracker.d_visual_max: expected a number or null");
    }
  }
  r.number("alpha", cfg.tracker.alpha);
  r.number("d_spatial_max_frac", cfg.tracker.d_spatial_max_frac);
  r.integer("k_last", cfg.tracker.k_last);
  r.integer("min_track_len", cfg.tracker.min_track_len);
  r.finish();
}

void read_soft_nms(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "soft_nms");
  r.boolean("enabled", cfg.nms_enabled);
  r.number("iou_gate", cfg.nms.iou_gate);
  r.number("score_floor", cfg.nms.score_floor);
  if (const json* v = r.field("decay")) {
    if (!v->is_string()) throw ParseError("soft_nms.decay: expected a string");
    std::string s = v->get<std::string>();
    if (s == "linear") {
      cfg.nms.decay = NmsDecay::kLinear;
    } else if (s == "gaussian") {
      cfg.nms.decay = NmsDecay::kGaussian;
    } else {
      throw ParseError("soft_nms.decay: expected \"linear\" or \"gaussian\"");
    }
  }
  r.number("gaussian_sigma", cfg.nms.gaussian_sigma);
  r.finish();
}

void read_hue_scale(ObjectReader& r, const char* key, HueScale& out) {
  if (const json* v = r.field(key)) {
    if (!v->is_number_integer()) {
      throw ParseError(r.loc(key) + ": expected 180 or 360");
    }
    int n = v->get<int>();
    if (n == 180) {
      out = HueScale::kDeg180;
    } else if (n == 360) {
      out = HueScale::kDeg360;
    } else {
      throw ParseError(r.loc(key) + ": expected 180 or 360");
    }
  }
}

void read_field_mask(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "field_mask");
  r.hsv_triple("hsv_lower", cfg.field_mask.green.lower);
  r.hsv_triple("hsv_upper", cfg.field_mask.green.upper);
  read_hue_scale(r, "hue_scale", cfg.field_mask.green.scale);
  r.number("epsilon_frac", cfg.field_mask.epsilon_frac);
  r.boolean("line_fallback", cfg.field_mask.line_fallback);
  r.integer("fallback_max_sat", cfg.field_mask.fallback_max_sat);
  r.integer("fallback_min_val", cfg.field_mask.fallback_min_val);
  if (const json* v = r.field("line")) {
    ObjectReader lr(*v, "field_mask.line");
    lr.number("max_angle_deg", cfg.field_mask.line.max_angle_deg);
    lr.number("bottom_frac", cfg.field_mask.line.bottom_frac);
    lr.number("min_len_frac", cfg.field_mask.line.min_len_frac);
    lr.number("angle_step_deg", cfg.field_mask.line.angle_step_deg);
    lr.number("band_px", cfg.field_mask.line.band_px);
    lr.integer("max_gap_px", cfg.field_mask.line.max_gap_px);
    lr.finish();
  }
  r.finish();
}

void read_pseudo_label(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "pseudo_label");
  r.number("sigma", cfg.pseudo_label.sigma);
  r.number("min_field_overlap", cfg.pseudo_label.min_field_overlap);
  r.number("blob_area_lo", cfg.pseudo_label.blob_area_lo);
  r.number("blob_area_hi", cfg.pseudo_label.blob_area_hi);
  r.number("abs_area_lo", cfg.pseudo_label.abs_area_lo);
  r.number("abs_area_hi", cfg.pseudo_label.abs_area_hi);
  r.number("max_existing_iou", cfg.pseudo_label.max_existing_iou);
  r.number("min_aspect", cfg.pseudo_label.min_aspect);
  r.number("max_aspect", cfg.pseudo_label.max_aspect);
  r.number("min_nongreen_frac", cfg.pseudo_label.min_nongreen_frac);
  r.finish();
}

void read_reid(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "reid");
  r.number("tau_iou", cfg.reid.tau_iou);
  r.integer("min_len", cfg.reid.min_len);
  r.integer("k", cfg.reid.k);
  r.integer("t", cfg.reid.t);
  r.number("margin", cfg.reid.margin);
  r.seed("seed", cfg.reid.seed);
  r.finish();
}

void read_augment(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "augment");
  r.number("min_scale", cfg.augment.min_scale);
  r.boolean("random_offset", cfg.augment.random_offset);
  r.seed("seed", cfg.augment.seed);
  r.finish();
}

void read_embedding(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "embedding");
  r.text("provider", cfg.embedding.provider);
  if (cfg.embedding.provider != "histogram" && cfg.embedding.provider != "external") {
    throw ParseError("embedding.provider: expected \"histogram\" or \"external\"");
  }
  r.integer("hue_bins", cfg.embedding.histogram.hue_bins);
  r.integer("sat_bins", cfg.embedding.histogram.sat_bins);
  r.integer("val_bins", cfg.embedding.histogram.val_bins);
  read_hue_scale(r, "hue_scale", cfg.embedding.histogram.scale);
  r.number("external_scale", cfg.embedding.external_scale);
  r.finish();
}

void read_metrics(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "metrics");
  r.number("iou_thresh", cfg.metrics.iou_thresh);
  r.number("conf_thresh", cfg.metrics.conf_thresh);
  r.finish();
}

void read_noise(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "noise");
  r.number("miss_prob", cfg.noise.miss_prob);
  r.number("fp_rate", cfg.noise.fp_rate);
  r.number("jitter_sigma", cfg.noise.jitter_sigma);
  r.number("tp_conf_lo", cfg.noise.tp_conf_lo);
  r.number("tp_conf_hi", cfg.noise.tp_conf_hi);
  r.number("fp_conf_lo", cfg.noise.fp_conf_lo);
  r.number("fp_conf_hi", cfg.noise.fp_conf_hi);
  r.boolean("occlusion_merge", cfg.noise.occlusion_merge);
  r.number("occlusion_iou", cfg.noise.occlusion_iou);
  r.finish();
}

void read_synth(const json& j, AppConfig& cfg) {
  ObjectReader r(j, "synth");
  r.integer("width", cfg.synth.width);
  r.integer("height", cfg.synth.height);
  r.integer("frame_count", cfg.synth.frame_count);
  r.integer("player_count", cfg.synth.player_count);
  r.number("min_box_w", cfg.synth.min_box_w);
  r.number("max_box_w", cfg.synth.max_box_w);
  r.number("min_box_h", cfg.synth.min_box_h);
  r.number("max_box_h", cfg.synth.max_box_h);
  r.number("max_speed", cfg.synth.max_speed);
  r.number("turn_prob", cfg.synth.turn_prob);
  r.integer("crowd_band", cfg.synth.crowd_band);
  r.number("field_margin", cfg.synth.field_margin);
  r.number("max_pair_iou", cfg.synth.max_pair_iou);
  r.number("min_gap", cfg.synth.min_gap);
  r.seed("seed", cfg.synth.seed);
  r.finish();
}

AppConfig from_json(const json& j, const std::string& origin) {
  AppConfig cfg = default_config();
  ObjectReader top(j, origin);
  if (const json* v = top.field("tracker")) read_tracker(*v, cfg);
  if (const json* v = top.field("soft_nms")) read_soft_nms(*v, cfg);
  if (const json* v = top.field("field_mask")) read_field_mask(*v, cfg);
  if (const json* v = top.field("pseudo_label")) read_pseudo_label(*v, cfg);
  if (const json* v = top.field("reid")) read_reid(*v, cfg);
  if (const json* v = top.field("augment")) read_augment(*v, cfg);
  if (const json* v = top.field("embedding")) read_embedding(*v, cfg);
  if (const json* v = top.field("metrics")) read_metrics(*v, cfg);
  if (const json* v = top.field("synth")) read_synth(*v, cfg);
  if (const json* v = top.field("noise")) read_noise(*v, cfg);
  top.finish();
  // The pseudo-label stage reuses the mask's notion of pitch green.
  cfg.pseudo_label.green = cfg.field_mask.green;
  cfg.tracker.validate();
  return cfg;
}

json hsv_json(const Hsv& h) { return json::array({h.h, h.s, h.v}); }

json to_json(const AppConfig& cfg) {
  json j;
  j["tracker"] = {
      {"sigma_track", cfg.tracker.sigma_track},
      {"tau_iou", cfg.tracker.tau_iou},
      {"n_reid", cfg.tracker.n_reid},
      {"alpha", cfg.tracker.alpha},
      {"d_spatial_max_frac", cfg.tracker.d_spatial_max_frac},
      {"k_last", cfg.tracker.k_last},
      {"min_track_len", cfg.tracker.min_track_len},
  };
  j["tracker"]["d_visual_max"] =
      cfg.gate_from_provider ? json() : json(cfg.tracker.d_visual_max);
  j["soft_nms"] = {
      {"enabled", cfg.nms_enabled},
      {"iou_gate", cfg.nms.iou_gate},
      {"score_floor", cfg.nms.score_floor},
      {"decay", cfg.nms.decay == NmsDecay::kLinear ? "linear" : "gaussian"},
      {"gaussian_sigma", cfg.nms.gaussian_sigma},
  };
  j["field_mask"] = {
      {"hsv_lower", hsv_json(cfg.field_mask.green.lower)},
      {"hsv_upper", hsv_json(cfg.field_mask.green.upper)},
      {"hue_scale", cfg.field_mask.green.scale == HueScale::kDeg180 ? 180 : 360},
      {"epsilon_frac", cfg.field_mask.epsilon_frac},
      {"line_fallback", cfg.field_mask.line_fallback},
      {"fallback_max_sat", cfg.field_mask.fallback_max_sat},
      {"fallback_min_val", cfg.field_mask.fallback_min_val},
      {"line",
       {
           {"max_angle_deg", cfg.field_mask.line.max_angle_deg},
           {"bottom_frac", cfg.field_mask.line.bottom_frac},
           {"min_len_frac", cfg.field_mask.line.min_len_frac},
           {"angle_step_deg", cfg.field_mask.line.angle_step_deg},
           {"band_px", cfg.field_mask.line.band_px},
           {"max_gap_px", cfg.field_mask.line.max_gap_px},
       }},
  };
  j["pseudo_label"] = {
      {"sigma", cfg.pseudo_label.sigma},
      {"min_field_overlap", cfg.pseudo_label.min_field_overlap},
      {"blob_area_lo", cfg.pseudo_label.blob_area_lo},
      {"blob_area_hi", cfg.pseudo_label.blob_area_hi},
      {"abs_area_lo", cfg.pseudo_label.abs_area_lo},
      {"abs_area_hi", cfg.pseudo_label.abs_area_hi},
      {"max_existing_iou", cfg.pseudo_label.max_existing_iou},
      {"min_aspect", cfg.pseudo_label.min_aspect},
      {"max_aspect", cfg.pseudo_label.max_aspect},
      {"min_nongreen_frac", cfg.pseudo_label.min_nongreen_frac},
  };
  j["reid"] = {
      {"tau_iou", cfg.reid.tau_iou}, {"min_len", cfg.reid.min_len},
      {"k", cfg.reid.k},             {"t", cfg.reid.t},
      {"margin", cfg.reid.margin},   {"seed", cfg.reid.seed},
  };
  j["augment"] = {
      {"min_scale", cfg.augment.min_scale},
      {"random_offset", cfg.augment.random_offset},
      {"seed", cfg.augment.seed},
  };
  j["embedding"] = {
      {"provider", cfg.embedding.provider},
      {"hue_bins", cfg.embedding.histogram.hue_bins},
      {"sat_bins", cfg.embedding.histogram.sat_bins},
      {"val_bins", cfg.embedding.histogram.val_bins},
      {"hue_scale", cfg.embedding.histogram.scale == HueScale::kDeg180 ? 180 : 360},
      {"external_scale", cfg.embedding.external_scale},
  };
  j["metrics"] = {
      {"iou_thresh", cfg.metrics.iou_thresh},
      {"conf_thresh", cfg.metrics.conf_thresh},
  };
  j["synth"] = {
      {"width", cfg.synth.width},
      {"height", cfg.synth.height},
      {"frame_count", cfg.synth.frame_count},
      {"player_count", cfg.synth.player_count},
      {"min_box_w", cfg.synth.min_box_w},
      {"max_box_w", cfg.synth.max_box_w},
      {"min_box_h", cfg.synth.min_box_h},
      {"max_box_h", cfg.synth.max_box_h},
      {"max_speed", cfg.synth.max_speed},
      {"turn_prob", cfg.synth.turn_prob},
      {"crowd_band", cfg.synth.crowd_band},
      {"field_margin", cfg.synth.field_margin},
      {"max_pair_iou", cfg.synth.max_pair_iou},
      {"min_gap", cfg.synth.min_gap},
      {"seed", cfg.synth.seed},
  };
  j["noise"] = {
      {"miss_prob", cfg.noise.miss_prob},
      {"fp_rate", cfg.noise.fp_rate},
      {"jitter_sigma", cfg.noise.jitter_sigma},
      {"tp_conf_lo", cfg.noise.tp_conf_lo},
      {"tp_conf_hi", cfg.noise.tp_conf_hi},
      {"fp_conf_lo", cfg.noise.fp_conf_lo},
      {"fp_conf_hi", cfg.noise.fp_conf_hi},
      {"occlusion_merge", cfg.noise.occlusion_merge},
      {"occlusion_iou", cfg.noise.occlusion_iou},
  };
  return j;
}

}  // namespace

AppConfig default_config() { return AppConfig{}; }

AppConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(origin + ": invalid JSON");
  return from_json(j, origin);
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void apply_override(AppConfig& cfg, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParseError("override must look like section.key=value: " + assignment);
  }
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);

  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = json(value);  // bare word, keep as string

  json root = to_json(cfg);
  json* node = &root;
  std::size_t start = 0;
  std::vector<std::string> segments;
  while (true) {
    auto dot = path.find('.', start);
    segments.push_back(path.substr(start, dot == std::string::npos
                                              ? std::string::npos
                                              : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (!node->is_object() || !node->contains(segments[i])) {
      throw ParseError("unknown config section \"" + segments[i] + "\"");
    }
    node = &(*node)[segments[i]];
  }
  const std::string& leaf = segments.back();
  if (!node->is_object() || !node->contains(leaf)) {
    throw ParseError("unknown config key \"" + path + "\"");
  }
  (*node)[leaf] = parsed;
  cfg = from_json(root, "override " + path);
}

std::string config_to_json(const AppConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace soctrack
