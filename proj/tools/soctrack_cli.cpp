#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "soctrack/config.hpp"
#include "soctrack/embedding.hpp"
#include "soctrack/errors.hpp"
#include "soctrack/field_mask.hpp"
#include "soctrack/metrics.hpp"
#include "soctrack/mot_io.hpp"
#include "soctrack/pseudo_label.hpp"
#include "soctrack/rng.hpp"
#include "soctrack/soft_nms.hpp"
#include "soctrack/synth.hpp"
#include "soctrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace soctrack;

namespace {

// Wrong flag combinations discovered after config parsing; exits 1, not 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool log_debug_enabled() {
  const char* v = std::getenv("SOCTRACK_LOG");
  return v && std::string(v) == "debug";
}

void log_debug(const std::string& msg) {
  if (log_debug_enabled()) std::cerr << "soctrack: " << msg << "\n";
}

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--set", o.sets,
                  "Override one config key, e.g. --set tracker.tau_iou=0.6")
      ->take_all();
}

AppConfig make_config(const CommonOpts& o) {
  AppConfig cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
  for (const std::string& s : o.sets) apply_override(cfg, s);
  return cfg;
}

template <typename Fn>
int run_stage(const char* what, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "soctrack: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "soctrack: " << what << " error: " << e.what() << "\n";
    return 2;
  }
}

template <typename Fn>
int with_config(const CommonOpts& common, const char* stage, Fn&& fn) {
  AppConfig cfg;
  try {
    cfg = make_config(common);
  } catch (const std::exception& e) {
    std::cerr << "soctrack: config error: " << e.what() << "\n";
    return 1;
  }
  return run_stage(stage, [&] { fn(cfg); });
}

std::string frame_image_path(const std::string& dir, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.png", frame);
  return (fs::path(dir) / name).string();
}

std::map<int, const FrameDetections*> by_frame(const std::vector<FrameDetections>& v) {
  std::map<int, const FrameDetections*> m;
  for (const auto& fd : v) m[fd.frame()] = &fd;
  return m;
}

// ---------------------------------------------------------------- track

struct TrackOpts {
  CommonOpts common;
  std::string dets, images, embeddings, out;
  int width = 0;
  bool interpolate = false;
};

int run_track(const TrackOpts& o) {
  return with_config(o.common, "track", [&](const AppConfig& cfg) {
    std::vector<FrameDetections> frames = read_mot_detections(o.dets);
    if (frames.empty()) {
      write_mot_tracks(o.out, {});
      return;
    }

    EmbeddingStore store;
    std::unique_ptr<EmbeddingProvider> provider;
    if (!o.embeddings.empty()) {
      store = load_external_embeddings(o.embeddings);
      provider = std::make_unique<ExternalProvider>(store, cfg.embedding.external_scale);
    } else if (!o.images.empty()) {
      provider = std::make_unique<HistogramProvider>(cfg.embedding.histogram);
    } else {
      throw UsageError("tracking needs --embeddings or --images to supply appearance");
    }

    TrackerConfig tcfg = cfg.tracker;
    if (cfg.gate_from_provider) tcfg.d_visual_max = provider->default_visual_gate();

    auto lookup = by_frame(frames);
    int first = lookup.begin()->first;
    int last = lookup.rbegin()->first;

    int width = o.width;
    std::optional<Image> img;
    if (!o.images.empty()) {
      img = load_image(frame_image_path(o.images, first));
      width = img->width();
    } else if (width <= 0) {
      width = cfg.synth.width;
      log_debug("no --width or --images; using synth.width " + std::to_string(width));
    }

    Tracker tracker(tcfg, width);
    for (int frame = first; frame <= last; ++frame) {
      auto it = lookup.find(frame);
      if (it == lookup.end()) {
        tracker.step(FrameDetections(frame));
        continue;
      }
      FrameDetections fd = cfg.nms_enabled ? soft_nms(*it->second, cfg.nms) : *it->second;
      if (!o.images.empty() && !(img && frame == first)) {
        img = load_image(frame_image_path(o.images, frame));
      }
      std::vector<Embedding> embs;
      embs.reserve(fd.items().size());
      for (const Detection& d : fd.items()) {
        try {
          embs.push_back(provider->embed(img ? &*img : nullptr, d));
        } catch (const std::exception&) {
          // Sub-threshold detections may lack pixels or store entries; the
          // tracker never consults them.
          if (d.confidence() > tcfg.sigma_track) throw;
          embs.push_back(Embedding{});
        }
      }
      tracker.step(fd, embs);
    }

    std::vector<Track> result = tracker.finalize();
    if (o.interpolate) {
      for (Track& t : result) t = interpolate_gaps(t);
    }
    write_mot_tracks(o.out, result);
  });
}

// ----------------------------------------------------------------- eval

struct EvalOpts {
  CommonOpts common;
  std::string gt, input, mode = "mot", out, csv, name;
};

template <typename M>
void clamp_frames(M& m, int lo, int hi) {
  for (auto it = m.begin(); it != m.end();) {
    if (it->first < lo || it->first > hi) {
      it = m.erase(it);
    } else {
      ++it;
    }
  }
}

int run_eval(const EvalOpts& o) {
  return with_config(o.common, "eval", [&](const AppConfig& cfg) {
    if (o.mode != "det" && o.mode != "mot") {
      throw UsageError("--mode must be det or mot");
    }
    MetricsReport report;
    IdFrames gt = read_mot_tracks(o.gt);
    if (o.mode == "det") {
      DetFrames det = scored_frames(read_mot_detections(o.input));
      GtFrames gtb = boxes_only(gt);
      report.ap = average_precision(gtb, det, cfg.metrics.iou_thresh);
      report.prf = precision_recall_f1(gtb, det, cfg.metrics.iou_thresh,
                                       cfg.metrics.conf_thresh);
    } else {
      IdFrames hyp = read_mot_tracks(o.input);
      if (!gt.empty() && !hyp.empty()) {
        int glo = gt.begin()->first, ghi = gt.rbegin()->first;
        int hlo = hyp.begin()->first, hhi = hyp.rbegin()->first;
        if (glo != hlo || ghi != hhi) {
          int lo = std::max(glo, hlo), hi = std::min(ghi, hhi);
          std::cerr << "soctrack: warning: frame ranges differ (gt " << glo << ".."
                    << ghi << ", input " << hlo << ".." << hhi
                    << "); evaluating the intersection " << lo << ".." << hi << "\n";
          clamp_frames(gt, lo, hi);
          clamp_frames(hyp, lo, hi);
        }
      }
      report.clear_mot = mota(gt, hyp, cfg.metrics.iou_thresh);
      report.identity = idf1(gt, hyp, cfg.metrics.iou_thresh);
    }
    std::cout << report.to_text();
    if (!o.out.empty()) {
      std::ofstream f(o.out);
      if (!f) throw ParseError("cannot open " + o.out + " for writing");
      f << report.to_text();
    }
    if (!o.csv.empty()) {
      std::string name = o.name.empty() ? fs::path(o.input).filename().string() : o.name;
      std::ofstream f(o.csv);
      if (!f) throw ParseError("cannot open " + o.csv + " for writing");
      f << MetricsReport::csv_header() << "\n" << report.to_csv_row(name) << "\n";
    }
  });
}

// ------------------------------------------------------------ fieldmask

struct FieldmaskOpts {
  CommonOpts common;
  std::string image, line_mask, out;
};

int run_fieldmask(const FieldmaskOpts& o) {
  return with_config(o.common, "fieldmask", [&](const AppConfig& cfg) {
    Image img = load_image(o.image);
    std::optional<FieldMask> line;
    if (!o.line_mask.empty()) line = load_mask(o.line_mask);
    FieldMask mask = compute_field_mask(img, line ? &*line : nullptr, cfg.field_mask);
    save_mask(o.out, mask);
  });
}

// ---------------------------------------------------------- pseudolabel

struct PseudolabelOpts {
  CommonOpts common;
  std::string dets, images, out, verdicts, augment_dir, augment_dets;
};

int run_pseudolabel(const PseudolabelOpts& o) {
  return with_config(o.common, "pseudolabel", [&](const AppConfig& cfg) {
    if ((o.augment_dir.empty()) != (o.augment_dets.empty())) {
      throw UsageError("--augment-dir and --augment-dets go together");
    }
    std::vector<FrameDetections> frames = read_mot_detections(o.dets);
    std::unique_ptr<Verifier> verifier;
    if (o.verdicts.empty()) {
      verifier = std::make_unique<HeuristicVerifier>(cfg.pseudo_label);
    } else {
      verifier = std::make_unique<VerdictFileVerifier>(o.verdicts);
    }

    bool augment = !o.augment_dir.empty();
    if (augment) fs::create_directories(o.augment_dir);
    Rng aug_rng(cfg.augment.seed);

    std::vector<FrameDetections> corrected;
    std::vector<FrameDetections> augmented;
    for (const FrameDetections& fd : frames) {
      Image img = load_image(frame_image_path(o.images, fd.frame()));
      FieldMask mask = compute_field_mask(img, nullptr, cfg.field_mask);
      std::vector<LabeledBox> labels =
          correct_annotations(fd, img, mask, cfg.pseudo_label, *verifier);
      FrameDetections out_fd(fd.frame());
      std::vector<BBox> boxes;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        out_fd.add(Detection(fd.frame(), labels[i].bbox, 1.0,
                             EmbeddingKey{fd.frame(), static_cast<int>(i)}));
        boxes.push_back(labels[i].bbox);
      }
      corrected.push_back(out_fd);
      if (augment) {
        AugmentResult ar = rescale_pad_augment(img, boxes, cfg.augment.min_scale,
                                               aug_rng, cfg.augment.random_offset);
        save_image(frame_image_path(o.augment_dir, fd.frame()), ar.image);
        FrameDetections afd(fd.frame());
        for (std::size_t i = 0; i < ar.boxes.size(); ++i) {
          afd.add(Detection(fd.frame(), ar.boxes[i], 1.0,
                            EmbeddingKey{fd.frame(), static_cast<int>(i)}));
        }
        augmented.push_back(afd);
      }
    }
    write_mot_detections(o.out, corrected);
    if (augment) write_mot_detections(o.augment_dets, augmented);
  });
}

// --------------------------------------------------------- reid_dataset

struct ReidOpts {
  CommonOpts common;
  std::string dets, out_tracks, out_batches;
  int batches = 0;
};

int run_reid_dataset(const ReidOpts& o) {
  return with_config(o.common, "reid_dataset", [&](const AppConfig& cfg) {
    if (o.batches > 0 && o.out_batches.empty()) {
      throw UsageError("--batches needs --out-batches");
    }
    std::vector<FrameDetections> frames = read_mot_detections(o.dets);
    std::vector<Track> tracks =
        generate_reid_tracks(frames, cfg.reid.tau_iou, cfg.reid.min_len);
    write_mot_tracks(o.out_tracks, tracks);
    log_debug("kept " + std::to_string(tracks.size()) + " tracks");

    if (o.batches > 0) {
      std::FILE* f = std::fopen(o.out_batches.c_str(), "w");
      if (!f) throw ParseError("cannot open " + o.out_batches + " for writing");
      std::fprintf(f, "batch,slot,track,frame,x_min,y_min,width,height\n");
      Rng rng(cfg.reid.seed);
      for (int b = 0; b < o.batches; ++b) {
        ReidBatch batch = sample_triplet_batch(
            tracks, static_cast<std::size_t>(cfg.reid.k),
            static_cast<std::size_t>(cfg.reid.t), rng);
        for (std::size_t s = 0; s < batch.samples.size(); ++s) {
          const ReidSample& smp = batch.samples[s];
          std::fprintf(f, "%d,%zu,%ld,%d,%.4f,%.4f,%.4f,%.4f\n", b, s, smp.track_id,
                       smp.frame, smp.bbox.x_min(), smp.bbox.y_min(),
                       smp.bbox.width(), smp.bbox.height());
        }
      }
      std::fclose(f);
    }
  });
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
  CommonOpts common;
  std::string out_dets, out_gt, render_dir;
};

int run_synth(const SynthOpts& o) {
  return with_config(o.common, "synth", [&](const AppConfig& cfg) {
    std::vector<Track> gt = generate_scenario(cfg.synth);
    // Corruption draws from its own stream so noise settings never disturb
    // the trajectories.
    std::vector<FrameDetections> dets =
        corrupt_detections(cfg.synth, gt, cfg.noise, cfg.synth.seed + 1);
    if (!o.out_gt.empty()) write_mot_tracks(o.out_gt, gt);
    if (!o.out_dets.empty()) write_mot_detections(o.out_dets, dets);
    if (!o.render_dir.empty()) {
      fs::create_directories(o.render_dir);
      for (int frame = 1; frame <= cfg.synth.frame_count; ++frame) {
        Image img = render_frame(cfg.synth, boxes_at(gt, frame));
        save_image(frame_image_path(o.render_dir, frame), img);
      }
    }
  });
}

// ---------------------------------------------------------------- embed

struct EmbedOpts {
  CommonOpts common;
  std::string dets, images, out;
};

int run_embed(const EmbedOpts& o) {
  return with_config(o.common, "embed", [&](const AppConfig& cfg) {
    std::vector<FrameDetections> frames = read_mot_detections(o.dets);
    HistogramProvider provider(cfg.embedding.histogram);
    std::FILE* f = std::fopen(o.out.c_str(), "w");
    if (!f) throw ParseError("cannot open " + o.out + " for writing");
    for (const FrameDetections& fd : frames) {
      Image img = load_image(frame_image_path(o.images, fd.frame()));
      int idx = 0;
      for (const Detection& d : fd.items()) {
        Embedding e = provider.embed(&img, d);
        std::fprintf(f, "%d,%d", fd.frame(), idx++);
        for (double v : e.values) std::fprintf(f, ",%.17g", v);
        std::fprintf(f, "\n");
      }
    }
    std::fclose(f);
  });
}

// -------------------------------------------------------------- overlay

struct OverlayOpts {
  CommonOpts common;
  std::string tracks, images, out_dir;
  int stroke = 2;
};

void draw_box(Image& img, const BBox& box, const Rgb& color, int stroke) {
  int x0 = std::max(0, static_cast<int>(std::ceil(box.x_min() - 0.5)));
  int y0 = std::max(0, static_cast<int>(std::ceil(box.y_min() - 0.5)));
  int x1 = std::min(img.width(), static_cast<int>(std::ceil(box.x_max() - 0.5)));
  int y1 = std::min(img.height(), static_cast<int>(std::ceil(box.y_max() - 0.5)));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      bool edge = x < x0 + stroke || x >= x1 - stroke || y < y0 + stroke ||
                  y >= y1 - stroke;
      if (edge) img.at(x, y) = color;
    }
  }
}

int run_overlay(const OverlayOpts& o) {
  return with_config(o.common, "overlay", [&](const AppConfig& cfg) {
    (void)cfg;
    IdFrames tracks = read_mot_tracks(o.tracks);
    fs::create_directories(o.out_dir);
    for (const auto& [frame, boxes] : tracks) {
      Image img = load_image(frame_image_path(o.images, frame));
      for (const IdBox& ib : boxes) {
        draw_box(img, ib.bbox, player_color(ib.id), o.stroke);
      }
      save_image(frame_image_path(o.out_dir, frame), img);
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soccer player tracking and self-labeling toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  TrackOpts track;
  auto* t = app.add_subcommand("track", "Run the tracker over a detection file");
  add_common(t, track.common);
  t->add_option("--dets", track.dets, "MOT detection file")->required();
  t->add_option("--images", track.images, "frame directory (000001.png, ...)");
  t->add_option("--embeddings", track.embeddings, "external embedding CSV");
  t->add_option("--width", track.width, "image width when no --images given");
  t->add_flag("--interpolate", track.interpolate, "fill re-identified gaps linearly");
  t->add_option("--out", track.out, "output track file")->required();
  t->callback([&] { rc = run_track(track); });

  EvalOpts eval;
  auto* e = app.add_subcommand("eval", "Score detections or tracks against ground truth");
  add_common(e, eval.common);
  e->add_option("--gt", eval.gt, "ground-truth track file")->required();
  e->add_option("--input", eval.input, "file under evaluation")->required();
  e->add_option("--mode", eval.mode, "det (AP/F1) or mot (MOTA/IDF1)");
  e->add_option("--out", eval.out, "also write the report here");
  e->add_option("--csv", eval.csv, "also write a CSV row here");
  e->add_option("--name", eval.name, "row label for --csv");
  e->callback([&] { rc = run_eval(eval); });

  FieldmaskOpts fm;
  auto* f = app.add_subcommand("fieldmask", "Compute the playing-field mask of one image");
  add_common(f, fm.common);
  f->add_option("--image", fm.image, "input frame")->required();
  f->add_option("--line-mask", fm.line_mask, "external line mask PNG");
  f->add_option("--out", fm.out, "output mask PNG")->required();
  f->callback([&] { rc = run_fieldmask(fm); });

  PseudolabelOpts pl;
  auto* p = app.add_subcommand("pseudolabel", "Correct teacher detections into pseudo-labels");
  add_common(p, pl.common);
  p->add_option("--dets", pl.dets, "teacher detection file")->required();
  p->add_option("--images", pl.images, "frame directory")->required();
  p->add_option("--out", pl.out, "corrected label file")->required();
  p->add_option("--verdicts", pl.verdicts, "verifier verdict CSV (default: heuristic)");
  p->add_option("--augment-dir", pl.augment_dir, "write rescale-pad augmented frames here");
  p->add_option("--augment-dets", pl.augment_dets, "write augmented boxes here");
  p->callback([&] { rc = run_pseudolabel(pl); });

  ReidOpts rd;
  auto* r = app.add_subcommand("reid_dataset", "Build re-identification tracks and batches");
  add_common(r, rd.common);
  r->add_option("--dets", rd.dets, "detection file")->required();
  r->add_option("--out-tracks", rd.out_tracks, "output track file")->required();
  r->add_option("--batches", rd.batches, "number of K x T batches to sample");
  r->add_option("--out-batches", rd.out_batches, "batch manifest CSV");
  r->callback([&] { rc = run_reid_dataset(rd); });

  SynthOpts sy;
  auto* s = app.add_subcommand("synth", "Generate a synthetic scenario");
  add_common(s, sy.common);
  s->add_option("--out-dets", sy.out_dets, "corrupted detection file");
  s->add_option("--out-gt", sy.out_gt, "ground-truth track file");
  s->add_option("--render", sy.render_dir, "render frames into this directory");
  s->callback([&] { rc = run_synth(sy); });

  EmbedOpts em;
  auto* m = app.add_subcommand("embed", "Write histogram embeddings for a detection file");
  add_common(m, em.common);
  m->add_option("--dets", em.dets, "detection file")->required();
  m->add_option("--images", em.images, "frame directory")->required();
  m->add_option("--out", em.out, "embedding CSV")->required();
  m->callback([&] { rc = run_embed(em); });

  OverlayOpts ov;
  auto* v = app.add_subcommand("overlay", "Draw track boxes onto frames");
  add_common(v, ov.common);
  v->add_option("--tracks", ov.tracks, "track file")->required();
  v->add_option("--images", ov.images, "frame directory")->required();
  v->add_option("--out-dir", ov.out_dir, "output frame directory")->required();
  v->add_option("--stroke", ov.stroke, "outline thickness in pixels");
  v->callback([&] { rc = run_overlay(ov); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) return app.exit(ex);
    std::cerr << "soctrack: " << ex.what() << "\n";
    return 1;
  }
  return rc;
}
