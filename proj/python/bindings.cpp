#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <utility>
#include <vector>

#include "soctrack/assignment.hpp"
#include "soctrack/detections.hpp"
#include "soctrack/embedding.hpp"
#include "soctrack/field_mask.hpp"
#include "soctrack/geometry.hpp"
#include "soctrack/metrics.hpp"
#include "soctrack/pseudo_label.hpp"
#include "soctrack/soft_nms.hpp"
#include "soctrack/synth.hpp"
#include "soctrack/tracker.hpp"

namespace py = pybind11;
using namespace soctrack;

namespace {

using BoxTuple = std::tuple<double, double, double, double>;

BBox box_of(const BoxTuple& t) {
  return BBox(std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t));
}

BoxTuple tuple_of(const BBox& b) {
  return {b.x_min(), b.y_min(), b.x_max(), b.y_max()};
}

Image image_of(const py::array_t<std::uint8_t>& arr) {
  auto buf = arr.unchecked<3>();
  if (buf.shape(2) != 3) throw std::invalid_argument("expected an HxWx3 uint8 array");
  Image img(static_cast<int>(buf.shape(1)), static_cast<int>(buf.shape(0)));
  for (py::ssize_t y = 0; y < buf.shape(0); ++y) {
    for (py::ssize_t x = 0; x < buf.shape(1); ++x) {
      img.at(static_cast<int>(x), static_cast<int>(y)) =
          Rgb{buf(y, x, 0), buf(y, x, 1), buf(y, x, 2)};
    }
  }
  return img;
}

py::array_t<std::uint8_t> array_of(const Image& img) {
  py::array_t<std::uint8_t> arr({img.height(), img.width(), 3});
  auto buf = arr.mutable_unchecked<3>();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img.at(x, y);
      buf(y, x, 0) = p.r;
      buf(y, x, 1) = p.g;
      buf(y, x, 2) = p.b;
    }
  }
  return arr;
}

py::array_t<std::uint8_t> array_of(const FieldMask& mask) {
  py::array_t<std::uint8_t> arr({mask.height(), mask.width()});
  auto buf = arr.mutable_unchecked<2>();
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) buf(y, x) = mask.test(x, y) ? 1 : 0;
  }
  return arr;
}

FieldMask mask_of(const py::array_t<std::uint8_t>& arr) {
  auto buf = arr.unchecked<2>();
  FieldMask mask(static_cast<int>(buf.shape(1)), static_cast<int>(buf.shape(0)));
  for (py::ssize_t y = 0; y < buf.shape(0); ++y) {
    for (py::ssize_t x = 0; x < buf.shape(1); ++x) {
      if (buf(y, x)) mask.set(static_cast<int>(x), static_cast<int>(y), true);
    }
  }
  return mask;
}

std::vector<Embedding> embeddings_of(const std::vector<std::vector<double>>& vs) {
  std::vector<Embedding> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(Embedding{v});
  return out;
}

GtFrames gt_of(const std::map<int, std::vector<BoxTuple>>& frames) {
  GtFrames out;
  for (const auto& [f, boxes] : frames) {
    for (const auto& b : boxes) out[f].push_back(box_of(b));
  }
  return out;
}

DetFrames dets_of(const std::map<int, std::vector<std::tuple<double, double, double, double, double>>>& frames) {
  DetFrames out;
  for (const auto& [f, rows] : frames) {
    for (const auto& [x0, y0, x1, y1, conf] : rows) {
      out[f].push_back(ScoredBox{BBox(x0, y0, x1, y1), conf});
    }
  }
  return out;
}

IdFrames ids_of(const std::map<int, std::vector<std::pair<long, BoxTuple>>>& frames) {
  IdFrames out;
  for (const auto& [f, rows] : frames) {
    for (const auto& [id, b] : rows) out[f].push_back(IdBox{id, box_of(b)});
  }
  return out;
}

std::vector<Track> tracks_of(
    const std::vector<std::pair<long, std::vector<std::pair<int, BoxTuple>>>>& raw) {
  std::vector<Track> out;
  for (const auto& [id, entries] : raw) {
    Track t;
    t.id = id;
    for (const auto& [frame, b] : entries) {
      t.entries.push_back(TrackEntry{frame, box_of(b), {}});
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::pair<long, std::vector<std::pair<int, BoxTuple>>>> raw_of(
    const std::vector<Track>& tracks) {
  std::vector<std::pair<long, std::vector<std::pair<int, BoxTuple>>>> out;
  for (const Track& t : tracks) {
    std::vector<std::pair<int, BoxTuple>> entries;
    for (const TrackEntry& e : t.entries) entries.emplace_back(e.frame, tuple_of(e.bbox));
    out.emplace_back(t.id, std::move(entries));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_soctrack, m) {
  m.def("iou", [](const BoxTuple& a, const BoxTuple& b) {
    return iou(box_of(a), box_of(b));
  });
  m.def("box_center", [](const BoxTuple& b) {
    Point p = center(box_of(b));
    return py::make_tuple(p.x, p.y);
  });

  m.def(
      "soft_nms",
      [](const std::vector<std::tuple<double, double, double, double, double>>& rows,
         double iou_gate, double score_floor, const std::string& decay,
         double gaussian_sigma) {
        FrameDetections fd(0);
        for (const auto& [x0, y0, x1, y1, conf] : rows) {
          fd.add(Detection(0, BBox(x0, y0, x1, y1), conf));
        }
        SoftNmsConfig cfg;
        cfg.iou_gate = iou_gate;
        cfg.score_floor = score_floor;
        cfg.gaussian_sigma = gaussian_sigma;
        if (decay == "linear") {
          cfg.decay = NmsDecay::kLinear;
        } else if (decay == "gaussian") {
          cfg.decay = NmsDecay::kGaussian;
        } else {
          throw std::invalid_argument("decay must be 'linear' or 'gaussian'");
        }
        std::vector<std::tuple<double, double, double, double, double>> out;
        const FrameDetections kept = soft_nms(fd, cfg);
        for (const Detection& d : kept.items()) {
          out.emplace_back(d.bbox().x_min(), d.bbox().y_min(), d.bbox().x_max(),
                           d.bbox().y_max(), d.confidence());
        }
        return out;
      },
      py::arg("detections"), py::arg("iou_gate") = 0.3,
      py::arg("score_floor") = 0.001, py::arg("decay") = "linear",
      py::arg("gaussian_sigma") = 0.5);

  m.def("solve_assignment",
        [](const std::vector<std::vector<std::optional<double>>>& rows) {
          std::size_t r = rows.size();
          std::size_t c = r ? rows[0].size() : 0;
          CostMatrix costs(r, c);
          for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) {
              throw std::invalid_argument("cost matrix rows must share one length");
            }
            for (std::size_t j = 0; j < c; ++j) {
              if (rows[i][j]) {
                costs.set(i, j, *rows[i][j]);
              } else {
                costs.forbid(i, j);
              }
            }
          }
          Assignment a = solve_assignment(costs);
          return py::make_tuple(a.pairs, a.total_cost);
        },
        "Minimum-cost assignment; None marks a forbidden pair.");

  m.def(
      "triplet_loss",
      [](const std::vector<std::vector<std::vector<double>>>& groups, double margin) {
        std::vector<std::vector<Embedding>> gs;
        gs.reserve(groups.size());
        for (const auto& g : groups) gs.push_back(embeddings_of(g));
        return triplet_loss(gs, margin);
      },
      py::arg("groups"), py::arg("margin") = 2.0);

  m.def(
      "average_precision",
      [](const std::map<int, std::vector<BoxTuple>>& gt,
         const std::map<int, std::vector<std::tuple<double, double, double, double, double>>>& dets,
         double iou_thresh) {
        return average_precision(gt_of(gt), dets_of(dets), iou_thresh);
      },
      py::arg("gt"), py::arg("detections"), py::arg("iou_thresh") = 0.5);

  m.def(
      "precision_recall_f1",
      [](const std::map<int, std::vector<BoxTuple>>& gt,
         const std::map<int, std::vector<std::tuple<double, double, double, double, double>>>& dets,
         double iou_thresh, double conf_thresh) {
        Prf p = precision_recall_f1(gt_of(gt), dets_of(dets), iou_thresh, conf_thresh);
        py::dict d;
        d["precision"] = p.precision;
        d["recall"] = p.recall;
        d["f1"] = p.f1;
        d["tp"] = p.tp;
        d["fp"] = p.fp;
        d["fn"] = p.fn;
        return d;
      },
      py::arg("gt"), py::arg("detections"), py::arg("iou_thresh") = 0.5,
      py::arg("conf_thresh") = 0.5);

  m.def(
      "mota",
      [](const std::map<int, std::vector<std::pair<long, BoxTuple>>>& gt,
         const std::map<int, std::vector<std::pair<long, BoxTuple>>>& hyp,
         double iou_thresh) {
        MotaResult r = mota(ids_of(gt), ids_of(hyp), iou_thresh);
        py::dict d;
        d["mota"] = r.mota;
        d["fp"] = r.fp;
        d["fn"] = r.fn;
        d["idsw"] = r.idsw;
        d["gt_total"] = r.gt_total;
        return d;
      },
      py::arg("gt"), py::arg("hyp"), py::arg("iou_thresh") = 0.5);

  m.def(
      "idf1",
      [](const std::map<int, std::vector<std::pair<long, BoxTuple>>>& gt,
         const std::map<int, std::vector<std::pair<long, BoxTuple>>>& hyp,
         double iou_thresh) {
        Idf1Result r = idf1(ids_of(gt), ids_of(hyp), iou_thresh);
        py::dict d;
        d["idf1"] = r.idf1;
        d["idtp"] = r.idtp;
        d["idfp"] = r.idfp;
        d["idfn"] = r.idfn;
        return d;
      },
      py::arg("gt"), py::arg("hyp"), py::arg("iou_thresh") = 0.5);

  m.def(
      "embed_histogram",
      [](const py::array_t<std::uint8_t>& image, const BoxTuple& box, int hue_bins,
         int sat_bins, int val_bins) {
        HistogramConfig cfg;
        cfg.hue_bins = hue_bins;
        cfg.sat_bins = sat_bins;
        cfg.val_bins = val_bins;
        return embed_histogram(image_of(image), box_of(box), cfg).values;
      },
      py::arg("image"), py::arg("box"), py::arg("hue_bins") = 8,
      py::arg("sat_bins") = 8, py::arg("val_bins") = 4);

  m.def(
      "compute_field_mask",
      [](const py::array_t<std::uint8_t>& image) {
        return array_of(compute_field_mask(image_of(image)));
      },
      py::arg("image"));

  m.def(
      "field_overlap",
      [](const BoxTuple& box, const py::array_t<std::uint8_t>& mask) {
        return field_overlap(box_of(box), mask_of(mask));
      },
      py::arg("box"), py::arg("mask"));

  py::class_<TrackerConfig>(m, "TrackerConfig")
      .def(py::init<>())
      .def_readwrite("sigma_track", &TrackerConfig::sigma_track)
      .def_readwrite("tau_iou", &TrackerConfig::tau_iou)
      .def_readwrite("n_reid", &TrackerConfig::n_reid)
      .def_readwrite("alpha", &TrackerConfig::alpha)
      .def_readwrite("d_visual_max", &TrackerConfig::d_visual_max)
      .def_readwrite("d_spatial_max_frac", &TrackerConfig::d_spatial_max_frac)
      .def_readwrite("k_last", &TrackerConfig::k_last)
      .def_readwrite("min_track_len", &TrackerConfig::min_track_len);

  py::class_<Tracker>(m, "Tracker")
      .def(py::init<TrackerConfig, int>(), py::arg("config"), py::arg("image_width"))
      .def(
          "step",
          [](Tracker& t, int frame,
             const std::vector<std::tuple<double, double, double, double, double>>& rows,
             const std::optional<std::vector<std::vector<double>>>& embeddings) {
            FrameDetections fd(frame);
            for (const auto& [x0, y0, x1, y1, conf] : rows) {
              fd.add(Detection(frame, BBox(x0, y0, x1, y1), conf));
            }
            std::vector<Embedding> embs;
            if (embeddings) embs = embeddings_of(*embeddings);
            return t.step(fd, embs);
          },
          py::arg("frame"), py::arg("detections"),
          py::arg("embeddings") = std::nullopt)
      .def("finalize", [](const Tracker& t) { return raw_of(t.finalize()); });

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def(py::init<>())
      .def_readwrite("width", &ScenarioSpec::width)
      .def_readwrite("height", &ScenarioSpec::height)
      .def_readwrite("frame_count", &ScenarioSpec::frame_count)
      .def_readwrite("player_count", &ScenarioSpec::player_count)
      .def_readwrite("max_speed", &ScenarioSpec::max_speed)
      .def_readwrite("turn_prob", &ScenarioSpec::turn_prob)
      .def_readwrite("crowd_band", &ScenarioSpec::crowd_band)
      .def_readwrite("seed", &ScenarioSpec::seed);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<>())
      .def_static("none", &NoiseSpec::none)
      .def_readwrite("miss_prob", &NoiseSpec::miss_prob)
      .def_readwrite("fp_rate", &NoiseSpec::fp_rate)
      .def_readwrite("jitter_sigma", &NoiseSpec::jitter_sigma)
      .def_readwrite("tp_conf_lo", &NoiseSpec::tp_conf_lo)
      .def_readwrite("tp_conf_hi", &NoiseSpec::tp_conf_hi)
      .def_readwrite("occlusion_merge", &NoiseSpec::occlusion_merge)
      .def_readwrite("occlusion_iou", &NoiseSpec::occlusion_iou);

  m.def("generate_scenario",
        [](const ScenarioSpec& spec) { return raw_of(generate_scenario(spec)); });

  m.def(
      "corrupt_detections",
      [](const ScenarioSpec& spec,
         const std::vector<std::pair<long, std::vector<std::pair<int, BoxTuple>>>>& gt,
         const NoiseSpec& noise, std::uint64_t seed) {
        std::map<int, std::vector<std::tuple<double, double, double, double, double>>> out;
        for (const FrameDetections& fd :
             corrupt_detections(spec, tracks_of(gt), noise, seed)) {
          auto& rows = out[fd.frame()];
          for (const Detection& d : fd.items()) {
            rows.emplace_back(d.bbox().x_min(), d.bbox().y_min(), d.bbox().x_max(),
                              d.bbox().y_max(), d.confidence());
          }
        }
        return out;
      },
      py::arg("spec"), py::arg("gt"), py::arg("noise"), py::arg("seed"));

  m.def(
      "render_frame",
      [](const ScenarioSpec& spec, const std::vector<std::pair<long, BoxTuple>>& boxes) {
        std::vector<std::pair<TrackId, BBox>> bs;
        bs.reserve(boxes.size());
        for (const auto& [id, b] : boxes) bs.emplace_back(id, box_of(b));
        return array_of(render_frame(spec, bs));
      },
      py::arg("spec"), py::arg("boxes"));
}
