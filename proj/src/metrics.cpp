#include "soctrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>

#include "soctrack/assignment.hpp"

namespace soctrack {

namespace {

struct RankedDet {
  int frame;
  std::size_t index;
  double conf;
  const BBox* box;
};

std::vector<RankedDet> rank_detections(const DetFrames& dets) {
  std::vector<RankedDet> ranked;
  for (const auto& [frame, list] : dets) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      ranked.push_back(RankedDet{frame, i, list[i].confidence, &list[i].bbox});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedDet& a, const RankedDet& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.index < b.index;
  });
  return ranked;
}

// Greedy matching in rank order; returns per-rank TP flags.
std::vector<char> match_ranked(const std::vector<RankedDet>& ranked,
                               const GtFrames& gt, double iou_thresh) {
  std::map<int, std::vector<char>> used;
  for (const auto& [frame, boxes] : gt) used[frame].assign(boxes.size(), 0);

  std::vector<char> tp(ranked.size(), 0);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto git = gt.find(ranked[r].frame);
    if (git == gt.end()) continue;
    const std::vector<BBox>& boxes = git->second;
    std::vector<char>& flags = used[ranked[r].frame];
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (flags[i]) continue;
      const double ov = iou(*ranked[r].box, boxes[i]);
      if (ov >= iou_thresh && ov > best) {
        best = ov;
        best_i = i;
      }
    }
    if (best >= 0.0) {
      flags[best_i] = 1;
      tp[r] = 1;
    }
  }
  return tp;
}

void check_unique_ids(const IdFrames& frames, const char* who) {
  for (const auto& [frame, boxes] : frames) {
    std::set<TrackId> seen;
    for (const IdBox& b : boxes) {
      if (!seen.insert(b.id).second) {
        throw std::invalid_argument(std::string(who) +
                                    ": duplicate id in frame " + std::to_string(frame));
      }
    }
  }
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

double average_precision(const GtFrames& gt, const DetFrames& dets,
                         double iou_thresh) {
  long total_gt = 0;
  for (const auto& [frame, boxes] : gt) total_gt += static_cast<long>(boxes.size());
  if (total_gt == 0) return std::numeric_limits<double>::quiet_NaN();

  const std::vector<RankedDet> ranked = rank_detections(dets);
  const std::vector<char> tp = match_ranked(ranked, gt, iou_thresh);

  std::vector<double> precision(ranked.size()), recall(ranked.size());
  long cum_tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    cum_tp += tp[i];
    precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(cum_tp) / static_cast<double>(total_gt);
  }
  // Monotone envelope from the right, then integrate over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

Prf precision_recall_f1(const GtFrames& gt, const DetFrames& dets,
                        double iou_thresh, double conf_thresh) {
  DetFrames kept;
  for (const auto& [frame, list] : dets) {
    std::vector<ScoredBox> keep;
    for (const ScoredBox& sb : list) {
      if (sb.confidence > conf_thresh) keep.push_back(sb);
    }
    if (!keep.empty()) kept[frame] = std::move(keep);
  }

  long total_gt = 0;
  for (const auto& [frame, boxes] : gt) total_gt += static_cast<long>(boxes.size());

  const std::vector<RankedDet> ranked = rank_detections(kept);
  const std::vector<char> tp = match_ranked(ranked, gt, iou_thresh);

  Prf out;
  for (char f : tp) f ? ++out.tp : ++out.fp;
  out.fn = total_gt - out.tp;
  const long det_count = static_cast<long>(ranked.size());
  out.precision = det_count == 0 ? 0.0 : static_cast<double>(out.tp) / det_count;
  out.recall = total_gt == 0 ? 0.0 : static_cast<double>(out.tp) / total_gt;
  const double pr = out.precision + out.recall;
  out.f1 = pr == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / pr;
  return out;
}

MotaResult mota(const IdFrames& gt, const IdFrames& hyp, double iou_thresh) {
  check_unique_ids(gt, "mota: gt");
  check_unique_ids(hyp, "mota: hyp");

  MotaResult res;
  std::map<TrackId, TrackId> carried;     // gt -> hyp active correspondence
  std::map<TrackId, TrackId> last_known;  // most recent hypothesis per gt id

  std::set<int> frames;
  for (const auto& [f, boxes] : gt) frames.insert(f);
  for (const auto& [f, boxes] : hyp) frames.insert(f);

  static const std::vector<IdBox> kNone;
  for (int f : frames) {
    const auto git = gt.find(f);
    const auto hit = hyp.find(f);
    const std::vector<IdBox>& gts = git == gt.end() ? kNone : git->second;
    const std::vector<IdBox>& hyps = hit == hyp.end() ? kNone : hit->second;
    res.gt_total += static_cast<long>(gts.size());

    std::map<TrackId, std::size_t> gt_pos, hyp_pos;
    for (std::size_t i = 0; i < gts.size(); ++i) gt_pos[gts[i].id] = i;
    for (std::size_t j = 0; j < hyps.size(); ++j) hyp_pos[hyps[j].id] = j;

    // Persisting correspondences survive while both parties clear the gate.
    std::map<TrackId, TrackId> matches;
    std::set<std::size_t> gt_free, hyp_free;
    for (std::size_t i = 0; i < gts.size(); ++i) gt_free.insert(i);
    for (std::size_t j = 0; j < hyps.size(); ++j) hyp_free.insert(j);
    for (const auto& [gid, hid] : carried) {
      const auto gp = gt_pos.find(gid);
      const auto hp = hyp_pos.find(hid);
      if (gp == gt_pos.end() || hp == hyp_pos.end()) continue;
      if (iou(gts[gp->second].bbox, hyps[hp->second].bbox) >= iou_thresh) {
        matches[gid] = hid;
        gt_free.erase(gp->second);
        hyp_free.erase(hp->second);
      }
    }

    // The rest is a fresh gated assignment on 1 - IOU.
    const std::vector<std::size_t> rows(gt_free.begin(), gt_free.end());
    const std::vector<std::size_t> cols(hyp_free.begin(), hyp_free.end());
    if (!rows.empty() && !cols.empty()) {
      CostMatrix costs(rows.size(), cols.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          const double ov = iou(gts[rows[r]].bbox, hyps[cols[c]].bbox);
          if (ov >= iou_thresh) {
            costs.set(r, c, 1.0 - ov);
          } else {
            costs.forbid(r, c);
          }
        }
      }
      for (const auto& [r, c] : solve_assignment(costs).pairs) {
        matches[gts[rows[r]].id] = hyps[cols[c]].id;
      }
    }

    res.fn += static_cast<long>(gts.size() - matches.size());
    res.fp += static_cast<long>(hyps.size() - matches.size());
    for (const auto& [gid, hid] : matches) {
      const auto prev = last_known.find(gid);
      if (prev != last_known.end() && prev->second != hid) ++res.idsw;
      last_known[gid] = hid;
    }
    carried = matches;
  }

  res.mota = res.gt_total == 0
                 ? std::numeric_limits<double>::quiet_NaN()
                 : 1.0 - static_cast<double>(res.fn + res.fp + res.idsw) /
                             static_cast<double>(res.gt_total);
  return res;
}

Idf1Result idf1(const IdFrames& gt, const IdFrames& hyp, double iou_thresh) {
  check_unique_ids(gt, "idf1: gt");
  check_unique_ids(hyp, "idf1: hyp");

  std::map<TrackId, long> gt_len, hyp_len;
  // overlap[(g, h)] = frames where g and h coexist and clear the gate
  std::map<std::pair<TrackId, TrackId>, long> overlap;

  std::set<int> frames;
  for (const auto& [f, boxes] : gt) frames.insert(f);
  for (const auto& [f, boxes] : hyp) frames.insert(f);
  for (int f : frames) {
    const auto git = gt.find(f);
    const auto hit = hyp.find(f);
    if (git != gt.end()) {
      for (const IdBox& g : git->second) ++gt_len[g.id];
    }
    if (hit != hyp.end()) {
      for (const IdBox& h : hit->second) ++hyp_len[h.id];
    }
    if (git == gt.end() || hit == hyp.end()) continue;
    for (const IdBox& g : git->second) {
      for (const IdBox& h : hit->second) {
        if (iou(g.bbox, h.bbox) >= iou_thresh) ++overlap[{g.id, h.id}];
      }
    }
  }

  long total_gt = 0, total_hyp = 0;
  for (const auto& [id, n] : gt_len) total_gt += n;
  for (const auto& [id, n] : hyp_len) total_hyp += n;

  Idf1Result res;
  if (total_gt == 0) {
    res.idf1 = std::numeric_limits<double>::quiet_NaN();
    res.idfp = total_hyp;
    return res;
  }

  std::vector<TrackId> gids, hids;
  for (const auto& [id, n] : gt_len) gids.push_back(id);
  for (const auto& [id, n] : hyp_len) hids.push_back(id);
  const std::size_t ng = gids.size(), nh = hids.size();

  // Square bipartite problem with per-identity dummies: pairing costs the
  // frames each side spends unmatched, staying alone costs the identity's full
  // length. Minimizing total cost maximizes the matched frame count.
  const std::size_t n = ng + nh;
  CostMatrix costs(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i < ng && j < nh) {
        const auto ov = overlap.find({gids[i], hids[j]});
        const long m = ov == overlap.end() ? 0 : ov->second;
        costs.set(i, j, static_cast<double>(gt_len[gids[i]] + hyp_len[hids[j]] - 2 * m));
      } else if (i < ng) {
        if (j - nh == i) {
          costs.set(i, j, static_cast<double>(gt_len[gids[i]]));
        } else {
          costs.forbid(i, j);
        }
      } else if (j < nh) {
        if (i - ng == j) {
          costs.set(i, j, static_cast<double>(hyp_len[hids[j]]));
        } else {
          costs.forbid(i, j);
        }
      } else {
        costs.set(i, j, 0.0);
      }
    }
  }

  long idtp = 0;
  for (const auto& [i, j] : solve_assignment(costs).pairs) {
    if (i < ng && j < nh) {
      const auto ov = overlap.find({gids[i], hids[j]});
      if (ov != overlap.end()) idtp += ov->second;
    }
  }
  res.idtp = idtp;
  res.idfp = total_hyp - idtp;
  res.idfn = total_gt - idtp;
  res.idf1 = 2.0 * idtp / static_cast<double>(2 * idtp + res.idfp + res.idfn);
  return res;
}

std::string MetricsReport::to_text() const {
  std::string out;
  if (ap) out += "AP@IOU:      " + fmt("%.4f", *ap) + "\n";
  if (prf) {
    out += "precision:   " + fmt("%.4f", prf->precision) + "\n";
    out += "recall:      " + fmt("%.4f", prf->recall) + "\n";
    out += "f1:          " + fmt("%.4f", prf->f1) + "\n";
  }
  if (clear_mot) {
    out += "MOTA:        " + fmt("%.1f", clear_mot->mota * 100.0) + "\n";
    out += "FP:          " + std::to_string(clear_mot->fp) + "\n";
    out += "FN:          " + std::to_string(clear_mot->fn) + "\n";
    out += "IDSW:        " + std::to_string(clear_mot->idsw) + "\n";
  }
  if (identity) {
    out += "IDF1:        " + fmt("%.1f", identity->idf1 * 100.0) + "\n";
  }
  return out;
}

std::string MetricsReport::csv_header() {
  return "name,ap,precision,recall,f1,mota,fp,fn,idsw,idf1";
}

std::string MetricsReport::to_csv_row(const std::string& name) const {
  auto num = [](std::optional<double> v) {
    return v ? fmt("%.6f", *v) : std::string();
  };
  std::string row = name;
  row += "," + num(ap);
  row += "," + (prf ? fmt("%.6f", prf->precision) : std::string());
  row += "," + (prf ? fmt("%.6f", prf->recall) : std::string());
  row += "," + (prf ? fmt("%.6f", prf->f1) : std::string());
  row += "," + (clear_mot ? fmt("%.6f", clear_mot->mota) : std::string());
  row += "," + (clear_mot ? std::to_string(clear_mot->fp) : std::string());
  row += "," + (clear_mot ? std::to_string(clear_mot->fn) : std::string());
  row += "," + (clear_mot ? std::to_string(clear_mot->idsw) : std::string());
  row += "," + (identity ? fmt("%.6f", identity->idf1) : std::string());
  return row;
}

IdFrames id_frames_from_tracks(const std::vector<Track>& tracks) {
  IdFrames out;
  for (const Track& t : tracks) {
    for (const TrackEntry& e : t.entries) {
      out[e.frame].push_back(IdBox{t.id, e.bbox});
    }
  }
  return out;
}

GtFrames boxes_only(const IdFrames& frames) {
  GtFrames out;
  for (const auto& [f, boxes] : frames) {
    for (const IdBox& b : boxes) out[f].push_back(b.bbox);
  }
  return out;
}

DetFrames scored_frames(const std::vector<FrameDetections>& frames) {
  DetFrames out;
  for (const FrameDetections& fd : frames) {
    for (const Detection& d : fd.items()) {
      out[fd.frame()].push_back(ScoredBox{d.bbox(), d.confidence()});
    }
  }
  return out;
}

}  // namespace soctrack
