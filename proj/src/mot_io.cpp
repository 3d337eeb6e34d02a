#include "soctrack/mot_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "soctrack/errors.hpp"

namespace soctrack {
namespace {

struct MotRow {
  int frame;
  long id;
  double x, y, w, h, conf;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

MotRow parse_row(const std::string& line, int line_no, const std::string& path) {
  auto fields = split_fields(line);
  if (fields.size() < 7) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": expected at least 7 comma-separated fields");
  }
  MotRow row{};
  try {
    row.frame = std::stoi(fields[0]);
    row.id = std::stol(fields[1]);
    row.x = std::stod(fields[2]);
    row.y = std::stod(fields[3]);
    row.w = std::stod(fields[4]);
    row.h = std::stod(fields[5]);
    row.conf = std::stod(fields[6]);
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": malformed number");
  }
  if (row.frame < 1) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": frame must be >= 1");
  }
  if (!(row.w > 0.0) || !(row.h > 0.0)) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": box width and height must be positive");
  }
  return row;
}

std::vector<MotRow> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<MotRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    rows.push_back(parse_row(line, line_no, path));
  }
  return rows;
}

}  // namespace

std::vector<FrameDetections> read_mot_detections(const std::string& path) {
  std::map<int, std::vector<MotRow>> by_frame;
  for (const MotRow& row : read_rows(path)) {
    if (row.conf < 0.0 || row.conf > 1.0) {
      throw ParseError(path + ": detection confidence must be in [0, 1]");
    }
    by_frame[row.frame].push_back(row);
  }
  std::vector<FrameDetections> out;
  out.reserve(by_frame.size());
  for (const auto& [frame, rows] : by_frame) {
    FrameDetections fd(frame);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const MotRow& r = rows[i];
      fd.add(Detection(frame, BBox(r.x, r.y, r.x + r.w, r.y + r.h), r.conf,
                       EmbeddingKey{frame, static_cast<int>(i)}));
    }
    out.push_back(std::move(fd));
  }
  return out;
}

IdFrames read_mot_tracks(const std::string& path) {
  IdFrames out;
  std::set<std::pair<int, long>> seen;
  for (const MotRow& row : read_rows(path)) {
    if (row.id < 0) {
      throw ParseError(path + ": track rows need a non-negative id");
    }
    if (!seen.insert({row.frame, row.id}).second) {
      throw ParseError(path + ": duplicate id " + std::to_string(row.id) +
                       " in frame " + std::to_string(row.frame));
    }
    out[row.frame].push_back(
        IdBox{row.id, BBox(row.x, row.y, row.x + row.w, row.y + row.h)});
  }
  for (auto& [frame, boxes] : out) {
    (void)frame;
    std::sort(boxes.begin(), boxes.end(),
              [](const IdBox& a, const IdBox& b) { return a.id < b.id; });
  }
  return out;
}

namespace {

void write_row(std::FILE* f, int frame, long id, const BBox& box, double conf) {
  std::fprintf(f, "%d,%ld,%.4f,%.4f,%.4f,%.4f,%.4f,-1,-1,-1\n", frame, id,
               box.x_min(), box.y_min(), box.width(), box.height(), conf);
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

void write_mot_detections(const std::string& path,
                          const std::vector<FrameDetections>& frames) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
  if (!f) throw ParseError("cannot open " + path + " for writing");
  std::vector<const FrameDetections*> order;
  order.reserve(frames.size());
  for (const auto& fd : frames) order.push_back(&fd);
  std::stable_sort(order.begin(), order.end(),
                   [](const FrameDetections* a, const FrameDetections* b) {
                     return a->frame() < b->frame();
                   });
  for (const FrameDetections* fd : order) {
    for (const Detection& d : fd->items()) {
      write_row(f.get(), fd->frame(), -1, d.bbox(), d.confidence());
    }
  }
}

void write_mot_tracks(const std::string& path, const std::vector<Track>& tracks) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
  if (!f) throw ParseError("cannot open " + path + " for writing");
  std::map<int, std::vector<std::pair<long, const BBox*>>> by_frame;
  for (const Track& t : tracks) {
    for (const TrackEntry& e : t.entries) {
      by_frame[e.frame].emplace_back(t.id, &e.bbox);
    }
  }
  for (auto& [frame, rows] : by_frame) {
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [id, box] : rows) write_row(f.get(), frame, id, *box, 1.0);
  }
}

}  // namespace soctrack
