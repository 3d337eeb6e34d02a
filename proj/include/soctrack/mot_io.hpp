#pragma once

#include <string>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/metrics.hpp"
#include "soctrack/tracker.hpp"

namespace soctrack {

// Rows are "frame,id,left,top,width,height,conf,...". Detection files carry
// id -1; extra columns are ignored. Frames are 1-based in the files and kept
// that way in memory.

// Groups rows by frame (ascending). Within a frame, detections keep file
// order and get EmbeddingKey{frame, position-in-frame}.
std::vector<FrameDetections> read_mot_detections(const std::string& path);

// Track file with real ids; duplicate (frame, id) rows are rejected.
IdFrames read_mot_tracks(const std::string& path);

void write_mot_detections(const std::string& path,
                          const std::vector<FrameDetections>& frames);

// One row per entry, frames ascending, ids ascending within a frame.
void write_mot_tracks(const std::string& path, const std::vector<Track>& tracks);

}  // namespace soctrack
