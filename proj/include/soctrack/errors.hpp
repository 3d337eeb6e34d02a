#pragma once

#include <stdexcept>
#include <string>

namespace soctrack {

// Raised when a mask operation needs at least one set pixel.
struct EmptyMaskError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Embedding dimensions disagree.
struct DimensionMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lookup into an embedding store for a key that was never loaded.
struct MissingKeyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Re-identification consulted a detection or track entry without an embedding.
struct MissingEmbeddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tracker fed a frame index not strictly greater than the last one.
struct OutOfOrderFrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Batch sampling asked for more identities than the track pool provides.
struct InsufficientTracksError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A box covers no pixels of the image it is applied to.
struct DegenerateBoxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scenario cannot be realized (players do not fit the field, etc).
struct InfeasibleSpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (detections, tracks, embeddings, config).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace soctrack
