"""Soccer-player tracking, self-labeling, and MOT evaluation toolkit."""

try:
    from . import _soctrack as _native
except ImportError:  # in-tree builds keep the module next to the package
    import _soctrack as _native

NoiseSpec = _native.NoiseSpec
ScenarioSpec = _native.ScenarioSpec
Tracker = _native.Tracker
TrackerConfig = _native.TrackerConfig
average_precision = _native.average_precision
box_center = _native.box_center
compute_field_mask = _native.compute_field_mask
corrupt_detections = _native.corrupt_detections
embed_histogram = _native.embed_histogram
field_overlap = _native.field_overlap
generate_scenario = _native.generate_scenario
idf1 = _native.idf1
iou = _native.iou
mota = _native.mota
precision_recall_f1 = _native.precision_recall_f1
render_frame = _native.render_frame
soft_nms = _native.soft_nms
solve_assignment = _native.solve_assignment
triplet_loss = _native.triplet_loss

__all__ = [
    "NoiseSpec",
    "ScenarioSpec",
    "Tracker",
    "TrackerConfig",
    "average_precision",
    "box_center",
    "compute_field_mask",
    "corrupt_detections",
    "embed_histogram",
    "field_overlap",
    "generate_scenario",
    "idf1",
    "iou",
    "mota",
    "precision_recall_f1",
    "render_frame",
    "soft_nms",
    "solve_assignment",
    "triplet_loss",
]
