import math

import numpy as np

import soctrack as st


def small_spec():
    spec = st.ScenarioSpec()
    spec.width = 320
    spec.height = 180
    spec.crowd_band = 40
    spec.frame_count = 20
    spec.player_count = 8
    spec.seed = 3
    return spec


def id_frames(tracks):
    frames = {}
    for tid, entries in tracks:
        for frame, box in entries:
            frames.setdefault(frame, []).append((tid, box))
    return frames


def test_geometry():
    assert math.isclose(st.iou((0, 0, 10, 10), (5, 0, 15, 10)), 1 / 3)
    assert st.box_center((0, 0, 10, 20)) == (5.0, 10.0)


def test_solve_assignment():
    pairs, total = st.solve_assignment([[1.0, 2.0], [2.0, 4.0]])
    assert total == 4.0
    assert sorted(pairs) == [(0, 1), (1, 0)]

    pairs, total = st.solve_assignment([[None, 5.0], [None, 1.0]])
    assert pairs == [(1, 1)]
    assert total == 1.0


def test_soft_nms_decays_overlaps():
    dets = [
        (0.0, 0.0, 10.0, 10.0, 0.9),
        (1.0, 0.0, 11.0, 10.0, 0.8),
        (50.0, 50.0, 60.0, 60.0, 0.7),
    ]
    out = st.soft_nms(dets, iou_gate=0.3)
    assert len(out) == 3
    assert out[0] == dets[0]
    assert out[1] == dets[2]
    assert out[2][:4] == dets[1][:4]
    assert out[2][4] < 0.2


def test_triplet_loss_hand_case():
    groups = [[[0.0], [1.0]], [[2.0], [3.0]]]
    assert st.triplet_loss(groups, margin=2.0) == 6.0


def test_detection_metrics():
    gt = {1: [(0.0, 0.0, 10.0, 10.0), (50.0, 0.0, 60.0, 10.0)]}
    dets = {1: [(0.0, 0.0, 10.0, 10.0, 0.9), (100.0, 0.0, 110.0, 10.0, 0.8)]}
    assert math.isclose(st.average_precision(gt, dets), 0.5, abs_tol=1e-9)
    prf = st.precision_recall_f1(gt, dets)
    assert (prf["tp"], prf["fp"], prf["fn"]) == (1, 1, 1)


def test_tracker_on_clean_scenario():
    spec = small_spec()
    gt = st.generate_scenario(spec)
    dets = st.corrupt_detections(spec, gt, st.NoiseSpec.none(), spec.seed + 1)

    tracker = st.Tracker(st.TrackerConfig(), spec.width)
    for frame in sorted(dets):
        joined = tracker.step(frame, dets[frame])
        assert len(joined) == len(dets[frame])
    tracks = tracker.finalize()

    assert len(tracks) == spec.player_count
    assert all(len(entries) == spec.frame_count for _, entries in tracks)

    truth = id_frames(gt)
    hypo = id_frames(tracks)
    assert st.mota(truth, hypo)["mota"] == 1.0
    assert st.idf1(truth, hypo)["idf1"] == 1.0


def test_field_mask_on_render():
    spec = small_spec()
    gt = st.generate_scenario(spec)
    boxes = [(tid, box) for tid, entries in gt for frame, box in entries if frame == 1]
    img = st.render_frame(spec, boxes)
    assert img.shape == (spec.height, spec.width, 3)

    mask = st.compute_field_mask(img)
    want = np.arange(spec.height)[:, None] >= spec.crowd_band
    accuracy = (mask.astype(bool) == want).mean()
    assert accuracy >= 0.99

    assert st.field_overlap(boxes[0][1], mask) > 0.9
    assert st.field_overlap((20.0, 4.0, 44.0, 36.0), mask) < 0.1


def test_embed_histogram_unit_norm():
    img = np.zeros((20, 20, 3), dtype=np.uint8)
    img[:, :] = (200, 30, 40)
    emb = st.embed_histogram(img, (2.0, 2.0, 12.0, 12.0))
    assert len(emb) == 8 * 8 * 4
    assert math.isclose(sum(v * v for v in emb), 1.0, rel_tol=1e-12)
