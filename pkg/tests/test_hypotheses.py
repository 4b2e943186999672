"""Tests for hypothesis-to-layer assignment and pair scoring."""

import json
from pathlib import Path

import numpy as np
import pytest

from lvpbench.benchmark import BenchmarkManifest, OrdinalLabel, Sample
from lvpbench.depthio import InMemoryStore, Ordering, Polarity
from lvpbench.errors import EmptyCalibration, MissingPrediction
from lvpbench.hypotheses import (
    HypothesisAssignment,
    Source,
    assign_by_alpha,
    calibration_split,
    combine,
    fixed_assignment,
)
from lvpbench.metrics import report_to_dict

L1, L2 = OrdinalLabel.P1_NEAR, OrdinalLabel.P2_NEAR


def make_manifest(labels) -> BenchmarkManifest:
    samples = [
        Sample(f"s{i:05d}", "img.png", "mask.png", (0, 0), (1, 0), l1, l2)
        for i, (l1, l2) in enumerate(labels)
    ]
    return BenchmarkManifest(samples, "1", Path("."))


def field_for(ordering: Ordering) -> np.ndarray:
    if ordering is Ordering.P1_NEAR:
        return np.array([[1.0, 0.0]], np.float32)
    if ordering is Ordering.P2_NEAR:
        return np.array([[0.0, 1.0]], np.float32)
    return np.array([[0.5, 0.5]], np.float32)


def store_from_labels(manifest, pick) -> InMemoryStore:
    """Store predicting pick(sample) for every sample."""
    store = InMemoryStore(Polarity.LARGER_IS_CLOSER)
    for sample in manifest.samples:
        store.put(sample.id, field_for(pick(sample)))
    return store


def label_ordering(label: OrdinalLabel) -> Ordering:
    return Ordering.P1_NEAR if label is OrdinalLabel.P1_NEAR else Ordering.P2_NEAR


def test_negative_alpha_keeps_rgb_on_layer1():
    manifest = make_manifest([(L1, L2), (L2, L1), (L1, L2)])
    rgb = store_from_labels(manifest, lambda s: label_ordering(s.layer1))  # alpha -100
    lvp = store_from_labels(manifest, lambda s: label_ordering(s.layer2))
    assignment = assign_by_alpha(manifest, rgb, lvp)
    assert assignment.layer1_source is Source.RGB
    assert assignment.layer2_source is Source.LVP
    assert assignment.alpha_rgb == -100.0
    assert assignment.alpha_lvp == 100.0
    assert assignment.method == "calibrated_alpha"
    assert assignment.calib_ids == sorted(manifest.ids)
    assert not assignment.degenerate


def test_positive_alpha_moves_rgb_to_layer2():
    manifest = make_manifest([(L1, L2), (L2, L1)])
    rgb = store_from_labels(manifest, lambda s: label_ordering(s.layer2))  # alpha +100
    lvp = store_from_labels(manifest, lambda s: label_ordering(s.layer1))
    assignment = assign_by_alpha(manifest, rgb, lvp)
    assert assignment.layer1_source is Source.LVP
    assert assignment.layer2_source is Source.RGB


def test_zero_rgb_alpha_tiebreaks_on_lvp():
    # reverse-only pairs; RGB splits evenly so alpha_rgb = 0
    manifest = make_manifest([(L1, L2), (L1, L2), (L2, L1), (L2, L1)])
    orderings = [Ordering.P1_NEAR, Ordering.P2_NEAR, Ordering.P2_NEAR, Ordering.P1_NEAR]
    rgb = InMemoryStore(Polarity.LARGER_IS_CLOSER)
    for sample, o in zip(manifest.samples, orderings):
        rgb.put(sample.id, field_for(o))
    lvp_l1 = store_from_labels(manifest, lambda s: label_ordering(s.layer1))  # alpha -100
    a = assign_by_alpha(manifest, rgb, lvp_l1)
    assert a.alpha_rgb == 0.0
    assert a.layer1_source is Source.LVP  # LVP claims layer 1
    lvp_l2 = store_from_labels(manifest, lambda s: label_ordering(s.layer2))  # alpha +100
    b = assign_by_alpha(manifest, rgb, lvp_l2)
    assert b.layer1_source is Source.RGB


def test_both_alphas_zero_is_degenerate_rgb_first():
    manifest = make_manifest([(L1, L2), (L1, L2), (L2, L1), (L2, L1)])
    orderings = [Ordering.P1_NEAR, Ordering.P2_NEAR, Ordering.P2_NEAR, Ordering.P1_NEAR]
    store = InMemoryStore(Polarity.LARGER_IS_CLOSER)
    for sample, o in zip(manifest.samples, orderings):
        store.put(sample.id, field_for(o))
    assignment = assign_by_alpha(manifest, store, store)
    assert assignment.degenerate
    assert assignment.layer1_source is Source.RGB
    assert assignment.to_dict()["degenerate"] is True


def test_empty_calibration_rejected():
    manifest = make_manifest([])
    store = InMemoryStore(Polarity.LARGER_IS_CLOSER)
    with pytest.raises(EmptyCalibration):
        assign_by_alpha(manifest, store, store)


def test_missing_predictions_propagate():
    manifest = make_manifest([(L1, L2)])
    empty = InMemoryStore(Polarity.LARGER_IS_CLOSER)
    full = store_from_labels(manifest, lambda s: label_ordering(s.layer1))
    with pytest.raises(MissingPrediction):
        assign_by_alpha(manifest, empty, full)


def test_fixed_assignment():
    a = fixed_assignment(rgb_first=True)
    assert a.layer1_source is Source.RGB and a.method == "fixed"
    b = fixed_assignment(rgb_first=False)
    assert b.layer1_source is Source.LVP
    assert "calib_ids" not in b.to_dict()
    with pytest.raises(ValueError):
        HypothesisAssignment(Source.RGB, Source.RGB, "fixed")


def test_combine_perfect_pair_on_same_subset():
    manifest = make_manifest([(L1, L1), (L2, L2)])
    store = store_from_labels(manifest, lambda s: label_ordering(s.layer1))
    result = combine(manifest, fixed_assignment(True), store, store)
    assert result.reports["same"].ml_sra == 100.0
    assert result.reports["overall"].n == 2
    assert len(result.outcomes) == 2


def test_combine_identical_stores_on_reverse_pigeonhole():
    manifest = make_manifest([(L1, L2)] * 5 + [(L2, L1)] * 5)
    rng = np.random.default_rng(11)
    store = store_from_labels(
        manifest,
        lambda s: Ordering.P1_NEAR if rng.random() < 0.5 else Ordering.P2_NEAR,
    )
    result = combine(manifest, fixed_assignment(True), store, store)
    assert result.reports["reverse"].ml_sra == 0.0
    assert result.reports["overall"].ties == 0


def test_assignment_flip_duality_on_reverse():
    manifest = make_manifest([(L1, L2)] * 8 + [(L2, L1)] * 8)
    rng = np.random.default_rng(13)
    pick = lambda s: Ordering.P1_NEAR if rng.random() < 0.5 else Ordering.P2_NEAR
    rgb = store_from_labels(manifest, pick)
    lvp = store_from_labels(manifest, pick)
    fwd = combine(manifest, fixed_assignment(True), rgb, lvp)
    rev = combine(manifest, fixed_assignment(False), rgb, lvp)
    fwd_by_id = {o.sample_id: o for o in fwd.outcomes}
    rev_by_id = {o.sample_id: o for o in rev.outcomes}
    for sample in manifest.reverse_samples:
        f = fwd_by_id[sample.id]
        r = rev_by_id[sample.id]
        # reverse labels, strict orderings: both-correct flips to both-wrong
        if f.layer1_correct and f.layer2_correct:
            assert not r.layer1_correct and not r.layer2_correct
        if not f.layer1_correct and not f.layer2_correct:
            assert r.layer1_correct and r.layer2_correct


def test_combine_respects_assignment_direction():
    manifest = make_manifest([(L1, L2)] * 4)
    rgb = store_from_labels(manifest, lambda s: label_ordering(s.layer1))
    lvp = store_from_labels(manifest, lambda s: label_ordering(s.layer2))
    good = combine(manifest, fixed_assignment(True), rgb, lvp)
    assert good.reports["overall"].ml_sra == 100.0
    flipped = combine(manifest, fixed_assignment(False), rgb, lvp)
    assert flipped.reports["overall"].ml_sra == 0.0


def test_combine_determinism():
    manifest = make_manifest([(L1, L2), (L2, L1), (L1, L1)])
    rng = np.random.default_rng(17)
    pick = lambda s: Ordering.P1_NEAR if rng.random() < 0.5 else Ordering.P2_NEAR
    rgb = store_from_labels(manifest, pick)
    lvp = store_from_labels(manifest, pick)
    a = combine(manifest, fixed_assignment(True), rgb, lvp)
    b = combine(manifest, fixed_assignment(True), rgb, lvp)
    dump = lambda r: json.dumps(
        {k: report_to_dict(v) for k, v in r.reports.items()}, sort_keys=True
    )
    assert dump(a) == dump(b)


def test_calibration_split_is_deterministic():
    manifest = make_manifest([(L1, L2)] * 100)
    calib1, rest1 = calibration_split(manifest, 0.3)
    calib2, rest2 = calibration_split(manifest, 0.3)
    assert [s.id for s in calib1.samples] == [s.id for s in calib2.samples]
    assert [s.id for s in rest1.samples] == [s.id for s in rest2.samples]
    assert len(calib1.samples) + len(rest1.samples) == 100
    assert 10 < len(calib1.samples) < 50  # hash split lands near the fraction
    full_calib, full_eval = calibration_split(manifest, 1.0)
    assert full_calib is manifest and full_eval is manifest
    with pytest.raises(ValueError):
        calibration_split(manifest, 0.0)
