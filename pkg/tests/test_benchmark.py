"""Tests for manifest loading, validation, and region statistics."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lvpbench.benchmark import (
    BenchmarkManifest,
    OrdinalLabel,
    Sample,
    SingleLayerManifest,
    Subset,
    ambiguity_ratio,
    heatmap_for_manifest,
    histogram,
    load_manifest,
    serialize_manifest,
    spatial_heatmap,
)
from lvpbench.errors import (
    BoundsError,
    DimMismatch,
    DuplicateId,
    MaskMismatch,
    MissingData,
    NonBinaryMask,
    SchemaError,
)
from lvpbench.raster import write_png


def make_dataset(root, entries, size=(8, 8), mask_value=255):
    """Write one shared image + full mask and a manifest for `entries`."""
    h, w = size
    write_png(root / "img.png", np.full((h, w, 3), 90, np.uint8))
    write_png(root / "mask.png", np.full((h, w), mask_value, np.uint8))
    samples = []
    for e in entries:
        rec = {"id": e["id"], "image": "img.png", "mask": "mask.png"}
        rec.update({k: v for k, v in e.items() if k != "id"})
        samples.append(rec)
    doc = {"schema_version": "1", "samples": samples}
    path = root / "manifest.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def test_minimal_manifest(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [1, 2], "p2": [3, 4], "layer1": "p1_near", "layer2": "p2_near"}],
    )
    manifest = load_manifest(path)
    assert isinstance(manifest, BenchmarkManifest)
    assert manifest.ids == ["a"]
    sample = manifest.samples[0]
    assert sample.p1 == (1, 2) and sample.p2 == (3, 4)
    assert sample.subset is Subset.REVERSE
    assert manifest.reverse_samples == [sample]
    assert manifest.same_samples == []
    assert manifest.subset(Subset.OVERALL) == [sample]


def test_same_subset_tagging(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [0, 0], "p2": [1, 1], "layer1": "p2_near", "layer2": "p2_near"}],
    )
    manifest = load_manifest(path)
    assert manifest.samples[0].subset is Subset.SAME


def test_subset_partition_counts(tmp_path):
    # headline composition: 3,161 pairs, 1,783 same + 1,378 reverse
    entries = []
    for i in range(1783):
        entries.append(
            {"id": f"s{i}", "p1": [0, 0], "p2": [1, 0], "layer1": "p1_near", "layer2": "p1_near"}
        )
    for i in range(1378):
        entries.append(
            {"id": f"r{i}", "p1": [0, 0], "p2": [1, 0], "layer1": "p1_near", "layer2": "p2_near"}
        )
    manifest = load_manifest(make_dataset(tmp_path, entries))
    assert len(manifest.samples) == 3161
    assert len(manifest.same_samples) == 1783
    assert len(manifest.reverse_samples) == 1378
    assert len(manifest.same_samples) + len(manifest.reverse_samples) == len(manifest.samples)


def test_single_layer_manifest(tmp_path):
    write_png(tmp_path / "img.png", np.zeros((4, 4, 3), np.uint8))
    doc = {
        "schema_version": "1",
        "samples": [{"id": "a", "image": "img.png", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near"}],
    }
    path = tmp_path / "single.json"
    path.write_text(json.dumps(doc))
    manifest = load_manifest(path)
    assert isinstance(manifest, SingleLayerManifest)
    assert manifest.samples[0].mask_path is None
    with pytest.raises(SchemaError):
        manifest.samples[0].subset


def test_mixed_layers_rejected(tmp_path):
    path = make_dataset(
        tmp_path,
        [
            {"id": "a", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near", "layer2": "p1_near"},
            {"id": "b", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near"},
        ],
    )
    with pytest.raises(SchemaError):
        load_manifest(path)


def test_identical_points_rejected(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [2, 2], "p2": [2, 2], "layer1": "p1_near", "layer2": "p2_near"}],
    )
    with pytest.raises(BoundsError):
        load_manifest(path)


def test_duplicate_ids_rejected(tmp_path):
    entry = {"id": "a", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near", "layer2": "p2_near"}
    path = make_dataset(tmp_path, [entry, dict(entry)])
    with pytest.raises(DuplicateId):
        load_manifest(path)


def test_out_of_bounds_point_rejected(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [0, 0], "p2": [8, 0], "layer1": "p1_near", "layer2": "p2_near"}],
        size=(8, 8),
    )
    with pytest.raises(BoundsError):
        load_manifest(path)
    assert isinstance(load_manifest(path, validate_rasters=False), BenchmarkManifest)


def test_negative_coordinates_rejected(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [-1, 0], "p2": [1, 1], "layer1": "p1_near", "layer2": "p2_near"}],
    )
    with pytest.raises(BoundsError):
        load_manifest(path, validate_rasters=False)


def test_point_outside_mask_rejected(tmp_path):
    root = tmp_path
    write_png(root / "img.png", np.zeros((8, 8, 3), np.uint8))
    mask = np.zeros((8, 8), np.uint8)
    mask[0:2, 0:2] = 255
    write_png(root / "mask.png", mask)
    doc = {
        "schema_version": "1",
        "samples": [
            {
                "id": "a",
                "image": "img.png",
                "mask": "mask.png",
                "p1": [0, 0],
                "p2": [5, 5],
                "layer1": "p1_near",
                "layer2": "p2_near",
            }
        ],
    }
    path = root / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(MaskMismatch):
        load_manifest(path)


def test_nonbinary_mask_rejected(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near", "layer2": "p2_near"}],
        mask_value=128,
    )
    with pytest.raises(NonBinaryMask):
        load_manifest(path)


def test_mask_dim_mismatch_rejected(tmp_path):
    write_png(tmp_path / "img.png", np.zeros((8, 8, 3), np.uint8))
    write_png(tmp_path / "mask.png", np.full((4, 4), 255, np.uint8))
    doc = {
        "schema_version": "1",
        "samples": [
            {
                "id": "a",
                "image": "img.png",
                "mask": "mask.png",
                "p1": [0, 0],
                "p2": [1, 1],
                "layer1": "p1_near",
                "layer2": "p2_near",
            }
        ],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(DimMismatch):
        load_manifest(path)


def test_schema_violations(tmp_path):
    write_png(tmp_path / "img.png", np.zeros((4, 4, 3), np.uint8))
    cases = [
        {"schema_version": "2", "samples": []},
        {"samples": []},
        {"schema_version": "1"},
        {"schema_version": "1", "samples": [{"id": "a"}]},
        {
            "schema_version": "1",
            "samples": [
                {"id": "a", "image": "img.png", "p1": [0, 0], "p2": [1, 1], "layer1": "near"}
            ],
        },
        {
            "schema_version": "1",
            "samples": [
                {"id": "a", "image": "img.png", "p1": [0.5, 0], "p2": [1, 1], "layer1": "p1_near"}
            ],
        },
    ]
    for i, doc in enumerate(cases):
        path = tmp_path / f"bad{i}.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            load_manifest(path)
    missing = tmp_path / "nope.json"
    with pytest.raises(MissingData):
        load_manifest(missing)
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    with pytest.raises(SchemaError):
        load_manifest(garbled)


def test_two_layer_requires_mask(tmp_path):
    write_png(tmp_path / "img.png", np.zeros((4, 4, 3), np.uint8))
    doc = {
        "schema_version": "1",
        "samples": [
            {"id": "a", "image": "img.png", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near", "layer2": "p2_near"}
        ],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_manifest(path)


def test_serialize_round_trip_is_byte_stable(tmp_path):
    path = make_dataset(
        tmp_path,
        [
            {"id": "a", "p1": [1, 2], "p2": [3, 4], "layer1": "p1_near", "layer2": "p2_near"},
            {"id": "b", "p1": [0, 0], "p2": [1, 1], "layer1": "p2_near", "layer2": "p2_near"},
        ],
    )
    manifest = load_manifest(path)
    text = serialize_manifest(manifest)
    assert text == path.read_text()
    canon = tmp_path / "canon.json"
    canon.write_text(text)
    assert serialize_manifest(load_manifest(canon)) == text


def test_ambiguity_ratio():
    assert ambiguity_ratio(np.zeros((5, 5), np.uint8)) == 0.0
    assert ambiguity_ratio(np.full((5, 5), 255, np.uint8)) == 1.0
    mask = np.zeros((10, 10), np.uint8)
    mask[:5, :5] = 255
    assert ambiguity_ratio(mask) == 0.25
    with pytest.raises(NonBinaryMask):
        ambiguity_ratio(np.full((5, 5), 7, np.uint8))


def test_heatmap_uniform_mask():
    full = np.full((8, 8), 255, np.uint8)
    grid = spatial_heatmap([full], 4)
    assert grid.shape == (4, 4)
    assert np.all(grid == 1.0)


def test_heatmap_quadrant():
    mask = np.zeros((8, 8), np.uint8)
    mask[:4, :4] = 255
    grid = spatial_heatmap([mask], 2)
    assert grid.tolist() == [[1.0, 0.0], [0.0, 0.0]]


def test_heatmap_disjoint_halves_normalize_together():
    left = np.zeros((8, 8), np.uint8)
    left[:, :4] = 255
    right = np.zeros((8, 8), np.uint8)
    right[:, 4:] = 255
    grid = spatial_heatmap([left, right], 2)
    assert np.all(grid == 1.0)


def test_heatmap_all_zero_and_bounds():
    grid = spatial_heatmap([np.zeros((6, 6), np.uint8)], 3)
    assert np.all(grid == 0.0)
    rng = np.random.default_rng(5)
    masks = [(rng.random((9, 9)) < 0.5).astype(np.uint8) * 255 for _ in range(4)]
    grid = spatial_heatmap(masks, 3)
    assert grid.min() >= 0.0 and grid.max() <= 1.0
    coarse = spatial_heatmap([np.full((2, 2), 255, np.uint8)], 5)  # grid > image dims
    assert coarse.max() == 1.0 and coarse.min() == 0.0


def test_heatmap_for_manifest(tmp_path):
    path = make_dataset(
        tmp_path,
        [{"id": "a", "p1": [0, 0], "p2": [1, 1], "layer1": "p1_near", "layer2": "p2_near"}],
    )
    grid = heatmap_for_manifest(load_manifest(path), 2)
    assert np.all(grid == 1.0)


def test_histogram_examples():
    assert histogram([], 10) == [(i / 10, (i + 1) / 10, 0) for i in range(10)]
    assert [c for _, _, c in histogram([0.0, 1.0], 2)] == [1, 1]
    counts = [c for _, _, c in histogram([0.1, 0.15, 0.9], 10)]
    assert counts[1] == 2 and counts[9] == 1 and sum(counts) == 3
    with pytest.raises(BoundsError):
        histogram([1.5], 4)


@settings(max_examples=50, deadline=None)
@given(
    ratios=st.lists(st.floats(0, 1, allow_nan=False), max_size=40),
    bins=st.integers(1, 20),
)
def test_histogram_counts_sum(ratios, bins):
    rows = histogram(ratios, bins)
    assert len(rows) == bins
    assert sum(c for _, _, c in rows) == len(ratios)
    assert rows[0][0] == 0.0 and rows[-1][1] == 1.0


def test_sample_points_verified_inside_synthetic_masks(tmp_path):
    rng = np.random.default_rng(9)
    mask = np.zeros((12, 12), np.uint8)
    inside = [(3, 4), (7, 8), (5, 5), (9, 2)]
    for x, y in inside:
        mask[y, x] = 255
    write_png(tmp_path / "img.png", np.zeros((12, 12, 3), np.uint8))
    write_png(tmp_path / "mask.png", mask)
    samples = []
    for i in range(3):
        p1, p2 = rng.choice(len(inside), size=2, replace=False)
        samples.append(
            {
                "id": f"s{i}",
                "image": "img.png",
                "mask": "mask.png",
                "p1": list(inside[p1]),
                "p2": list(inside[p2]),
                "layer1": "p1_near",
                "layer2": "p2_near",
            }
        )
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"schema_version": "1", "samples": samples}))
    manifest = load_manifest(path)
    loaded_mask = mask > 0
    for s in manifest.samples:
        assert loaded_mask[s.p1[1], s.p1[0]] and loaded_mask[s.p2[1], s.p2[0]]
