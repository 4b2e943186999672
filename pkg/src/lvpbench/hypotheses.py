"""Ordering the two depth hypotheses onto the annotation layers.

An RGB-input prediction and a Laplacian-prompt prediction form a
complementary pair; before ML-SRA can be scored, one must be designated
the layer-1 (first visible surface) hypothesis and the other layer-2.
The assignment is either fixed by the caller or calibrated from the
sign of the RGB store's layer preference: a negative alpha means the
RGB pass already favors layer 1, so it keeps layer 1 and the prompt
pass covers layer 2.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field as dataclass_field

from .errors import EmptyCalibration
from .metrics import (
    evaluate_two_stores,
    layer_preference,
    outcomes_paired,
    predicted_orderings,
    sra,
)


class Source(enum.Enum):
    RGB = "rgb"
    LVP = "lvp"


@dataclass
class HypothesisAssignment:
    """Which input modality serves which annotation layer, with provenance."""

    layer1_source: Source
    layer2_source: Source
    method: str  # "fixed" or "calibrated_alpha"
    calib_ids: list | None = None
    alpha_rgb: float | None = None
    alpha_lvp: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        if self.layer1_source is self.layer2_source:
            raise ValueError("layer1_source and layer2_source must differ")

    def to_dict(self) -> dict:
        out = {
            "layer1_source": self.layer1_source.value,
            "layer2_source": self.layer2_source.value,
            "method": self.method,
        }
        if self.method == "calibrated_alpha":
            out["calib_ids"] = list(self.calib_ids or [])
            out["alpha_rgb"] = self.alpha_rgb
            out["alpha_lvp"] = self.alpha_lvp
            out["degenerate"] = self.degenerate
        return out


def fixed_assignment(rgb_first: bool = True) -> HypothesisAssignment:
    if rgb_first:
        return HypothesisAssignment(Source.RGB, Source.LVP, "fixed")
    return HypothesisAssignment(Source.LVP, Source.RGB, "fixed")


def assign_by_alpha(
    manifest_calib, rgb_store, lvp_store, window: int = 1
) -> HypothesisAssignment:
    """Pick the layer order from the sign of the calibrated preference.

    alpha(RGB) < 0 puts RGB on layer 1; alpha(RGB) > 0 puts it on
    layer 2. A zero RGB preference falls back to the LVP store's alpha
    with the opposite rule; if both are zero the pairing is arbitrary,
    so RGB-first is used and the assignment is flagged degenerate.
    """
    if not manifest_calib.samples:
        raise EmptyCalibration("calibration subset is empty")
    rgb_ord = predicted_orderings(manifest_calib, rgb_store, window)
    lvp_ord = predicted_orderings(manifest_calib, lvp_store, window)
    alpha_rgb = layer_preference(
        sra(manifest_calib, rgb_ord, 1), sra(manifest_calib, rgb_ord, 2)
    )
    alpha_lvp = layer_preference(
        sra(manifest_calib, lvp_ord, 1), sra(manifest_calib, lvp_ord, 2)
    )
    degenerate = False
    if alpha_rgb < 0:
        rgb_first = True
    elif alpha_rgb > 0:
        rgb_first = False
    elif alpha_lvp < 0:
        rgb_first = False  # the prompt pass claims layer 1
    elif alpha_lvp > 0:
        rgb_first = True
    else:
        rgb_first = True
        degenerate = True
    layer1 = Source.RGB if rgb_first else Source.LVP
    layer2 = Source.LVP if rgb_first else Source.RGB
    return HypothesisAssignment(
        layer1,
        layer2,
        "calibrated_alpha",
        calib_ids=sorted(manifest_calib.ids),
        alpha_rgb=alpha_rgb,
        alpha_lvp=alpha_lvp,
        degenerate=degenerate,
    )


@dataclass
class CombineResult:
    """Ordered hypothesis pair scoring: per-sample outcomes + subset reports."""

    assignment: HypothesisAssignment
    outcomes: list = dataclass_field(default_factory=list)
    reports: dict = dataclass_field(default_factory=dict)


def combine(manifest, assignment, rgb_store, lvp_store, window: int = 1) -> CombineResult:
    """Score the pair under the given assignment; delegates to the metrics."""
    store1 = rgb_store if assignment.layer1_source is Source.RGB else lvp_store
    store2 = lvp_store if assignment.layer2_source is Source.LVP else rgb_store
    outcomes = outcomes_paired(manifest, store1, store2, window)
    reports = evaluate_two_stores(manifest, store1, store2, window)
    return CombineResult(assignment, outcomes, reports)


def calibration_split(manifest, fraction: float):
    """Deterministic held-out split: (calibration, evaluation) manifests.

    Membership hashes each sample id, so the split is stable across runs
    and machines and independent of manifest order. fraction = 1.0
    calibrates on the full manifest and evaluates on the full manifest
    (benchmark analysis mode).
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return manifest, manifest
    calib, rest = [], []
    for sample in manifest.samples:
        digest = hashlib.sha256(sample.id.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:8], "big") / 2**64
        (calib if bucket < fraction else rest).append(sample)
    make = type(manifest)
    return (
        make(calib, manifest.schema_version, manifest.root),
        make(rest, manifest.schema_version, manifest.root),
    )
