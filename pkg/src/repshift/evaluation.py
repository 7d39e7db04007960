"""Segmentation mIoU and shift-vs-accuracy regression."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import IGNORE_LABEL, ReprShiftError, SegMask


@dataclass(eq=False)
class ConfusionMatrix:
    """counts[g, p] = number of pixels with ground truth g predicted as p (GT 255 skipped)."""

    num_classes: int
    counts: np.ndarray | None = None

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((self.num_classes, self.num_classes), dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (self.num_classes, self.num_classes):
            raise ReprShiftError(f"confusion matrix must be {self.num_classes}x{self.num_classes}")
        if (self.counts < 0).any():
            raise ReprShiftError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ReprShiftError("cannot merge confusion matrices with different class counts")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.num_classes == other.num_classes and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(gt: SegMask, pred: SegMask, num_classes: int) -> ConfusionMatrix:
    if gt.labels.shape != pred.labels.shape:
        raise ReprShiftError(f"dimension mismatch: gt {gt.labels.shape} vs pred {pred.labels.shape}")
    g = gt.labels.ravel().astype(np.int64)
    p = pred.labels.ravel().astype(np.int64)
    keep = g != IGNORE_LABEL
    g, p = g[keep], p[keep]
    if (g >= num_classes).any():
        raise ReprShiftError(f"ground-truth label out of range for {num_classes} classes")
    bad = p >= num_classes
    if bad.any():
        raise ReprShiftError(f"prediction label {int(p[bad][0])} out of range for {num_classes} classes")
    counts = np.bincount(g * num_classes + p, minlength=num_classes * num_classes)
    return ConfusionMatrix(num_classes, counts.reshape(num_classes, num_classes))


def accumulate(cm: ConfusionMatrix, gt: SegMask, pred: SegMask) -> ConfusionMatrix:
    return cm + confusion(gt, pred, cm.num_classes)


@dataclass
class MIoUResult:
    per_class: list  # float per class, None where undefined
    miou: float

    @property
    def evaluated_classes(self) -> list[int]:
        return [k for k, v in enumerate(self.per_class) if v is not None]

    def to_dict(self) -> dict:
        return {"per_class": self.per_class, "miou": self.miou, "evaluated_classes": self.evaluated_classes}


def miou(cm: ConfusionMatrix, absent_as_zero: bool = False) -> MIoUResult:
    """Per-class IoU and their mean.

    A class with an empty union (absent from both GT and prediction) is undefined
    and left out of the mean, unless ``absent_as_zero`` counts it as 0.
    """
    c = cm.counts
    inter = np.diag(c)
    union = c.sum(axis=0) + c.sum(axis=1) - inter
    per_class = []
    for k in range(cm.num_classes):
        if union[k] > 0:
            per_class.append(int(inter[k]) / int(union[k]))
        else:
            per_class.append(0.0 if absent_as_zero else None)
    defined = [v for v in per_class if v is not None]
    if not defined:
        raise ReprShiftError("no evaluated classes")
    return MIoUResult(per_class, math.fsum(defined) / len(defined))


@dataclass
class RegressionResult:
    slope: float
    intercept: float
    pearson_r: float
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "pearson_r": self.pearson_r,
                "n_points": self.n_points}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def regress(points) -> RegressionResult:
    """Ordinary least squares of miou on shift, plus the Pearson correlation."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ReprShiftError("expected a list of (shift, miou) pairs")
    n = len(pts)
    if n < 2:
        raise ReprShiftError(f"need at least 2 points, got {n}")
    if not np.isfinite(pts).all():
        raise ReprShiftError("non-finite value in regression input")
    x, y = pts[:, 0], pts[:, 1]
    dx = x - math.fsum(x) / n
    dy = y - math.fsum(y) / n
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    sxy = math.fsum(dx * dy)
    if sxx == 0:
        raise ReprShiftError("shift (x) is constant")
    if syy == 0:
        raise ReprShiftError("miou (y) is constant")
    slope = sxy / sxx
    intercept = math.fsum(y) / n - slope * math.fsum(x) / n
    r = sxy / math.sqrt(sxx * syy)
    return RegressionResult(slope, intercept, max(-1.0, min(1.0, r)), n)


def scatter_svg(points, fit: RegressionResult, width: int = 480, height: int = 360) -> str:
    """Minimal SVG scatter plot with the fitted line, deterministic byte output."""
    pts = np.asarray(points, dtype=np.float64)
    pad = 40
    x0, x1 = float(pts[:, 0].min()), float(pts[:, 0].max())
    y0, y1 = float(pts[:, 1].min()), float(pts[:, 1].max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">representation shift</text>',
        f'<text x="12" y="{height / 2:.1f}" text-anchor="middle" font-size="12" transform="rotate(-90 12 {height / 2:.1f})">mIoU</text>',
        f'<text x="{width - pad}" y="{pad - 10}" text-anchor="end" font-size="12">r = {fit.pearson_r:.3f}</text>',
    ]
    ya, yb = fit.intercept + fit.slope * x0, fit.intercept + fit.slope * x1
    parts.append(f'<line x1="{sx(x0):.2f}" y1="{sy(ya):.2f}" x2="{sx(x1):.2f}" y2="{sy(yb):.2f}" stroke="crimson"/>')
    for x, y in pts:
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
