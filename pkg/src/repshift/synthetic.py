"""Seeded synthetic street-like scenes with exact ground-truth masks.

Four classes: 0 sky, 1 road, 2 vegetation, 3 car. Each class has a base colour
plus per-pixel texture noise, so colour statistics and texture both matter.
Used by the demos and tests; not a substitute for real datasets.
"""
from __future__ import annotations

import numpy as np

from ._rng import SplitMix64
from .core import ImageRaster, SegMask

CLASS_NAMES = ("sky", "road", "vegetation", "car")
BASE_COLORS = np.array([
    [110, 160, 225],  # sky
    [105, 105, 110],  # road
    [60, 135, 55],  # vegetation
    [190, 40, 45],  # car
], dtype=np.float64)
NOISE = (6.0, 14.0, 22.0, 10.0)


def street_scene(seed: int, height: int = 64, width: int = 96) -> tuple[ImageRaster, SegMask]:
    rng = SplitMix64(seed)
    labels = np.zeros((height, width), dtype=np.uint8)
    horizon = int(height * (0.35 + 0.15 * rng.uniform(1)[0]))
    labels[horizon:] = 1
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(2):
        cy = horizon + (rng.uniform(1)[0] - 0.5) * height * 0.3
        cx = rng.uniform(1)[0] * width
        ry, rx = height * (0.12 + 0.1 * rng.uniform(1)[0]), width * (0.1 + 0.1 * rng.uniform(1)[0])
        labels[((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0] = 2
    n_cars = 1 + int(rng.integers(1, 0, 2)[0])
    for _ in range(n_cars):
        ch, cw = int(height * 0.15), int(width * 0.18)
        y0 = int(horizon + rng.uniform(1)[0] * (height - horizon - ch))
        x0 = int(rng.uniform(1)[0] * (width - cw))
        labels[y0:y0 + ch, x0:x0 + cw] = 3
    noise = (rng.uniform(height * width * 3) - 0.5).reshape(height, width, 3) * 2.0
    pix = BASE_COLORS[labels] + noise * np.array(NOISE)[labels][..., None]
    return ImageRaster(np.rint(np.clip(pix, 0, 255)).astype(np.uint8)), SegMask(labels, len(CLASS_NAMES))


class NearestCentroidSegmenter:
    """Per-pixel nearest class-mean colour classifier."""

    def __init__(self, num_classes: int):
        self.num_classes = num_classes
        self.centroids = None

    def fit(self, images, masks) -> "NearestCentroidSegmenter":
        sums = np.zeros((self.num_classes, 3))
        counts = np.zeros(self.num_classes)
        for img, m in zip(images, masks):
            lab = m.labels.ravel()
            keep = lab < self.num_classes
            px = img.pixels.reshape(-1, 3).astype(np.float64)[keep]
            np.add.at(sums, lab[keep], px)
            counts += np.bincount(lab[keep], minlength=self.num_classes)
        self.centroids = sums / np.maximum(counts, 1)[:, None]
        return self

    def predict(self, img: ImageRaster) -> SegMask:
        px = img.pixels.reshape(-1, 3).astype(np.float64)
        d = ((px[:, None, :] - self.centroids[None]) ** 2).sum(axis=2)
        return SegMask(d.argmin(axis=1).astype(np.uint8).reshape(img.height, img.width), self.num_classes)
