"""Per-image channel-mean activations from a seeded random filter bank.

The default extractor is a two-layer rectified convolutional bank
(3 -> 32 -> 64 channels, 3x3 kernels, stride 2, no padding). Weights are drawn
uniform in [-1/9, 1/9] from a SplitMix64 stream, so a seed pins the bank
bit-for-bit on every platform. Features from trained networks enter through
feature dumps instead (see :mod:`repshift.core`).
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._rng import SplitMix64
from .core import ChannelMeanMatrix, DatasetHandle, ImageRaster, ReprShiftError, read_image

WEIGHT_BOUND = 1.0 / 9.0


@dataclass(frozen=True)
class FilterBankConfig:
    channels: tuple[int, ...] = (32, 64)
    kernel_size: int = 3
    stride: int = 2

    @property
    def n_layers(self) -> int:
        return len(self.channels)


@dataclass(frozen=True, eq=False)
class FilterBank:
    seed: int
    config: FilterBankConfig
    kernels: tuple[np.ndarray, ...]  # each (C_out, C_in, k, k), float64

    @property
    def n_channels(self) -> int:
        return self.kernels[-1].shape[0]

    @property
    def receptive_field(self) -> int:
        """Smallest input side that yields at least one output cell."""
        k, s = self.config.kernel_size, self.config.stride
        size = 1
        for _ in self.kernels:
            size = (size - 1) * s + k
        return size

    def checksum(self) -> str:
        h = hashlib.sha256()
        for w in self.kernels:
            h.update(np.ascontiguousarray(w, dtype="<f8").tobytes())
        return h.hexdigest()

    def output_shape(self, height: int, width: int) -> tuple[int, int]:
        k, s = self.config.kernel_size, self.config.stride
        for _ in self.kernels:
            height = (height - k) // s + 1
            width = (width - k) // s + 1
        return height, width

    def describe(self) -> str:
        ch = ",".join(str(c) for c in self.config.channels)
        return f"filterbank(seed={self.seed},channels={ch},k={self.config.kernel_size},stride={self.config.stride})"


def build_filter_bank(seed: int = 0, config: FilterBankConfig | None = None) -> FilterBank:
    config = config or FilterBankConfig()
    k = config.kernel_size
    if k < 1 or k % 2 == 0:
        raise ReprShiftError(f"kernel_size must be odd and positive, got {k}")
    if config.stride < 1:
        raise ReprShiftError(f"stride must be >= 1, got {config.stride}")
    if not config.channels or any(c < 1 for c in config.channels):
        raise ReprShiftError(f"every layer needs at least one channel, got {config.channels}")
    rng = SplitMix64(seed)
    kernels = []
    c_in = 3
    for c_out in config.channels:
        n = c_out * c_in * k * k
        w = rng.uniform(n, -WEIGHT_BOUND, WEIGHT_BOUND).reshape(c_out, c_in, k, k)
        w.setflags(write=False)
        kernels.append(w)
        c_in = c_out
    return FilterBank(int(seed), config, tuple(kernels))


@dataclass(frozen=True, eq=False)
class FeatureMap:
    values: np.ndarray  # (C, h, w), non-negative

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]


def _conv_valid(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    # x: (C_in, H, W); w: (C_out, C_in, k, k) -> (C_out, Ho, Wo)
    k = w.shape[-1]
    win = sliding_window_view(x, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    return np.einsum("chwij,ocij->ohw", win, w, optimize=True)


def extract(bank: FilterBank, image: ImageRaster) -> FeatureMap:
    rf = bank.receptive_field
    if image.height < rf or image.width < rf:
        raise ReprShiftError(
            f"image {image.width}x{image.height} is smaller than the receptive field {rf}x{rf}"
        )
    x = image.pixels.transpose(2, 0, 1).astype(np.float64) / 255.0
    for w in bank.kernels:
        x = np.maximum(_conv_valid(x, w, bank.config.stride), 0.0)
    return FeatureMap(x)


def channel_means(fm: FeatureMap) -> np.ndarray:
    v = np.asarray(fm.values, dtype=np.float64)
    return v.reshape(v.shape[0], -1).sum(axis=1, dtype=np.float64) / (v.shape[1] * v.shape[2])


def image_channel_means(bank: FilterBank, image: ImageRaster) -> np.ndarray:
    return channel_means(extract(bank, image))


def dataset_channel_means(bank: FilterBank, ds: DatasetHandle, jobs: int = 1) -> ChannelMeanMatrix:
    if ds.kind != "images":
        raise ReprShiftError(f"expected an image dataset, got kind {ds.kind!r}")

    def row(i: int) -> np.ndarray:
        try:
            return image_channel_means(bank, read_image(ds.path(i)))
        except (ReprShiftError, OSError) as exc:
            raise type(exc)(f"entry {ds.entries[i]!r}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(row, range(len(ds))))
    else:
        rows = [row(i) for i in range(len(ds))]
    tag = f"root={ds.root};{bank.describe()}"
    return ChannelMeanMatrix(np.stack(rows), tag)
