"""Target-domain augmentation operators.

All operators map uint8 RGB rasters to uint8 RGB rasters of the same size and
are pure functions of their inputs, parameters and seed. Float results are
clamped to [0, 255] and rounded half-to-even before they become bytes.

Op specs use the grammar ``kind:key=value,key=value``, e.g. ``lowfreq:beta=0.01``,
``color:strength=0.4``, ``frosted:radius=4``, ``poster:levels=8``,
``mural:radius=3,levels=8``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import uniform_filter

from ._rng import SplitMix64, derive_seed
from .core import DatasetHandle, ImageRaster, ReprShiftError, load_dataset, read_image, write_image

log = logging.getLogger(__name__)

LUMA = np.array([0.299, 0.587, 0.114])


def to_byte(x: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(x, 0.0, 255.0)).astype(np.uint8)


# --- low-frequency amplitude exchange -----------------------------------------

def resize_bilinear(img: ImageRaster, height: int, width: int) -> ImageRaster:
    if (img.height, img.width) == (height, width):
        return img
    out = Image.fromarray(img.pixels).resize((width, height), Image.Resampling.BILINEAR)
    return ImageRaster(np.asarray(out, dtype=np.uint8))


def lowfreq_window(height: int, width: int, beta: float) -> tuple[slice, slice]:
    """Centered square window (in fftshift-ed coordinates) of half-width floor(beta * min(H, W))."""
    half = int(np.floor(beta * min(height, width)))
    if half < 1:
        raise ReprShiftError(f"beta too small for image size: beta={beta} on {width}x{height}")
    cy, cx = height // 2, width // 2
    return (slice(max(cy - half, 0), min(cy + half, height)),
            slice(max(cx - half, 0), min(cx + half, width)))


def lowfreq_exchange_float(target: ImageRaster, source: ImageRaster, beta: float) -> np.ndarray:
    """Unquantized result of :func:`lowfreq_exchange`, shape (H, W, 3)."""
    if not 0.0 < beta <= 0.5:
        raise ReprShiftError(f"beta must lie in (0, 0.5], got {beta}")
    h, w = target.height, target.width
    rows, cols = lowfreq_window(h, w, beta)
    source = resize_bilinear(source, h, w)
    f_tgt = np.fft.fftshift(np.fft.fft2(target.pixels.astype(np.float64), axes=(0, 1)), axes=(0, 1))
    f_src = np.fft.fftshift(np.fft.fft2(source.pixels.astype(np.float64), axes=(0, 1)), axes=(0, 1))
    amp = np.abs(f_tgt)
    amp[rows, cols] = np.abs(f_src[rows, cols])
    mixed = amp * np.exp(1j * np.angle(f_tgt))
    return np.fft.ifft2(np.fft.ifftshift(mixed, axes=(0, 1)), axes=(0, 1)).real


def lowfreq_exchange(target: ImageRaster, source: ImageRaster, beta: float = 0.01) -> ImageRaster:
    """Replace the target's low-frequency amplitude with the source's, keeping target phase."""
    return ImageRaster(to_byte(lowfreq_exchange_float(target, source, beta)))


# --- photometric and filter operators ------------------------------------------

def color_factors(strength: float, seed: int) -> tuple[float, float, float]:
    """Brightness, contrast and saturation factors drawn for ``seed``."""
    if not 0.0 <= strength <= 1.0:
        raise ReprShiftError(f"color strength must lie in [0, 1], got {strength}")
    b, c, s = SplitMix64(seed).uniform(3, 1.0 - strength, 1.0 + strength)
    return float(b), float(c), float(s)


def color_augment(img: ImageRaster, strength: float, seed: int = 0) -> ImageRaster:
    b, c, s = color_factors(strength, seed)
    x = img.pixels.astype(np.float64)
    x = np.clip(((x - 128.0) * c + 128.0) * b, 0.0, 255.0)
    luma = x @ LUMA
    x = s * x + (1.0 - s) * luma[..., None]
    return ImageRaster(to_byte(x))


def frosted_glass(img: ImageRaster, radius: int, seed: int = 0) -> ImageRaster:
    """Copy every pixel from a random neighbour within ``radius`` (clamped to the image)."""
    h, w = img.height, img.width
    if radius < 1:
        raise ReprShiftError(f"frosted-glass radius must be >= 1, got {radius}")
    if not radius < min(h, w) / 2:
        raise ReprShiftError(f"frosted-glass radius {radius} must be < min(H, W)/2 for a {w}x{h} image")
    rng = SplitMix64(seed)
    dy = rng.integers(h * w, -radius, radius).reshape(h, w)
    dx = rng.integers(h * w, -radius, radius).reshape(h, w)
    yy = np.clip(np.arange(h)[:, None] + dy, 0, h - 1)
    xx = np.clip(np.arange(w)[None, :] + dx, 0, w - 1)
    return ImageRaster(img.pixels[yy, xx])


def _check_levels(levels: int) -> None:
    if not 2 <= levels <= 32:
        raise ReprShiftError(f"levels must lie in 2..32, got {levels}")


def poster(img: ImageRaster, levels: int) -> ImageRaster:
    _check_levels(levels)
    step = 255.0 / (levels - 1)
    q = np.rint(img.pixels.astype(np.float64) / step)
    return ImageRaster(to_byte(q * step))


def box_blur(img: ImageRaster, radius: int) -> ImageRaster:
    if radius < 1:
        raise ReprShiftError(f"blur radius must be >= 1, got {radius}")
    x = uniform_filter(img.pixels.astype(np.float64), size=(2 * radius + 1, 2 * radius + 1, 1), mode="nearest")
    return ImageRaster(to_byte(x))


def mural(img: ImageRaster, smooth_radius: int, levels: int) -> ImageRaster:
    _check_levels(levels)
    return poster(box_blur(img, smooth_radius), levels)


# --- op specs -------------------------------------------------------------------

_KINDS = {
    "lowfreq": {"beta": float},
    "color": {"strength": float},
    "frosted": {"radius": int},
    "poster": {"levels": int},
    "mural": {"radius": int, "levels": int},
}
_DEFAULTS = {"lowfreq": {"beta": 0.01}, "mural": {"radius": 3, "levels": 8}}
_ALIASES = {"lowfreq_exchange": "lowfreq", "frosted_glass": "frosted"}


@dataclass(frozen=True)
class AugmentationOp:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in _KINDS:
            raise ReprShiftError(f"unknown augmentation kind {self.kind!r}; expected one of {sorted(_KINDS)}")
        schema = _KINDS[kind]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise ReprShiftError(f"unknown parameter(s) {sorted(unknown)} for {kind}")
        params = {**_DEFAULTS.get(kind, {}), **self.params}
        missing = set(schema) - set(params)
        if missing:
            raise ReprShiftError(f"missing parameter(s) {sorted(missing)} for {kind}")
        try:
            params = {k: schema[k](v) for k, v in params.items()}
        except (TypeError, ValueError) as exc:
            raise ReprShiftError(f"bad parameter value for {kind}: {exc}") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)
        self._validate()

    def _validate(self) -> None:
        p = self.params
        if self.kind == "lowfreq" and not 0.0 < p["beta"] <= 0.5:
            raise ReprShiftError(f"beta must lie in (0, 0.5], got {p['beta']}")
        if self.kind == "color" and not 0.0 <= p["strength"] <= 1.0:
            raise ReprShiftError(f"color strength must lie in [0, 1], got {p['strength']}")
        if self.kind in ("frosted", "mural") and p["radius"] < 1:
            raise ReprShiftError(f"radius must be >= 1, got {p['radius']}")
        if self.kind in ("poster", "mural"):
            _check_levels(p["levels"])

    @classmethod
    def parse(cls, spec: str, seed: int = 0) -> "AugmentationOp":
        spec = spec.strip()
        kind, _, rest = spec.partition(":")
        params = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ReprShiftError(f"malformed parameter {item!r} in op spec {spec!r}")
            params[key.strip()] = value.strip()
        return cls(kind.strip(), params, seed)

    @property
    def needs_reference(self) -> bool:
        return self.kind == "lowfreq"

    def describe(self) -> str:
        body = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}:{body}"

    def apply(self, img: ImageRaster, reference: ImageRaster | None = None, seed: int | None = None) -> ImageRaster:
        seed = self.seed if seed is None else seed
        p = self.params
        if self.kind == "lowfreq":
            if reference is None:
                raise ReprShiftError("lowfreq exchange needs a reference (source-domain) image")
            return lowfreq_exchange(img, reference, p["beta"])
        if self.kind == "color":
            return color_augment(img, p["strength"], seed)
        if self.kind == "frosted":
            return frosted_glass(img, p["radius"], seed)
        if self.kind == "poster":
            return poster(img, p["levels"])
        return mural(img, p["radius"], p["levels"])


def parse_ops(text: str, seed: int = 0) -> list[AugmentationOp]:
    specs = [s for s in (t.strip() for t in text.split(";")) if s]
    if not specs:
        raise ReprShiftError("empty op list")
    return [AugmentationOp.parse(s, seed) for s in specs]


def reference_index(seed: int, image_index: int, n_reference: int) -> int:
    """Source entry paired with target image ``image_index`` for low-frequency exchange."""
    return int(SplitMix64(derive_seed(seed, image_index)).integers(1, 0, n_reference - 1)[0])


def apply_to_dataset(op: AugmentationOp, tgt: DatasetHandle, src: DatasetHandle | None,
                     out_root, jobs: int = 1) -> DatasetHandle:
    """Augment every image of ``tgt`` into ``out_root``, keeping file stems.

    Image ``i`` is processed with seed ``op.seed + i``; for low-frequency exchange its
    reference is a source entry drawn with the same per-image seed.
    """
    if op.needs_reference and src is None:
        raise ReprShiftError("lowfreq exchange requires a source (reference) dataset")
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)

    def one(i: int) -> None:
        stem = tgt.entries[i]
        try:
            img = read_image(tgt.path(i))
            ref = None
            if op.needs_reference:
                ref = read_image(src.path(reference_index(op.seed, i, len(src))))
            out = op.apply(img, ref, seed=derive_seed(op.seed, i))
            write_image(out, out_root / f"{stem}.png")
        except ReprShiftError as exc:
            raise ReprShiftError(f"{op.describe()} on {stem!r}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            list(pool.map(one, range(len(tgt))))
    else:
        for i in range(len(tgt)):
            one(i)
    return load_dataset(out_root, "images")

