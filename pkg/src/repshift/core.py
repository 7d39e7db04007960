"""Shared data model and on-disk formats.

Images and masks live in lossless 8-bit rasters (PNG by default), per-image
channel-mean activations in the binary ``WFD1`` feature dump, and boxes in a
plain text file with one box per line.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

IGNORE_LABEL = 255
RASTER_EXTENSIONS = (".png", ".bmp", ".tif", ".tiff", ".ppm", ".pgm")
FEATURE_MAGIC = b"WFD1"


class ReprShiftError(ValueError):
    """Base class for domain errors (bad data, bad parameters)."""


class FormatError(ReprShiftError):
    pass


class DatasetError(ReprShiftError):
    pass


@dataclass(frozen=True, eq=False)
class ImageRaster:
    """H x W x 3 uint8 RGB image."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise FormatError(f"image must be H x W x 3, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise FormatError("image must be at least 1 x 1")
        if px.dtype != np.uint8:
            raise FormatError(f"image must be uint8, got {px.dtype}")
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ImageRaster):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class SegMask:
    """H x W uint8 class-id map; 255 marks ignored pixels."""

    labels: np.ndarray
    num_classes: int = 19

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2 or lab.shape[0] < 1 or lab.shape[1] < 1:
            raise FormatError(f"mask must be a non-empty H x W array, got shape {lab.shape}")
        if lab.dtype != np.uint8:
            raise FormatError(f"mask must be uint8, got {lab.dtype}")
        if not 1 <= self.num_classes <= 255:
            raise FormatError(f"num_classes must be in 1..255, got {self.num_classes}")
        bad = (lab >= self.num_classes) & (lab != IGNORE_LABEL)
        if bad.any():
            flat = int(np.flatnonzero(bad.ravel())[0])
            value = int(lab.ravel()[flat])
            y, x = divmod(flat, lab.shape[1])
            raise FormatError(
                f"label {value} out of range 0..{self.num_classes - 1} (or 255) "
                f"at pixel index {flat} (row {y}, col {x})"
            )
        lab = np.ascontiguousarray(lab)
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SegMask):
            return NotImplemented
        return self.num_classes == other.num_classes and np.array_equal(self.labels, other.labels)


@dataclass(frozen=True)
class LabeledBox:
    """Axis-aligned box with inclusive pixel bounds."""

    class_id: int
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.class_id < 0:
            raise FormatError(f"negative class id {self.class_id}")
        if not (0 <= self.x_min <= self.x_max and 0 <= self.y_min <= self.y_max):
            raise FormatError(f"invalid box coordinates {self}")

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)

    def check_within(self, width: int, height: int) -> None:
        if self.x_max >= width or self.y_max >= height:
            raise FormatError(f"box {self} exceeds image bounds {width}x{height}")


@dataclass(frozen=True, eq=False)
class ChannelMeanMatrix:
    """n_images x C matrix of per-image channel-mean activations."""

    values: np.ndarray
    source_tag: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise FormatError(f"channel-mean matrix must be non-empty 2-D, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise FormatError("channel-mean matrix contains non-finite values")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_images(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ChannelMeanMatrix):
            return NotImplemented
        return self.source_tag == other.source_tag and np.array_equal(
            self.values.view(np.uint32), other.values.view(np.uint32)
        )


@dataclass(frozen=True)
class DatasetHandle:
    """Sorted view of a directory of rasters, keyed by file stem."""

    root: Path
    entries: tuple[str, ...]
    files: tuple[str, ...] = field(repr=False)
    kind: str = "images"

    def __len__(self) -> int:
        return len(self.entries)

    def path(self, i: int) -> Path:
        return self.root / self.files[i]

    def path_for(self, stem: str) -> Path:
        try:
            return self.root / self.files[self.entries.index(stem)]
        except ValueError:
            raise DatasetError(f"no entry {stem!r} in {self.root}") from None


def _stem_key(stem: str) -> bytes:
    return stem.encode("utf-8", "surrogateescape")


def load_dataset(root, kind: str = "images") -> DatasetHandle:
    if kind not in ("images", "masks"):
        raise DatasetError(f"unknown dataset kind {kind!r}")
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    by_stem: dict[str, str] = {}
    for name in os.listdir(root):
        p = root / name
        if name.startswith(".") or not p.is_file():
            continue
        if p.suffix.lower() not in RASTER_EXTENSIONS:
            continue
        if p.stem in by_stem:
            raise DatasetError(f"duplicate stem {p.stem!r} in {root}")
        by_stem[p.stem] = name
    if not by_stem:
        raise DatasetError(f"empty dataset: {root}")
    stems = sorted(by_stem, key=_stem_key)
    return DatasetHandle(root, tuple(stems), tuple(by_stem[s] for s in stems), kind)


def check_paired(a: DatasetHandle, b: DatasetHandle) -> None:
    """Raise unless both handles carry exactly the same stems."""
    if a.entries != b.entries:
        only_a = sorted(set(a.entries) - set(b.entries))[:5]
        only_b = sorted(set(b.entries) - set(a.entries))[:5]
        raise DatasetError(
            f"stem mismatch between {a.root} and {b.root}: only in first {only_a}, only in second {only_b}"
        )


# --- rasters ---------------------------------------------------------------

def _png_bit_depth(path) -> int | None:
    with open(path, "rb") as fh:
        head = fh.read(25)
    if head[:8] == b"\x89PNG\r\n\x1a\n" and len(head) == 25:
        return head[24]
    return None


def _open_raster(path) -> Image.Image:
    try:
        depth = _png_bit_depth(path)
        im = Image.open(path)
        im.load()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"cannot decode raster {path}: {exc}") from exc
    if depth is not None and depth > 8 or im.mode.startswith("I") or im.mode == "F":
        raise FormatError(f"unsupported bit depth in {path} (mode {im.mode})")
    return im


def read_image(path) -> ImageRaster:
    im = _open_raster(path)
    if im.mode in ("P", "L"):
        im = im.convert("RGB")
    elif im.mode != "RGB":
        raise FormatError(f"unsupported raster mode {im.mode} in {path}")
    return ImageRaster(np.asarray(im, dtype=np.uint8))


def write_image(image: ImageRaster, path) -> None:
    Image.fromarray(image.pixels, mode="RGB").save(path, format=_format_for(path))


def read_mask(path, num_classes: int = 19) -> SegMask:
    im = _open_raster(path)
    if im.mode not in ("L", "P"):
        raise FormatError(f"mask {path} must be single-channel 8-bit, got mode {im.mode}")
    # palette indices are taken as class ids
    labels = np.array(im, dtype=np.uint8)
    try:
        return SegMask(labels, num_classes)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_mask(mask: SegMask, path) -> None:
    Image.fromarray(mask.labels, mode="L").save(path, format=_format_for(path))


def _format_for(path) -> str:
    ext = Path(path).suffix.lower()
    return {".bmp": "BMP", ".tif": "TIFF", ".tiff": "TIFF", ".ppm": "PPM", ".pgm": "PPM"}.get(ext, "PNG")


# --- feature dumps ----------------------------------------------------------

_HEADER = struct.Struct("<4sII")


def encode_feature_dump(m: ChannelMeanMatrix) -> bytes:
    tag = m.source_tag.encode("utf-8")
    if len(tag) > 0xFFFF:
        raise FormatError(f"source tag too long ({len(tag)} bytes, max 65535)")
    body = m.values.astype("<f4", copy=False).tobytes(order="C")
    return _HEADER.pack(FEATURE_MAGIC, m.n_images, m.n_channels) + body + struct.pack("<H", len(tag)) + tag


def decode_feature_dump(data: bytes) -> ChannelMeanMatrix:
    if len(data) < 4 or data[:4] != FEATURE_MAGIC:
        raise FormatError("bad magic: not a WFD1 feature dump")
    if len(data) < _HEADER.size + 2:
        raise FormatError("truncated feature dump header")
    _, n, c = _HEADER.unpack_from(data)
    body_end = _HEADER.size + 4 * n * c
    if len(data) < body_end + 2:
        raise FormatError(f"declared size {n}x{c} inconsistent with file length {len(data)}")
    (tag_len,) = struct.unpack_from("<H", data, body_end)
    if len(data) != body_end + 2 + tag_len:
        raise FormatError(f"declared size {n}x{c} (tag {tag_len} bytes) inconsistent with file length {len(data)}")
    values = np.frombuffer(data, dtype="<f4", count=n * c, offset=_HEADER.size).reshape(n, c)
    try:
        tag = data[body_end + 2:].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"feature dump tag is not UTF-8: {exc}") from None
    return ChannelMeanMatrix(values.astype(np.float32), tag)


def write_feature_dump(m: ChannelMeanMatrix, path) -> None:
    Path(path).write_bytes(encode_feature_dump(m))


def read_feature_dump(path) -> ChannelMeanMatrix:
    try:
        return decode_feature_dump(Path(path).read_bytes())
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


# --- box files --------------------------------------------------------------

def format_box_line(stem: str, box: LabeledBox) -> str:
    if not stem or any(ch.isspace() for ch in stem):
        raise FormatError(f"image stem {stem!r} is empty or contains whitespace")
    return f"{stem} {box.class_id} {box.x_min} {box.y_min} {box.x_max} {box.y_max}"


def parse_box_line(line: str) -> tuple[str, LabeledBox]:
    parts = line.rstrip("\n").split(" ")
    if len(parts) != 6:
        raise FormatError(f"box line must have 6 space-separated fields: {line!r}")
    stem, *nums = parts
    if not stem or not all(n.isdigit() for n in nums):
        raise FormatError(f"malformed box line: {line!r}")
    return stem, LabeledBox(*(int(n) for n in nums))


def write_boxes(path, boxes: Iterable[tuple[str, LabeledBox]]) -> None:
    text = "".join(format_box_line(stem, b) + "\n" for stem, b in boxes)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_boxes(path) -> list[tuple[str, LabeledBox]]:
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    out = []
    for lineno, line in enumerate(text.split("\n"), 1):
        if not line:
            continue
        try:
            out.append(parse_box_line(line))
        except FormatError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return out


def group_boxes(boxes: Sequence[tuple[str, LabeledBox]]) -> dict[str, list[LabeledBox]]:
    grouped: dict[str, list[LabeledBox]] = {}
    for stem, box in boxes:
        grouped.setdefault(stem, []).append(box)
    return grouped
