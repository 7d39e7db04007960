from pathlib import Path

import numpy as np
import pytest

from repshift.core import ImageRaster, SegMask, write_image, write_mask

FIXTURES = Path(__file__).parent / "fixtures"
PHOTOS = FIXTURES / "photos"

# acceptance results, printed in the terminal summary
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0][2:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, h=16, w=20) -> ImageRaster:
    return ImageRaster(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


def make_image_dir(root: Path, images, names=None) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images):
        name = names[i] if names else f"img{i:03d}"
        write_image(img, root / f"{name}.png")
    return root


def make_mask_dir(root: Path, masks, names=None) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    for i, m in enumerate(masks):
        name = names[i] if names else f"img{i:03d}"
        write_mask(m, root / f"{name}.png")
    return root


def red_square_scene(h=48, w=48, top=14, left=14, side=20) -> tuple[ImageRaster, np.ndarray]:
    px = np.zeros((h, w, 3), dtype=np.uint8)
    px[...] = (20, 40, 200)
    px[top:top + side, left:left + side] = (210, 30, 30)
    truth = np.zeros((h, w), dtype=bool)
    truth[top:top + side, left:left + side] = True
    return ImageRaster(px), truth


def iou(a: np.ndarray, b: np.ndarray) -> float:
    return (a & b).sum() / (a | b).sum()


@pytest.fixture
def photos_dir():
    return PHOTOS


@pytest.fixture
def small_mask():
    lab = np.full((6, 6), 255, dtype=np.uint8)
    lab[1:3, 1:3] = 0
    return SegMask(lab, 19)
