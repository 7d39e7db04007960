import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import iou, red_square_scene
from oracles import flood_fill_components
from repshift.core import ImageRaster, LabeledBox, SegMask
from repshift.weaklabel import (
    GMM, ComponentExtractionConfig, GrabCutConfig, boxes_from_mask, grabcut, grabcut_box, kmeans, pseudo_label,
)

ALL = ComponentExtractionConfig(8, 1)


def squares_mask(h, w, squares, cls=3):
    lab = np.full((h, w), 255, dtype=np.uint8)
    for y, x, s in squares:
        lab[y:y + s, x:x + s] = cls
    return SegMask(lab)


# --- boxes from masks -------------------------------------------------------------

def test_all_ignore_no_boxes():
    assert boxes_from_mask(SegMask(np.full((8, 8), 255, dtype=np.uint8)), ALL) == []


def test_two_squares():
    m = squares_mask(40, 40, [(2, 3, 10), (20, 25, 10)])
    assert boxes_from_mask(m, ALL) == [LabeledBox(3, 3, 2, 12, 11), LabeledBox(3, 25, 20, 34, 29)]
    assert all(b.area == 100 for b in boxes_from_mask(m))


def test_diagonal_touch():
    m = squares_mask(30, 30, [(0, 0, 10), (10, 10, 10)])
    assert boxes_from_mask(m, ComponentExtractionConfig(8, 1)) == [LabeledBox(3, 0, 0, 19, 19)]
    assert boxes_from_mask(m, ComponentExtractionConfig(4, 1)) == [LabeledBox(3, 0, 0, 9, 9),
                                                                   LabeledBox(3, 10, 10, 19, 19)]


def test_min_area_filter():
    m = squares_mask(30, 30, [(0, 0, 8), (15, 15, 7)])  # areas 64 and 49
    assert boxes_from_mask(m) == [LabeledBox(3, 0, 0, 7, 7)]
    assert len(boxes_from_mask(m, ComponentExtractionConfig(8, 49))) == 2


def test_classes_kept_apart():
    lab = np.zeros((6, 6), dtype=np.uint8)
    lab[:, 3:] = 1
    got = boxes_from_mask(SegMask(lab), ALL)
    assert got == [LabeledBox(0, 0, 0, 2, 5), LabeledBox(1, 3, 0, 5, 5)]


def oracle_boxes(labels, connectivity, min_area):
    out = []
    for cls, pix in flood_fill_components(labels, connectivity):
        if len(pix) < min_area:
            continue
        ys = [p[0] for p in pix]
        xs = [p[1] for p in pix]
        out.append(LabeledBox(cls, min(xs), min(ys), max(xs), max(ys)))
    return sorted(out, key=lambda b: (b.class_id, b.y_min, b.x_min, b.y_max, b.x_max))


def blob_labels(seed, h=20, w=24):
    g = np.random.default_rng(seed)
    lab = g.choice(np.array([0, 1, 2, 255], dtype=np.uint8), size=(h, w), p=[0.25, 0.2, 0.15, 0.4])
    return lab


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([4, 8]), st.integers(1, 6))
def test_against_flood_fill(seed, connectivity, min_area):
    lab = blob_labels(seed)
    got = boxes_from_mask(SegMask(lab), ComponentExtractionConfig(connectivity, min_area))
    assert got == oracle_boxes(lab, connectivity, min_area)


def test_boxes_cover_and_are_tight():
    lab = blob_labels(7)
    comps = [(c, p) for c, p in flood_fill_components(lab, 8) if len(p) >= 3]
    boxes = boxes_from_mask(SegMask(lab), ComponentExtractionConfig(8, 3))
    for cls, pix in comps:
        box = next(b for b in boxes if b.class_id == cls
                   and all(b.y_min <= y <= b.y_max and b.x_min <= x <= b.x_max for y, x in pix))
        ys = [y for y, _ in pix]
        xs = [x for _, x in pix]
        # shrinking any side would drop a component pixel
        assert box.y_min == min(ys) and box.y_max == max(ys) and box.x_min == min(xs) and box.x_max == max(xs)


def test_component_config_validation():
    with pytest.raises(ValueError):
        ComponentExtractionConfig(6)
    with pytest.raises(ValueError):
        ComponentExtractionConfig(8, 0)


# --- GMM pieces ----------------------------------------------------------------------

def test_kmeans_deterministic_and_separates():
    g = np.random.default_rng(0)
    z = np.concatenate([g.normal(0.1, 0.01, (50, 3)), g.normal(0.9, 0.01, (50, 3))])
    a, b = kmeans(z, 2, 5), kmeans(z, 2, 5)
    assert np.array_equal(a, b)
    assert len(set(a[:50])) == 1 and len(set(a[50:])) == 1 and a[0] != a[50]


def test_kmeans_fewer_distinct_points():
    z = np.tile([[0.2, 0.3, 0.4]], (10, 1))
    labels = kmeans(z, 5, 0)
    assert len(labels) == 10


def test_gmm_single_color_is_finite():
    z = np.tile([[0.5, 0.5, 0.5]], (20, 1))
    gmm = GMM.fit(z, np.zeros(20, dtype=int))
    assert np.isfinite(gmm.nll(z)).all()
    assert np.isfinite(gmm.nll(np.array([[0.0, 1.0, 0.0]]))).all()


def test_gmm_nll_matches_scipy():
    from scipy.stats import multivariate_normal
    g = np.random.default_rng(3)
    z = g.uniform(0, 1, (200, 3))
    gmm = GMM.fit(z, np.zeros(200, dtype=int))
    ref = -multivariate_normal(z.mean(axis=0), np.cov(z.T, bias=True)).logpdf(z)
    assert np.allclose(gmm.nll(z), ref, rtol=1e-10, atol=1e-10)


# --- GrabCut ---------------------------------------------------------------------------

def test_red_square_iou():
    img, truth = red_square_scene()
    fg = grabcut_box(img, LabeledBox(0, 10, 10, 37, 37))
    assert iou(fg, truth) >= 0.95


def test_full_image_box_all_foreground():
    img, _ = red_square_scene()
    assert grabcut_box(img, LabeledBox(0, 0, 0, 47, 47)).all()


def test_box_of_background_color_collapses():
    img, _ = red_square_scene()
    # box sits in the blue region only
    box = LabeledBox(0, 0, 36, 30, 46)
    fg = grabcut_box(img, box)
    assert fg.sum() <= 0.1 * box.area


def test_nothing_outside_box(rng):
    img = ImageRaster(rng.integers(0, 256, (24, 28, 3), dtype=np.uint8))
    box = LabeledBox(0, 5, 4, 19, 17)
    fg = grabcut_box(img, box)
    outside = np.ones_like(fg)
    outside[4:18, 5:20] = False
    assert not fg[outside].any()


def noisy_scene(seed):
    g = np.random.default_rng(seed)
    h, w = 32, 32
    px = g.normal(g.uniform(40, 215, 3), 25, (h, w, 3))
    y0, x0 = g.integers(4, 12, 2)
    px[y0:y0 + 14, x0:x0 + 14] = g.normal(g.uniform(40, 215, 3), 25, (14, 14, 3))
    img = ImageRaster(np.clip(np.rint(px), 0, 255).astype(np.uint8))
    return img, LabeledBox(0, int(x0) - 2, int(y0) - 2, int(x0) + 15, int(y0) + 15)


@pytest.mark.parametrize("seed", range(6))
def test_energy_non_increasing(seed):
    img, box = noisy_scene(seed)
    res = grabcut(img, box, GrabCutConfig(max_iterations=8, convergence_eps=0.0))
    e = res.energies
    assert len(e) >= 1
    for before, after in zip(e, e[1:]):
        assert after <= before + 1e-9 * abs(before)


def test_grabcut_deterministic():
    img, box = noisy_scene(11)
    assert np.array_equal(grabcut_box(img, box, GrabCutConfig(seed=4)), grabcut_box(img, box, GrabCutConfig(seed=4)))


def test_grabcut_config_validation():
    for kw in ({"gmm_components": 0}, {"max_iterations": 0}, {"gamma": 0.0}):
        with pytest.raises(ValueError):
            GrabCutConfig(**kw)


# --- pseudo labels -------------------------------------------------------------------------

def test_zero_boxes_all_ignore():
    img, _ = red_square_scene()
    assert (pseudo_label(img, []).labels == 255).all()


def test_red_square_pseudo_label():
    img, truth = red_square_scene()
    lab = pseudo_label(img, [LabeledBox(7, 10, 10, 37, 37)]).labels
    assert set(np.unique(lab).tolist()) <= {7, 255}
    assert iou(lab == 7, truth) >= 0.95


def test_smaller_box_wins_overlap():
    # 20x20 image whose 10x10 red square fills the small box exactly; both boxes come out fully foreground
    img, truth = red_square_scene(20, 20, 5, 5, 10)
    big = LabeledBox(1, 0, 0, 19, 19)
    small = LabeledBox(2, 5, 5, 14, 14)
    assert big.area == 400 and small.area == 100
    assert grabcut_box(img, big).all()
    assert np.array_equal(grabcut_box(img, small), truth)
    for boxes in ([big, small], [small, big]):
        lab = pseudo_label(img, boxes).labels
        assert (lab[truth] == 2).all()
        assert (lab[~truth] == 1).all()


def test_smaller_box_wins_with_distinct_object():
    img, truth = red_square_scene()
    big = LabeledBox(1, 0, 0, 47, 47)
    small = LabeledBox(2, 10, 10, 37, 37)
    lab = pseudo_label(img, [small, big]).labels
    assert (lab[truth] == 2).all()
    assert (lab[~truth & (lab != 2)] == 1).all()


def test_equal_area_earlier_box_wins():
    img = ImageRaster(np.full((10, 10, 3), 90, dtype=np.uint8))
    a = LabeledBox(4, 0, 0, 9, 9)
    b = LabeledBox(5, 0, 0, 9, 9)
    assert (pseudo_label(img, [a, b]).labels == 4).all()
    assert (pseudo_label(img, [b, a]).labels == 5).all()


def test_pseudo_label_deterministic():
    img, box = noisy_scene(2)
    boxes = [box, LabeledBox(3, 0, 0, 15, 15)]
    assert pseudo_label(img, boxes, GrabCutConfig(seed=9)) == pseudo_label(img, boxes, GrabCutConfig(seed=9))


def test_pseudo_label_class_range():
    img, _ = red_square_scene()
    with pytest.raises(ValueError):
        pseudo_label(img, [LabeledBox(19, 0, 0, 3, 3)])
