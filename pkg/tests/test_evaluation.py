from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_iou
from repshift.core import ReprShiftError, SegMask
from repshift.evaluation import ConfusionMatrix, accumulate, confusion, miou, regress, scatter_svg


def mask(rows, k=19):
    return SegMask(np.array(rows, dtype=np.uint8), k)


def test_accumulate_hand_count():
    cm = accumulate(ConfusionMatrix(2), mask([[0], [1]], 2), mask([[0], [0]], 2))
    assert cm.counts.tolist() == [[1, 0], [1, 0]]
    assert cm.counts.dtype == np.int64


def test_perfect_prediction_diagonal():
    m = mask([[0, 1, 2], [2, 1, 0]], 3)
    cm = confusion(m, m, 3)
    assert np.array_equal(cm.counts, np.diag([2, 2, 2]))
    res = miou(cm)
    assert res.per_class == [1.0, 1.0, 1.0] and res.miou == 1.0


def test_all_ignore_unchanged():
    cm = confusion(mask([[0, 1]], 2), mask([[0, 1]], 2), 2)
    assert accumulate(cm, mask([[255, 255]], 2), mask([[1, 0]], 2)) == cm


def test_miou_hand_example():
    gt = mask([[0, 0, 0, 0]], 2)
    pred = mask([[0, 0, 1, 1]], 2)
    res = miou(confusion(gt, pred, 2))
    assert res.per_class == [0.5, 0.0]
    assert res.miou == 0.25


def test_three_class_by_hand():
    gt = mask([[0, 0, 1, 1, 2, 255]], 4)
    pred = mask([[0, 1, 1, 1, 0, 2]], 4)
    cm = confusion(gt, pred, 4)
    # class 0: inter 1, union gt{0,1} + pred{0,4} = 3; class 1: inter 2, union 3; class 2: inter 0, union 1
    res = miou(cm)
    assert res.per_class == [1 / 3, 2 / 3, 0.0, None]
    assert res.evaluated_classes == [0, 1, 2]
    assert res.miou == pytest.approx(1 / 3, abs=1e-15)
    assert cm.total == 5


def test_absent_class_handling():
    cm = confusion(mask([[0, 1]], 3), mask([[0, 1]], 3), 3)
    assert miou(cm).miou == 1.0
    both = miou(cm, absent_as_zero=True)
    assert both.per_class == [1.0, 1.0, 0.0] and both.miou == pytest.approx(2 / 3)


def test_no_evaluated_classes():
    with pytest.raises(ReprShiftError, match="no evaluated classes"):
        miou(ConfusionMatrix(3))


def test_confusion_errors():
    with pytest.raises(ReprShiftError, match="dimension"):
        confusion(mask([[0, 1]]), mask([[0], [1]]), 19)
    with pytest.raises(ReprShiftError, match="out of range"):
        confusion(mask([[0, 1]]), mask([[0, 255]]), 19)
    with pytest.raises(ReprShiftError, match="out of range"):
        confusion(mask([[0, 1]], 5), mask([[0, 3]], 5), 3)


def random_pairs(seed, n, k=4, h=6, w=7):
    g = np.random.default_rng(seed)
    gts, preds = [], []
    for _ in range(n):
        gt = g.integers(0, k, (h, w)).astype(np.uint8)
        gt[g.random((h, w)) < 0.2] = 255
        gts.append(gt)
        preds.append(g.integers(0, k, (h, w)).astype(np.uint8))
    return gts, preds


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_matches_naive_oracle(seed, n):
    k = 4
    gts, preds = random_pairs(seed, n, k)
    cm = ConfusionMatrix(k)
    for g, p in zip(gts, preds):
        cm = accumulate(cm, SegMask(g, k), SegMask(p, k))
    inter, union = naive_iou(gts, preds, k)
    assert np.diag(cm.counts).tolist() == inter
    got = miou(cm)
    for v, i, u in zip(got.per_class, inter, union):
        if u == 0:
            assert v is None
        else:
            assert v == float(Fraction(i, u))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.randoms(use_true_random=False))
def test_order_invariant(seed, r):
    gts, preds = random_pairs(seed, 6)
    pairs = list(zip(gts, preds))
    cms = [confusion(SegMask(g, 4), SegMask(p, 4), 4) for g, p in pairs]
    fwd = ConfusionMatrix(4)
    for c in cms:
        fwd = fwd + c
    r.shuffle(cms)
    shuffled = ConfusionMatrix(4)
    for c in cms:
        shuffled = shuffled + c
    assert fwd == shuffled
    assert miou(fwd).miou == miou(shuffled).miou


def test_regress_exact_line():
    res = regress([(0, 0), (1, 2), (2, 4)])
    assert (res.slope, res.intercept, res.pearson_r, res.n_points) == (2.0, 0.0, 1.0, 3)


def test_regress_inverse_line():
    assert regress([(0, 4), (1, 2), (2, 0)]).pearson_r == -1.0


def test_regress_zero_correlation():
    res = regress([(0, 0), (1, 1), (2, 0)])
    assert res.pearson_r == 0.0 and res.slope == 0.0
    assert res.intercept == pytest.approx(1 / 3, abs=1e-15)


def test_regress_against_numpy(rng):
    pts = rng.normal(size=(30, 2))
    res = regress(pts)
    slope, intercept = np.polyfit(pts[:, 0], pts[:, 1], 1)
    assert res.slope == pytest.approx(slope, rel=1e-12)
    assert res.intercept == pytest.approx(intercept, rel=1e-12, abs=1e-14)
    assert res.pearson_r == pytest.approx(np.corrcoef(pts.T)[0, 1], rel=1e-12)


pts_strategy = st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=20)


@settings(max_examples=100, deadline=None)
@given(pts_strategy, st.floats(0.01, 100), st.floats(-50, 50), st.floats(0.01, 100), st.floats(-50, 50))
def test_affine_invariance(pts, a, b, c, d):
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    spread = lambda v: max(v) - min(v)
    if spread(xs) < 1e-3 or spread(ys) < 1e-3:
        return
    base = regress(pts)
    scaled = regress([(a * x + b, c * y + d) for x, y in pts])
    assert abs(base.pearson_r) <= 1 + 1e-12
    assert scaled.pearson_r == pytest.approx(base.pearson_r, abs=1e-9)
    xscaled = regress([(a * x, y) for x, y in pts])
    assert xscaled.slope == pytest.approx(base.slope / a, rel=1e-12, abs=1e-12 * abs(base.slope / a) + 1e-15)


def test_regress_degenerate():
    with pytest.raises(ReprShiftError, match="x"):
        regress([(1, 0), (1, 2)])
    with pytest.raises(ReprShiftError, match="y"):
        regress([(0, 2), (1, 2)])
    with pytest.raises(ReprShiftError, match="at least 2"):
        regress([(0, 1)])


def test_scatter_svg_deterministic():
    pts = [(0.1, 0.5), (0.2, 0.4), (0.3, 0.35)]
    fit = regress(pts)
    a, b = scatter_svg(pts, fit), scatter_svg(pts, fit)
    assert a == b and a.startswith("<svg") and a.count("<circle") == 3
