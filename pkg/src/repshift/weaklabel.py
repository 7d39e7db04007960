"""Boxes from semantic masks, and pseudo-masks from boxes.

``boxes_from_mask`` takes the tight bounding box of every class-wise connected
component. ``grabcut_box`` is a self-contained GrabCut: two full-covariance
GMMs over normalized RGB, contrast-sensitive 8-neighbour smoothness and an
exact min-cut per iteration. ``pseudo_label`` composites per-box foregrounds so
that smaller boxes are painted last (smaller objects are assumed in front).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._rng import SplitMix64, derive_seed
from .core import IGNORE_LABEL, ImageRaster, LabeledBox, ReprShiftError, SegMask
from .maxflow import FlowGraph

COV_FLOOR = 1e-4
_LOG_2PI = math.log(2.0 * math.pi)


# --- boxes from masks ----------------------------------------------------------

@dataclass(frozen=True)
class ComponentExtractionConfig:
    connectivity: int = 8
    min_area: int = 64

    def __post_init__(self):
        if self.connectivity not in (4, 8):
            raise ReprShiftError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.min_area < 1:
            raise ReprShiftError(f"min_area must be >= 1, got {self.min_area}")


def boxes_from_mask(mask: SegMask, cfg: ComponentExtractionConfig | None = None) -> list[LabeledBox]:
    cfg = cfg or ComponentExtractionConfig()
    structure = ndimage.generate_binary_structure(2, 1 if cfg.connectivity == 4 else 2)
    found = []
    for cls in np.unique(mask.labels):
        if cls == IGNORE_LABEL:
            continue
        comp, n = ndimage.label(mask.labels == cls, structure=structure)
        areas = np.bincount(comp.ravel(), minlength=n + 1)
        for idx, sl in enumerate(ndimage.find_objects(comp), start=1):
            if sl is None or areas[idx] < cfg.min_area:
                continue
            ys, xs = sl
            found.append(LabeledBox(int(cls), xs.start, ys.start, xs.stop - 1, ys.stop - 1))
    found.sort(key=lambda b: (b.class_id, b.y_min, b.x_min, b.y_max, b.x_max))
    return found


# --- Gaussian mixtures -----------------------------------------------------------

def kmeans(z: np.ndarray, k: int, seed: int, n_iter: int = 10) -> np.ndarray:
    """Seeded k-means++ / Lloyd labels for the rows of ``z``; fewer clusters if points run out."""
    rng = SplitMix64(seed)
    n = len(z)
    centers = [z[min(int(rng.uniform(1)[0] * n), n - 1)]]
    d2 = ((z - centers[0]) ** 2).sum(axis=1)
    while len(centers) < k:
        total = d2.sum()
        if total <= 0:
            break
        cdf = np.cumsum(d2)
        pick = int(np.searchsorted(cdf, rng.uniform(1)[0] * total, side="right"))
        centers.append(z[min(pick, n - 1)])
        d2 = np.minimum(d2, ((z - centers[-1]) ** 2).sum(axis=1))
    c = np.array(centers)
    labels = np.zeros(n, dtype=np.int64)
    for step in range(n_iter):
        dist = np.stack([((z - cj) ** 2).sum(axis=1) for cj in c], axis=1)
        new = dist.argmin(axis=1)
        if step and np.array_equal(new, labels):
            break
        labels = new
        for j in range(len(c)):
            members = z[labels == j]
            if len(members):
                c[j] = members.mean(axis=0)
    return labels


@dataclass
class GMM:
    weights: np.ndarray  # (K,)
    means: np.ndarray  # (K, 3)
    covs: np.ndarray  # (K, 3, 3)

    @classmethod
    def fit(cls, z: np.ndarray, labels: np.ndarray) -> "GMM":
        """Maximum-likelihood parameters per hard-assigned component.

        Covariance eigenvalues are clipped at ``COV_FLOOR``, which is the
        constrained maximum-likelihood estimate, so refits never raise the energy.
        """
        weights, means, covs = [], [], []
        for j in np.unique(labels):
            members = z[labels == j]
            mu = members.mean(axis=0)
            d = members - mu
            cov = d.T @ d / len(members)
            vals, vecs = np.linalg.eigh(cov)
            cov = (vecs * np.maximum(vals, COV_FLOOR)) @ vecs.T
            weights.append(len(members) / len(z))
            means.append(mu)
            covs.append(cov)
        return cls(np.array(weights), np.array(means), np.array(covs))

    def component_nll(self, z: np.ndarray) -> np.ndarray:
        """(N, K) negative log of weight times Gaussian density."""
        out = np.empty((len(z), len(self.weights)))
        for j, (w, mu, cov) in enumerate(zip(self.weights, self.means, self.covs)):
            chol = np.linalg.cholesky(cov)
            sol = np.linalg.solve(chol, (z - mu).T)
            maha = (sol ** 2).sum(axis=0)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            out[:, j] = -math.log(w) + 0.5 * (logdet + maha + 3 * _LOG_2PI)
        return out

    def nll(self, z: np.ndarray) -> np.ndarray:
        return self.component_nll(z).min(axis=1)

    def assign(self, z: np.ndarray) -> np.ndarray:
        return self.component_nll(z).argmin(axis=1)


# --- GrabCut --------------------------------------------------------------------

@dataclass(frozen=True)
class GrabCutConfig:
    gmm_components: int = 5
    max_iterations: int = 5
    gamma: float = 50.0
    convergence_eps: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.gmm_components < 1:
            raise ReprShiftError(f"gmm_components must be >= 1, got {self.gmm_components}")
        if self.max_iterations < 1:
            raise ReprShiftError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.gamma > 0:
            raise ReprShiftError(f"gamma must be > 0, got {self.gamma}")


# neighbour offsets (dy, dx) covering each undirected 8-neighbour pair once
_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))


def _pair_slices(h: int, w: int, dy: int, dx: int):
    """Slices (a, b) such that a[...] and b[...] index the two ends of every pair."""
    ya, yb = slice(0, h - dy), slice(dy, h)
    if dx >= 0:
        xa, xb = slice(0, w - dx), slice(dx, w)
    else:
        xa, xb = slice(-dx, w), slice(0, w + dx)
    return (ya, xa), (yb, xb)


def smoothness_weights(z: np.ndarray, gamma: float) -> list[np.ndarray]:
    """Per-direction pairwise weights ``gamma * exp(-beta * |zi - zj|^2) / dist``."""
    h, w, _ = z.shape
    sq = []
    for dy, dx in _OFFSETS:
        a, b = _pair_slices(h, w, dy, dx)
        sq.append(((z[a] - z[b]) ** 2).sum(axis=2))
    n_pairs = sum(s.size for s in sq)
    mean_sq = sum(float(s.sum()) for s in sq) / n_pairs if n_pairs else 0.0
    beta = 1.0 / (2.0 * mean_sq) if mean_sq > 0 else 0.0
    return [gamma * np.exp(-beta * s) / math.hypot(dy, dx) for s, (dy, dx) in zip(sq, _OFFSETS)]


def cut_energy(fg: np.ndarray, d_fg: np.ndarray, d_bg: np.ndarray, pair_w: list[np.ndarray]) -> float:
    h, w = fg.shape
    e = float(d_fg[fg].sum()) + float(d_bg[~fg].sum())
    for (dy, dx), wt in zip(_OFFSETS, pair_w):
        a, b = _pair_slices(h, w, dy, dx)
        e += float(wt[fg[a] != fg[b]].sum())
    return e


@dataclass
class GrabCutResult:
    foreground: np.ndarray  # (H, W) bool
    energies: list[float]


def _solve_cut(inbox: np.ndarray, d_fg: np.ndarray, d_bg: np.ndarray, pair_w: list[np.ndarray]) -> np.ndarray:
    """Exact min-cut over the in-box pixels; everything outside is pinned to background.

    Pinned pixels are folded into their neighbours' terminal edges, which is
    equivalent to infinite-capacity links from them to the sink.
    """
    h, w = inbox.shape
    ys, xs = np.nonzero(inbox)
    node = -np.ones((h, w), dtype=np.int64)
    node[ys, xs] = np.arange(len(ys))
    n = len(ys)
    src, snk = n, n + 1

    to_sink = d_fg[ys, xs].astype(np.float64).copy()  # paid when labelled foreground
    to_src = d_bg[ys, xs].astype(np.float64).copy()  # paid when labelled background
    links = []
    for (dy, dx), wt in zip(_OFFSETS, pair_w):
        a, b = _pair_slices(h, w, dy, dx)
        na, nb = node[a], node[b]
        both = (na >= 0) & (nb >= 0)
        links.append((na[both], nb[both], wt[both]))
        for mine, other in ((na, nb), (nb, na)):
            edge = (mine >= 0) & (other < 0)
            np.add.at(to_sink, mine[edge], wt[edge])
    shift = np.minimum(to_sink, to_src)
    to_sink -= shift
    to_src -= shift

    g = FlowGraph(n + 2)
    for i, (cs, ct) in enumerate(zip(to_src.tolist(), to_sink.tolist())):
        if cs > 0:
            g.add_edge(src, i, cs)
        if ct > 0:
            g.add_edge(i, snk, ct)
    for na, nb, wt in links:
        for u, v, c in zip(na.tolist(), nb.tolist(), wt.tolist()):
            g.add_edge(u, v, c, c)
    g.max_flow(src, snk)
    side = g.source_side(src)
    fg = np.zeros((h, w), dtype=bool)
    fg[ys, xs] = np.array(side[:n], dtype=bool)
    return fg


def grabcut(img: ImageRaster, box: LabeledBox, cfg: GrabCutConfig | None = None) -> GrabCutResult:
    """GrabCut initialised from ``box``; returns the foreground and the energy after every cut."""
    cfg = cfg or GrabCutConfig()
    box.check_within(img.width, img.height)
    h, w = img.height, img.width
    inbox = np.zeros((h, w), dtype=bool)
    inbox[box.y_min:box.y_max + 1, box.x_min:box.x_max + 1] = True
    if inbox.all():
        # nothing is known to be background
        return GrabCutResult(inbox, [])

    z = img.pixels.astype(np.float64) / 255.0
    flat = z.reshape(-1, 3)
    pair_w = smoothness_weights(z, cfg.gamma)
    fg = inbox.copy()
    fg_gmm = GMM.fit(flat[fg.ravel()], kmeans(flat[fg.ravel()], cfg.gmm_components, cfg.seed))
    bg_gmm = GMM.fit(flat[~fg.ravel()], kmeans(flat[~fg.ravel()], cfg.gmm_components, derive_seed(cfg.seed, 1)))
    energies: list[float] = []
    for it in range(cfg.max_iterations):
        if it:
            fsel, bsel = fg.ravel(), ~fg.ravel()
            fg_gmm = GMM.fit(flat[fsel], fg_gmm.assign(flat[fsel]))
            bg_gmm = GMM.fit(flat[bsel], bg_gmm.assign(flat[bsel]))
        d_fg = fg_gmm.nll(flat).reshape(h, w)
        d_bg = bg_gmm.nll(flat).reshape(h, w)
        fg = _solve_cut(inbox, d_fg, d_bg, pair_w)
        energies.append(cut_energy(fg, d_fg, d_bg, pair_w))
        if not fg.any():
            break
        if it and energies[-2] - energies[-1] <= cfg.convergence_eps * abs(energies[-2]):
            break
    return GrabCutResult(fg, energies)


def grabcut_box(img: ImageRaster, box: LabeledBox, cfg: GrabCutConfig | None = None) -> np.ndarray:
    return grabcut(img, box, cfg).foreground


def pseudo_label(img: ImageRaster, boxes: list[LabeledBox], cfg: GrabCutConfig | None = None,
                 num_classes: int = 19) -> SegMask:
    """Paint each box's GrabCut foreground with its class, larger boxes first.

    Equal areas: the earlier box in ``boxes`` wins. Pixels claimed by no box get 255.
    """
    cfg = cfg or GrabCutConfig()
    out = np.full((img.height, img.width), IGNORE_LABEL, dtype=np.uint8)
    for b in boxes:
        if b.class_id >= num_classes:
            raise ReprShiftError(f"box class {b.class_id} out of range for {num_classes} classes")
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i].area, -i))
    for i in order:
        box_cfg = GrabCutConfig(cfg.gmm_components, cfg.max_iterations, cfg.gamma,
                                cfg.convergence_eps, derive_seed(cfg.seed, i))
        out[grabcut_box(img, boxes[i], box_cfg)] = boxes[i].class_id
    return SegMask(out, num_classes)
