"""Shift-targeted dataset construction.

Scans an ordered list of augmentation ops, applies each to the target dataset
and keeps the first candidate whose representation shift against the source
falls strictly inside ``(a - delta, a + delta)``.
"""
from __future__ import annotations

import json
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .augment import AugmentationOp, apply_to_dataset
from .core import ChannelMeanMatrix, DatasetHandle, ReprShiftError
from .features import FilterBank, dataset_channel_means
from .shift import representation_shift

log = logging.getLogger(__name__)

FOUND = "found"
NOT_FOUND = "not_found"
RETURNED_LAST = "returned_last"


@dataclass(frozen=True)
class ShiftInterval:
    a: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ReprShiftError(f"interval half-width must be > 0, got {self.delta}")

    def __contains__(self, r) -> bool:
        return r is not None and self.a - self.delta < r < self.a + self.delta

    @classmethod
    def parse(cls, text: str) -> "ShiftInterval":
        try:
            a, delta = (float(t) for t in text.split(","))
        except ValueError:
            raise ReprShiftError(f"interval must be 'A,DELTA', got {text!r}") from None
        return cls(a, delta)


@dataclass
class Attempt:
    op: str
    representation_shift: float | None
    accepted: bool
    error: str | None = None


@dataclass
class ConstructionReport:
    interval: ShiftInterval
    attempts: list[Attempt] = field(default_factory=list)
    selected: str | None = None
    output_root: str | None = None
    status: str = NOT_FOUND

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "interval": {"a": self.interval.a, "delta": self.interval.delta},
            "attempts": [
                {"op": t.op, "representation_shift": t.representation_shift, "accepted": t.accepted,
                 **({"error": t.error} if t.error else {})}
                for t in self.attempts
            ],
            "selected": self.selected,
            "output_root": self.output_root,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _move_contents(src: Path, dst: Path) -> None:
    for p in sorted(src.iterdir()):
        target = dst / p.name
        if target.exists():
            target.unlink()
        p.replace(target)
    src.rmdir()


def construct_dataset(interval: ShiftInterval, src: DatasetHandle, tgt: DatasetHandle,
                      ops: list[AugmentationOp], bank: FilterBank, out_root,
                      *, return_last: bool = False, source_features: ChannelMeanMatrix | None = None,
                      jobs: int = 1) -> ConstructionReport:
    """Run the first-match search and persist the selected candidate's images in ``out_root``.

    Rejected candidates are deleted. With ``return_last`` the final candidate is kept
    when nothing qualifies (status ``returned_last``), mirroring a loop that exits
    without a hit and returns whatever it built last.
    """
    if not ops:
        raise ReprShiftError("construction needs at least one augmentation op")
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    src_means = source_features if source_features is not None else dataset_channel_means(bank, src, jobs)
    report = ConstructionReport(interval)
    last_dir, last_desc = None, None

    for i, op in enumerate(ops):
        cand_dir = out_root / f".candidate-{i}"
        if cand_dir.exists():
            shutil.rmtree(cand_dir)
        desc = op.describe()
        try:
            cand = apply_to_dataset(op, tgt, src, cand_dir, jobs)
            r = representation_shift(dataset_channel_means(bank, cand, jobs), src_means).representation_shift
        except (ReprShiftError, OSError) as exc:
            log.warning("op %d (%s) failed: %s", i + 1, desc, exc)
            report.attempts.append(Attempt(desc, None, False, str(exc)))
            shutil.rmtree(cand_dir, ignore_errors=True)
            continue
        hit = r in interval
        log.info("op %d (%s): R=%.6g %s", i + 1, desc, r, "accepted" if hit else "rejected")
        report.attempts.append(Attempt(desc, r, hit))
        if last_dir is not None:
            shutil.rmtree(last_dir, ignore_errors=True)
            last_dir = None
        if hit:
            _move_contents(cand_dir, out_root)
            report.selected, report.output_root, report.status = desc, str(out_root), FOUND
            return report
        if return_last:
            last_dir, last_desc = cand_dir, desc
        else:
            shutil.rmtree(cand_dir)

    if return_last and last_dir is not None:
        _move_contents(last_dir, out_root)
        report.selected = last_desc
        report.output_root, report.status = str(out_root), RETURNED_LAST
    return report
