"""Manufacture a target dataset whose shift lands in a chosen interval.

The first half of the fixture photos plays the source domain and the second
half the target. A list of candidate ops is scanned in order and the first one
whose shift falls strictly inside (a - delta, a + delta) is kept.

    python3 demos/construct_dataset.py
"""
import shutil
import tempfile
from pathlib import Path

from repshift import ShiftInterval, build_filter_bank, construct_dataset, dataset_channel_means, load_dataset
from repshift import parse_ops, representation_shift

PHOTOS = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "photos"

work = Path(tempfile.mkdtemp())
for name in ("src", "tgt"):
    (work / name).mkdir()
for k, p in enumerate(sorted(PHOTOS.glob("*.png"))):
    shutil.copy(p, work / ("src" if k % 2 == 0 else "tgt") / p.name)

src, tgt = load_dataset(work / "src"), load_dataset(work / "tgt")
bank = build_filter_bank(0)
src_means = dataset_channel_means(bank, src)
baseline = representation_shift(src_means, dataset_channel_means(bank, tgt)).representation_shift
print(f"{len(src)} source / {len(tgt)} target photos, baseline R = {baseline:.6f}")

ops = parse_ops("color:strength=0.1;frosted:radius=2;poster:levels=4;frosted:radius=8;poster:levels=2")

# ask for a dataset about 12% further from the source than the raw target
interval = ShiftInterval(1.12 * baseline, 0.05 * baseline)
print(f"interval: ({interval.a - interval.delta:.6f}, {interval.a + interval.delta:.6f})")
report = construct_dataset(interval, src, tgt, ops, bank, work / "out", source_features=src_means)
for t in report.attempts:
    print(f"  {t.op:22s} R = {t.representation_shift:.6f}  {'<- accepted' if t.accepted else ''}")
print("status:", report.status, "| selected:", report.selected)

# an interval nothing can reach
report = construct_dataset(ShiftInterval(1.0, 0.1), src, tgt, ops[:2], bank, work / "none", source_features=src_means)
print("unreachable interval ->", report.status, report.selected)

shutil.rmtree(work)
