"""``repshift`` command-line entry point.

Exit codes: 0 success, 1 domain error (bad data, construction not found),
2 usage error. With ``--json`` stdout carries exactly one JSON document;
diagnostics always go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .augment import AugmentationOp, apply_to_dataset, parse_ops
from .construct import NOT_FOUND, ShiftInterval, construct_dataset
from .core import (
    ChannelMeanMatrix, ReprShiftError, check_paired, group_boxes, load_dataset, read_boxes,
    read_feature_dump, read_image, read_mask, write_boxes, write_feature_dump, write_mask,
)
from .evaluation import ConfusionMatrix, confusion, miou, regress, scatter_svg
from .features import FilterBankConfig, build_filter_bank, dataset_channel_means
from .shift import representation_shift
from .weaklabel import ComponentExtractionConfig, GrabCutConfig, boxes_from_mask, pseudo_label

log = logging.getLogger("repshift")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    return vals


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0, help="global seed (default 0)")
    common.add_argument("--jobs", type=_positive, default=os.cpu_count() or 1, help="worker count")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on stderr")
    common.add_argument("--json", action="store_true", help="print the result as one JSON document")

    p = argparse.ArgumentParser(prog="repshift", description="Measure and manufacture representation shift between image datasets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("extract-features", parents=[common], help="channel-mean activations of an image directory")
    s.add_argument("--input", required=True, type=Path)
    s.add_argument("--output", required=True, type=Path)
    s.add_argument("--layers", type=_positive)
    s.add_argument("--channels", type=_int_list, default=(32, 64))
    s.add_argument("--kernel-size", type=int, default=3)
    s.add_argument("--stride", type=int, default=2)

    s = sub.add_parser("shift", parents=[common], help="representation shift between two feature dumps")
    s.add_argument("--source", required=True, type=Path, help="feature dump (or image directory)")
    s.add_argument("--target", required=True, type=Path, help="feature dump (or image directory)")

    s = sub.add_parser("augment", parents=[common], help="apply one augmentation op to a dataset")
    s.add_argument("--op", required=True)
    s.add_argument("--input", required=True, type=Path)
    s.add_argument("--ref", type=Path, help="source-domain images (needed by lowfreq)")
    s.add_argument("--output", required=True, type=Path)

    s = sub.add_parser("construct", parents=[common], help="first-match search for a target shift interval")
    s.add_argument("--interval", required=True, help="A,DELTA")
    s.add_argument("--source", required=True, type=Path)
    s.add_argument("--target", required=True, type=Path)
    s.add_argument("--ops", required=True, help='"SPEC;SPEC;..."')
    s.add_argument("--output", required=True, type=Path)
    s.add_argument("--return-last", action="store_true", help="keep the last candidate when nothing qualifies")
    s.add_argument("--features-from", type=Path, help="precomputed source feature dump")

    s = sub.add_parser("boxes-from-masks", parents=[common], help="class-wise connected-component boxes")
    s.add_argument("--masks", required=True, type=Path)
    s.add_argument("--output", required=True, type=Path)
    s.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    s.add_argument("--min-area", type=_positive, default=64)
    s.add_argument("--classes", type=_positive, default=19)

    s = sub.add_parser("pseudo-labels", parents=[common], help="GrabCut pseudo-masks from boxes")
    s.add_argument("--images", required=True, type=Path)
    s.add_argument("--boxes", required=True, type=Path)
    s.add_argument("--output", required=True, type=Path)
    s.add_argument("--iters", type=_positive, default=5)
    s.add_argument("--gamma", type=float, default=50.0)
    s.add_argument("--components", type=_positive, default=5)
    s.add_argument("--classes", type=_positive, default=19)

    s = sub.add_parser("miou", parents=[common], help="mean IoU of predicted masks against ground truth")
    s.add_argument("--gt", required=True, type=Path)
    s.add_argument("--pred", required=True, type=Path)
    s.add_argument("--classes", type=_positive, default=19)
    s.add_argument("--absent-as-zero", action="store_true", help="count classes absent from GT and prediction as IoU 0")

    s = sub.add_parser("correlate", parents=[common], help="regress mIoU on representation shift")
    s.add_argument("--pairs", required=True, type=Path, help="CSV with columns shift,miou")
    s.add_argument("--plot", type=Path, help="write an SVG scatter plot")
    return p


def _emit(args, payload: dict, summary: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=False) + "\n")
    else:
        sys.stdout.write(summary.rstrip("\n") + "\n")


def _means_from(path: Path, args) -> ChannelMeanMatrix:
    if path.is_dir():
        return dataset_channel_means(build_filter_bank(args.seed), load_dataset(path), args.jobs)
    return read_feature_dump(path)


def cmd_extract_features(args) -> int:
    if args.layers is not None and args.layers != len(args.channels):
        raise _UsageError(f"--layers {args.layers} does not match --channels {','.join(map(str, args.channels))}")
    cfg = FilterBankConfig(tuple(args.channels), args.kernel_size, args.stride)
    bank = build_filter_bank(args.seed, cfg)
    m = dataset_channel_means(bank, load_dataset(args.input), args.jobs)
    write_feature_dump(m, args.output)
    _emit(args, {"output": str(args.output), "n_images": m.n_images, "n_channels": m.n_channels,
                 "tag": m.source_tag},
          f"wrote {m.n_images} x {m.n_channels} channel means to {args.output}")
    return 0


def cmd_shift(args) -> int:
    rep = representation_shift(_means_from(args.source, args), _means_from(args.target, args))
    _emit(args, rep.to_dict(), f"representation shift R = {rep.representation_shift:.6g} over {rep.n_channels} channels")
    return 0


def cmd_augment(args) -> int:
    op = AugmentationOp.parse(args.op, args.seed)
    ref = load_dataset(args.ref) if args.ref is not None else None
    out = apply_to_dataset(op, load_dataset(args.input), ref, args.output, args.jobs)
    _emit(args, {"op": op.describe(), "output": str(args.output), "n_images": len(out)},
          f"{op.describe()}: wrote {len(out)} images to {args.output}")
    return 0


def cmd_construct(args) -> int:
    interval = ShiftInterval.parse(args.interval)
    ops = parse_ops(args.ops, args.seed)
    src_feats = read_feature_dump(args.features_from) if args.features_from else None
    report = construct_dataset(
        interval, load_dataset(args.source), load_dataset(args.target), ops, build_filter_bank(args.seed),
        args.output, return_last=args.return_last, source_features=src_feats, jobs=args.jobs,
    )
    lines = [f"{t.op}: R={t.representation_shift} {'accepted' if t.accepted else 'rejected'}" for t in report.attempts]
    lines.append(f"status: {report.status}; selected: {report.selected}")
    _emit(args, report.to_dict(), "\n".join(lines))
    if report.status == NOT_FOUND:
        print("error: no op produced a shift inside the interval", file=sys.stderr)
        return 1
    return 0


def cmd_boxes_from_masks(args) -> int:
    ds = load_dataset(args.masks, "masks")
    cfg = ComponentExtractionConfig(args.connectivity, args.min_area)

    def one(i):
        return [(ds.entries[i], b) for b in boxes_from_mask(read_mask(ds.path(i), args.classes), cfg)]

    with ThreadPoolExecutor(args.jobs) as pool:
        boxes = [b for chunk in pool.map(one, range(len(ds))) for b in chunk]
    write_boxes(args.output, boxes)
    _emit(args, {"output": str(args.output), "n_images": len(ds), "n_boxes": len(boxes)},
          f"wrote {len(boxes)} boxes from {len(ds)} masks to {args.output}")
    return 0


def _pseudo_one(path: str, boxes, cfg: GrabCutConfig, num_classes: int, out_path: str) -> None:
    write_mask(pseudo_label(read_image(path), boxes, cfg, num_classes), out_path)


def cmd_pseudo_labels(args) -> int:
    ds = load_dataset(args.images)
    grouped = group_boxes(read_boxes(args.boxes))
    unknown = sorted(set(grouped) - set(ds.entries))
    if unknown:
        raise ReprShiftError(f"boxes reference unknown image stems: {unknown[:5]}")
    cfg = GrabCutConfig(args.components, args.iters, args.gamma, seed=args.seed)
    args.output.mkdir(parents=True, exist_ok=True)
    jobs = [(str(ds.path(i)), grouped.get(stem, []), cfg, args.classes, str(args.output / f"{stem}.png"))
            for i, stem in enumerate(ds.entries)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(args.jobs, len(jobs))) as pool:
            list(pool.map(_pseudo_one, *zip(*jobs)))
    else:
        for j in jobs:
            _pseudo_one(*j)
    _emit(args, {"output": str(args.output), "n_images": len(ds)},
          f"wrote {len(ds)} pseudo-masks to {args.output}")
    return 0


def cmd_miou(args) -> int:
    gt, pred = load_dataset(args.gt, "masks"), load_dataset(args.pred, "masks")
    check_paired(gt, pred)

    def one(i):
        stem = gt.entries[i]
        try:
            return confusion(read_mask(gt.path(i), args.classes), read_mask(pred.path(i), args.classes), args.classes)
        except ReprShiftError as exc:
            raise ReprShiftError(f"{stem}: {exc}") from None

    cm = ConfusionMatrix(args.classes)
    with ThreadPoolExecutor(args.jobs) as pool:
        for part in pool.map(one, range(len(gt))):
            cm = cm + part
    res = miou(cm, args.absent_as_zero)
    _emit(args, res.to_dict(), f"mIoU = {res.miou:.6f} over {len(res.evaluated_classes)} classes")
    return 0


def read_pairs(path: Path) -> list[tuple[float, float]]:
    pts = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ReprShiftError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                pts.append((float(row[0]), float(row[1])))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ReprShiftError(f"{path}:{lineno}: non-numeric row {row}") from None
    return pts


def cmd_correlate(args) -> int:
    pts = read_pairs(args.pairs)
    fit = regress(pts)
    if args.plot:
        args.plot.write_text(scatter_svg(pts, fit), encoding="utf-8")
    _emit(args, fit.to_dict(),
          f"n={fit.n_points} pearson_r={fit.pearson_r:.6f} slope={fit.slope:.6g} intercept={fit.intercept:.6g}")
    return 0


class _UsageError(Exception):
    pass


COMMANDS = {
    "extract-features": cmd_extract_features,
    "shift": cmd_shift,
    "augment": cmd_augment,
    "construct": cmd_construct,
    "boxes-from-masks": cmd_boxes_from_masks,
    "pseudo-labels": cmd_pseudo_labels,
    "miou": cmd_miou,
    "correlate": cmd_correlate,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"repshift {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ReprShiftError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
