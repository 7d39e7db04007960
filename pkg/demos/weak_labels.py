"""From masks to boxes and back.

Synthetic street scenes come with exact masks. Boxes are taken from the masks
by connected components, then turned back into pseudo-masks by GrabCut, and
the pseudo-masks are scored against the originals.

    python3 demos/weak_labels.py
"""
import numpy as np

from repshift import ComponentExtractionConfig, ConfusionMatrix, GrabCutConfig, accumulate, boxes_from_mask, miou
from repshift import SegMask, pseudo_label
from repshift.synthetic import CLASS_NAMES, street_scene

cfg = ComponentExtractionConfig(connectivity=8, min_area=64)
gc = GrabCutConfig(max_iterations=5, gamma=50.0, seed=0)
cm = ConfusionMatrix(len(CLASS_NAMES))

for seed in range(6):
    img, mask = street_scene(seed)
    boxes = boxes_from_mask(mask, cfg)
    pseudo = pseudo_label(img, boxes, gc, num_classes=len(CLASS_NAMES))
    labelled = (pseudo.labels != 255).mean()
    print(f"scene {seed}: {len(boxes)} boxes, {labelled:.0%} of pixels pseudo-labelled")
    # score only pixels that received a label
    gt = mask.labels.copy()
    gt[pseudo.labels == 255] = 255
    pred = np.where(pseudo.labels == 255, 0, pseudo.labels).astype(np.uint8)
    cm = accumulate(cm, SegMask(gt, mask.num_classes), SegMask(pred, mask.num_classes))

res = miou(cm)
for name, v in zip(CLASS_NAMES, res.per_class):
    print(f"  {name:10s} IoU {'n/a' if v is None else f'{v:.3f}'}")
print(f"pseudo-label mIoU on labelled pixels: {res.miou:.3f}")
