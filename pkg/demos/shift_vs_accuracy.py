"""Does a larger representation shift mean lower accuracy?

A nearest-centroid colour segmenter is fit on clean synthetic street scenes,
then evaluated on corrupted copies. Each corruption setting yields one
(shift, mIoU) point; the points are regressed and plotted.

    python3 demos/shift_vs_accuracy.py [out.svg]
"""
import sys

import numpy as np

from repshift import AugmentationOp, ChannelMeanMatrix, ConfusionMatrix, build_filter_bank, miou, regress
from repshift import representation_shift
from repshift.evaluation import confusion, scatter_svg
from repshift.features import image_channel_means
from repshift.synthetic import NearestCentroidSegmenter, street_scene

scenes = [street_scene(s) for s in range(30)]
images = [im for im, _ in scenes]
masks = [m for _, m in scenes]
seg = NearestCentroidSegmenter(4).fit(images, masks)
bank = build_filter_bank(0)


def means(imgs):
    return ChannelMeanMatrix(np.stack([image_channel_means(bank, im) for im in imgs]))


clean = means(images)
points = []
for spec in ["color:strength=0.1", "color:strength=0.3", "color:strength=0.6",
             "frosted:radius=1", "frosted:radius=3", "frosted:radius=8",
             "poster:levels=8", "poster:levels=3", "poster:levels=2",
             "mural:radius=2,levels=8", "mural:radius=4,levels=3"]:
    op = AugmentationOp.parse(spec, seed=0)
    aug = [op.apply(im, seed=k) for k, im in enumerate(images)]
    r = representation_shift(clean, means(aug)).representation_shift
    cm = ConfusionMatrix(4)
    for im, m in zip(aug, masks):
        cm = cm + confusion(m, seg.predict(im), 4)
    points.append((r, miou(cm).miou))
    print(f"{spec:26s} R = {r:.5f}  mIoU = {points[-1][1]:.3f}")

fit = regress(points)
print(f"pearson r = {fit.pearson_r:.3f}, slope = {fit.slope:.2f}, intercept = {fit.intercept:.3f}")
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(scatter_svg(points, fit))
    print("plot written to", sys.argv[1])
