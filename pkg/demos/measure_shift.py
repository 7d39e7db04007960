"""How far does each corruption move a dataset?

Takes the bundled 50-photo fixture set as the "source" domain, corrupts a copy
with a ladder of augmentation settings and prints the representation shift R
of every corrupted copy against the clean photos.

    python3 demos/measure_shift.py
"""
import tempfile
from pathlib import Path

from repshift import AugmentationOp, apply_to_dataset, build_filter_bank, dataset_channel_means, load_dataset
from repshift import representation_shift

PHOTOS = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "photos"

photos = load_dataset(PHOTOS)
bank = build_filter_bank(seed=0)
print(bank.describe(), "receptive field", bank.receptive_field)

# one row of channel means per photo
clean = dataset_channel_means(bank, photos)
print("feature matrix:", clean.values.shape)

ladder = [
    "color:strength=0.2", "color:strength=0.6",
    "frosted:radius=1", "frosted:radius=4", "frosted:radius=16",
    "poster:levels=16", "poster:levels=4", "poster:levels=2",
    "mural:radius=3,levels=8",
]

with tempfile.TemporaryDirectory() as tmp:
    for spec in ladder:
        op = AugmentationOp.parse(spec, seed=0)
        shifted = apply_to_dataset(op, photos, None, Path(tmp) / spec.replace(":", "_"))
        rep = representation_shift(clean, dataset_channel_means(bank, shifted))
        worst = rep.per_channel_w.argmax()
        print(f"{spec:28s} R = {rep.representation_shift:.6f}   (largest channel {worst}: {rep.per_channel_w[worst]:.5f})")

# a dataset against itself: zero, exactly
print("self shift:", representation_shift(clean, clean).representation_shift)
