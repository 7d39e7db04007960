"""Representation-shift measurement between image datasets.

Channel-mean activations per image, per-channel exact Wasserstein-1 distances
averaged into a single shift score, augmentation operators for manufacturing
shifted target datasets, a first-match construction search over those
operators, and the weak-label and evaluation tooling around them.
"""
__version__ = "0.1.0"

from .augment import (
    AugmentationOp, apply_to_dataset, color_augment, frosted_glass, lowfreq_exchange, mural, parse_ops, poster,
)
from .construct import ConstructionReport, ShiftInterval, construct_dataset
from .core import (
    ChannelMeanMatrix, DatasetHandle, ImageRaster, LabeledBox, ReprShiftError, SegMask, load_dataset,
    read_boxes, read_feature_dump, read_image, read_mask, write_boxes, write_feature_dump, write_image, write_mask,
)
from .evaluation import ConfusionMatrix, RegressionResult, accumulate, miou, regress
from .features import FilterBank, FilterBankConfig, build_filter_bank, channel_means, dataset_channel_means, extract
from .shift import ShiftReport, representation_shift, wasserstein1
from .weaklabel import (
    ComponentExtractionConfig, GrabCutConfig, boxes_from_mask, grabcut, grabcut_box, pseudo_label,
)

__all__ = [
    "AugmentationOp", "apply_to_dataset", "color_augment", "frosted_glass", "lowfreq_exchange", "mural", "parse_ops",
    "poster",
    "ConstructionReport", "ShiftInterval", "construct_dataset",
    "ChannelMeanMatrix", "DatasetHandle", "ImageRaster", "LabeledBox", "ReprShiftError", "SegMask", "load_dataset",
    "read_boxes", "read_feature_dump", "read_image", "read_mask", "write_boxes", "write_feature_dump", "write_image",
    "write_mask",
    "ConfusionMatrix", "RegressionResult", "accumulate", "miou", "regress",
    "FilterBank", "FilterBankConfig", "build_filter_bank", "channel_means", "dataset_channel_means", "extract",
    "ShiftReport", "representation_shift", "wasserstein1",
    "ComponentExtractionConfig", "GrabCutConfig", "boxes_from_mask", "grabcut", "grabcut_box", "pseudo_label",
]
