"""Shared domain types: objects, classifications, cost model, config.

Class ids are plain non-negative ints indexing a vocabulary of size V.
The catch-all class of specialized classifiers is the sentinel
``OTHER_CLASS`` (-1 in memory); on disk it is written as the reserved
id V, one past the vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, KOutOfRange, NonPositiveM, UnknownProfile

#: Sentinel class id for "none of the specialized classes".
OTHER_CLASS = -1

#: Default feature dimension for synthetic streams.
DEFAULT_DIM = 64


def encode_class(class_id: int, vocab: int) -> int:
    """Map the in-memory class id to its serialized form (OTHER -> V)."""
    return vocab if class_id == OTHER_CLASS else class_id


def decode_class(raw: int, vocab: int) -> int:
    if raw == vocab:
        return OTHER_CLASS
    if not 0 <= raw < vocab:
        raise DataError(f"class id {raw} outside vocabulary [0, {vocab}]")
    return raw


@dataclass(frozen=True)
class DetectedObject:
    """One moving-object detection extracted from a video frame.

    ``true_class`` is simulation ground truth only; ingest and query
    logic never read it (the ground-truth classifier does).
    """

    object_id: int
    frame_id: int
    timestamp_s: float
    pixel_signature: np.ndarray
    feature: np.ndarray
    true_class: int | None = None


@dataclass(frozen=True)
class RankedClassification:
    """Classes in descending confidence order plus the extracted feature."""

    ranked: tuple[tuple[int, float], ...]
    feature: np.ndarray

    def top(self, k: int) -> "RankedClassification":
        return RankedClassification(self.ranked[:k], self.feature)

    def classes(self) -> list[int]:
        return [c for c, _ in self.ranked]


@dataclass(frozen=True)
class CostModel:
    """Abstract GPU-cost units: inference count x per-profile unit cost."""

    cost_per_inference: dict[str, float]
    gt_cost: float

    def __post_init__(self):
        for pid, cost in self.cost_per_inference.items():
            if cost <= 0:
                raise DataError(f"profile {pid!r} has non-positive cost")
            if cost > self.gt_cost:
                raise DataError(
                    f"profile {pid!r} costs {cost} > ground-truth cost {self.gt_cost}"
                )


@dataclass(frozen=True)
class AccuracyTarget:
    precision_target: float = 0.95
    recall_target: float = 0.95


@dataclass(frozen=True)
class Config:
    """The tunable knobs of one ingest/query deployment.

    k       -- classes indexed per object (top-K)
    l_s     -- class count of the specialized classifier (vocabulary size
               when the profile is not specialized)
    t       -- L2 threshold for joining an existing cluster
    m       -- cap on simultaneously live clusters
    """

    profile_id: str
    k: int
    l_s: int
    t: float
    m: int
    targets: AccuracyTarget = field(default_factory=AccuracyTarget)

    def sort_key(self):
        return (self.profile_id, self.l_s, self.k, self.t, self.m)


def validate_config(cfg: Config, profile_registry) -> Config:
    """Check cfg against its classifier profile; returns cfg unchanged."""
    if cfg.profile_id not in profile_registry:
        raise UnknownProfile(cfg.profile_id)
    profile = profile_registry[cfg.profile_id]
    if not 1 <= cfg.k <= profile.output_length:
        raise KOutOfRange(
            f"k={cfg.k} outside [1, {profile.output_length}] for profile {cfg.profile_id!r}"
        )
    if cfg.m < 1:
        raise NonPositiveM(f"m={cfg.m}")
    if cfg.t < 0:
        raise DataError(f"t={cfg.t} must be non-negative")
    if cfg.l_s < 1:
        raise DataError(f"l_s={cfg.l_s} must be positive")
    return cfg


# -- canonical config text form --------------------------------------------

_CONFIG_KEYS = ("profile", "k", "l_s", "t", "m", "precision_target", "recall_target")


def format_config(cfg: Config) -> str:
    """Canonical key=value text form; round-trips bit-exactly."""
    lines = [
        f"profile={cfg.profile_id}",
        f"k={cfg.k}",
        f"l_s={cfg.l_s}",
        f"t={cfg.t:.6f}",
        f"m={cfg.m}",
        f"precision_target={cfg.targets.precision_target:.6f}",
        f"recall_target={cfg.targets.recall_target:.6f}",
    ]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> Config:
    kv = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"bad config line: {line!r}")
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    missing = [k for k in _CONFIG_KEYS if k not in kv]
    if missing:
        raise DataError(f"config missing keys: {missing}")
    try:
        return Config(
            profile_id=kv["profile"],
            k=int(kv["k"]),
            l_s=int(kv["l_s"]),
            t=float(kv["t"]),
            m=int(kv["m"]),
            targets=AccuracyTarget(
                precision_target=float(kv["precision_target"]),
                recall_target=float(kv["recall_target"]),
            ),
        )
    except ValueError as exc:
        raise DataError(f"bad config value: {exc}") from exc


def save_config(cfg: Config, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_config(cfg))


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_targets(cfg: Config, targets: AccuracyTarget) -> Config:
    return replace(cfg, targets=targets)
