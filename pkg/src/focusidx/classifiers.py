"""Synthetic classifier profiles.

Real CNNs are replaced by a parametric rank model: the probability that
an object's true class appears within the top-k output follows

    p(k) = 1 - (1 - p1) * rho**(k - 1)

which reproduces the one property the indexing pipeline depends on (the
recall-vs-K curve), with controllable fidelity.  Filler classes below
the true class follow a fixed per-(seed, class) confusion ordering, the
way a real classifier confuses an object class with the same few
classes systematically rather than uniformly per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import OTHER_CLASS, DetectedObject, RankedClassification, encode_class, decode_class
from .errors import DataError, EmptyHistogram, MissingTrueClass

GROUND_TRUTH = "GROUND_TRUTH"
GENERIC_CHEAP = "GENERIC_CHEAP"
SPECIALIZED = "SPECIALIZED"

#: Paper-calibrated default cost units (GT normalized to ResNet152 = 58;
#: the generic cheap model is 8x cheaper; specialization a further 10x).
GT_COST = 58.0
GENERIC_COST = GT_COST / 8.0
SPECIALIZE_COST_FACTOR = 10.0
SPECIALIZE_RHO_FACTOR = 0.8

#: Weight-equivalent of a specialized model's dominant confusion: its
#: first filler is always OTHER (the grab-bag class absorbs most of the
#: residual confidence mass).
_CONF_DECAY = 0.99


@dataclass(frozen=True)
class RankModel:
    """Monotone inclusion curve p(k) = 1 - (1 - p1) * rho**(k-1)."""

    p1: float
    rho: float

    def __post_init__(self):
        if not 0 < self.p1 <= 1:
            raise DataError(f"p1={self.p1} outside (0, 1]")
        if not 0 <= self.rho < 1:
            raise DataError(f"rho={self.rho} outside [0, 1)")

    def inclusion(self, k: int) -> float:
        return 1.0 - (1.0 - self.p1) * self.rho ** (k - 1)

    def rank_from_uniform(self, u: float, output_length: int) -> int:
        """Smallest k with p(k) >= u, capped at the output length.

        The cap guarantees inclusion reaches 1.0 at full output length.
        """
        if u <= self.p1 or output_length == 1:
            return 1
        if self.rho == 0.0:
            return min(2, output_length)
        k = 2 + math.floor(math.log((1.0 - u) / (1.0 - self.p1)) / math.log(self.rho))
        k = max(k, 2)
        return min(k, output_length)


@dataclass(frozen=True)
class ClassifierProfile:
    profile_id: str
    kind: str
    vocab: int
    rank_model: RankModel
    cost_units: float
    feature_noise_sigma: float = 0.0
    class_set: tuple[int, ...] | None = None  # SPECIALIZED only; includes OTHER_CLASS

    def __post_init__(self):
        if self.kind == SPECIALIZED:
            if self.class_set is None or OTHER_CLASS not in self.class_set:
                raise DataError("specialized profile needs a class_set containing OTHER")
        elif self.class_set is not None:
            raise DataError("class_set is only valid for SPECIALIZED profiles")
        if self.cost_units <= 0:
            raise DataError("cost_units must be positive")

    @property
    def output_length(self) -> int:
        return len(self.class_set) if self.class_set is not None else self.vocab

    @property
    def l_s(self) -> int:
        """Number of real classes a specialized profile distinguishes."""
        if self.class_set is None:
            return self.vocab
        return len(self.class_set) - 1

    def map_class(self, class_id: int) -> int:
        """Map a true class into this profile's output space."""
        if self.class_set is not None and class_id not in self.class_set:
            return OTHER_CLASS
        return class_id


@lru_cache(maxsize=4096)
def _confusion_order(kind: str, vocab: int, class_set: tuple[int, ...] | None,
                     seed: int, emitted_true: int) -> tuple[int, ...]:
    """Fixed filler ordering for one (profile shape, stream seed, class)."""
    rng = np.random.default_rng([seed, 0x0C0F, emitted_true + 1])
    if class_set is None:
        pool = np.arange(vocab)
        pool = pool[pool != emitted_true]
        return tuple(pool[rng.permutation(pool.size)].tolist())
    rest = np.array([c for c in class_set if c != emitted_true and c != OTHER_CLASS])
    tail = tuple(rest[rng.permutation(rest.size)].tolist())
    if emitted_true == OTHER_CLASS:
        return tail
    return (OTHER_CLASS,) + tail


def true_class_rank(profile: ClassifierProfile, obj: DetectedObject, rng_seed: int) -> int:
    """Rank at which classify() places the (mapped) true class."""
    if obj.true_class is None:
        raise MissingTrueClass(f"object {obj.object_id} has no true class")
    if profile.kind == GROUND_TRUTH:
        return 1
    rng = np.random.default_rng([rng_seed, obj.object_id, 0])
    return profile.rank_model.rank_from_uniform(rng.random(), profile.output_length)


def classify(profile: ClassifierProfile, obj: DetectedObject,
             rng_seed: int) -> RankedClassification:
    """Pure function of (profile, object, seed): rank the (mapped) true
    class per the rank model, fill the rest from the confusion ordering,
    and return the object's feature perturbed by the profile's noise.
    """
    rank = true_class_rank(profile, obj, rng_seed)
    emitted_true = profile.map_class(obj.true_class)
    fillers = _confusion_order(profile.kind, profile.vocab, profile.class_set,
                               rng_seed, emitted_true)
    classes = fillers[: rank - 1] + (emitted_true,) + fillers[rank - 1:]
    conf = 0.9 * np.power(_CONF_DECAY, np.arange(len(classes)))
    feature = extract_feature(profile, obj, rng_seed)
    return RankedClassification(tuple(zip(classes, conf.tolist())), feature)


def extract_feature(profile: ClassifierProfile, obj: DetectedObject,
                    rng_seed: int) -> np.ndarray:
    sigma = profile.feature_noise_sigma
    if sigma == 0.0:
        return obj.feature.copy()
    rng = np.random.default_rng([rng_seed, obj.object_id, 1])
    return obj.feature + sigma * rng.standard_normal(obj.feature.shape[0])


def ground_truth_label(obj: DetectedObject) -> int:
    """Top-1 of the ground-truth classifier; deterministic."""
    if obj.true_class is None:
        raise MissingTrueClass(f"object {obj.object_id} has no true class")
    return obj.true_class


def specialize_profile(base: ClassifierProfile, class_histogram: dict[int, int],
                       l_s: int,
                       cost_factor: float = SPECIALIZE_COST_FACTOR,
                       rho_factor: float = SPECIALIZE_RHO_FACTOR) -> ClassifierProfile:
    """Specialize `base` to the l_s most frequent classes plus OTHER.

    Ties on count break toward the smaller class id.  Specialization
    tightens the rank model (smaller rho) and divides the cost by
    `cost_factor`.
    """
    if not class_histogram:
        raise EmptyHistogram("cannot specialize on an empty class histogram")
    if l_s < 1:
        raise DataError(f"l_s={l_s} must be >= 1")
    ordered = sorted(class_histogram.items(), key=lambda kv: (-kv[1], kv[0]))
    top = tuple(sorted(c for c, _ in ordered[:l_s]))
    return ClassifierProfile(
        profile_id=f"{base.profile_id}+spec{l_s}",
        kind=SPECIALIZED,
        vocab=base.vocab,
        rank_model=RankModel(base.rank_model.p1, base.rank_model.rho * rho_factor),
        cost_units=base.cost_units / cost_factor,
        feature_noise_sigma=base.feature_noise_sigma,
        class_set=top + (OTHER_CLASS,),
    )


# -- registry file ----------------------------------------------------------

_PROF_MAGIC = "FOCUSPROF/1"


def make_default_profiles(vocab: int = 1000) -> dict[str, ClassifierProfile]:
    gt = ClassifierProfile("gt", GROUND_TRUTH, vocab, RankModel(1.0, 0.0), GT_COST)
    cheap = ClassifierProfile("cheap", GENERIC_CHEAP, vocab, RankModel(0.7, 0.95),
                              GENERIC_COST, feature_noise_sigma=0.05)
    return {p.profile_id: p for p in (gt, cheap)}


def format_profiles(profiles: dict[str, ClassifierProfile]) -> str:
    blocks = [_PROF_MAGIC]
    for pid in sorted(profiles):
        p = profiles[pid]
        lines = [
            f"id={p.profile_id}",
            f"kind={p.kind}",
            f"vocab={p.vocab}",
            f"p1={p.rank_model.p1:.9g}",
            f"rho={p.rank_model.rho:.9g}",
            f"cost_units={p.cost_units:.9g}",
            f"feature_noise_sigma={p.feature_noise_sigma:.9g}",
        ]
        if p.class_set is not None:
            enc = ",".join(str(encode_class(c, p.vocab)) for c in p.class_set)
            lines.append(f"class_set={enc}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def parse_profiles(text: str) -> dict[str, ClassifierProfile]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _PROF_MAGIC:
        raise DataError(f"profile registry must start with {_PROF_MAGIC}")
    profiles: dict[str, ClassifierProfile] = {}
    block: dict[str, str] = {}

    def flush():
        if not block:
            return
        try:
            vocab = int(block["vocab"])
            class_set = None
            if "class_set" in block:
                class_set = tuple(decode_class(int(c), vocab)
                                  for c in block["class_set"].split(","))
            profile = ClassifierProfile(
                profile_id=block["id"],
                kind=block["kind"],
                vocab=vocab,
                rank_model=RankModel(float(block["p1"]), float(block["rho"])),
                cost_units=float(block["cost_units"]),
                feature_noise_sigma=float(block.get("feature_noise_sigma", "0")),
                class_set=class_set,
            )
        except KeyError as exc:
            raise DataError(f"profile block missing key {exc}") from exc
        except ValueError as exc:
            raise DataError(f"bad profile value: {exc}") from exc
        if profile.profile_id in profiles:
            raise DataError(f"duplicate profile id {profile.profile_id!r}")
        profiles[profile.profile_id] = profile
        block.clear()

    for line in lines[1:]:
        line = line.strip()
        if not line:
            flush()
            continue
        key, _, value = line.partition("=")
        block[key.strip()] = value.strip()
    flush()
    return profiles


def save_profiles(profiles: dict[str, ClassifierProfile], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_profiles(profiles))


def load_profiles(path) -> dict[str, ClassifierProfile]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profiles(fh.read())
