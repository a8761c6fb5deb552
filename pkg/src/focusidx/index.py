"""The persisted top-K index: class -> cluster postings + cluster records.

On-disk layout (versioned, checksummed, diffable):

    FOCUSIDX/1
    stream_id=<id>
    D=<dim>
    V=<vocab>
    n=<object count>
    <canonical config key=value lines>
    [CLUSTERS]
    cluster_id|centroid_member_id|centroid_csv|object_ids_csv|frame_ids_csv|class:bestrank,...
    [POSTINGS]
    class|cluster_ids_csv
    CRC32:<hex>

The OTHER class is stored as the reserved id V.  Centroids are printed
with 9 significant digits; a load/save round trip is byte-identical.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass

import numpy as np

from .clustering import Cluster
from .core import Config, encode_class, decode_class, format_config, parse_config
from .errors import (ChecksumMismatch, DataError, DuplicateClusterId,
                     FormatVersionMismatch, KxTooLarge)

_MAGIC = "FOCUSIDX/1"


@dataclass(frozen=True)
class IndexHeader:
    stream_id: str
    dim: int
    vocab: int
    n_objects: int
    config: Config

    @property
    def k(self) -> int:
        return self.config.k


@dataclass
class TopKIndex:
    header: IndexHeader
    clusters: dict[int, Cluster]
    postings: dict[int, list[int]]  # class -> sorted unique cluster ids

    def record_count(self) -> int:
        return len(self.clusters) + sum(len(v) for v in self.postings.values())


def build(clusters: list[Cluster], header: IndexHeader) -> TopKIndex:
    """Post each sealed cluster under every class in its class set."""
    by_id: dict[int, Cluster] = {}
    postings: dict[int, list[int]] = {}
    for c in clusters:
        if c.cluster_id in by_id:
            raise DuplicateClusterId(str(c.cluster_id))
        by_id[c.cluster_id] = c
        for class_id in c.class_best_rank:
            postings.setdefault(class_id, []).append(c.cluster_id)
    for class_id in postings:
        postings[class_id] = sorted(set(postings[class_id]))
    return TopKIndex(header=header, clusters=by_id, postings=postings)


def lookup(idx: TopKIndex, class_id: int, k_x: int | None = None) -> list[int]:
    """Cluster ids where `class_id` appears with best rank <= k_x."""
    k = idx.header.k
    if k_x is None:
        k_x = k
    if not 1 <= k_x <= k:
        raise KxTooLarge(f"k_x={k_x} outside [1, {k}]")
    ids = idx.postings.get(class_id, [])
    if k_x == k:
        return list(ids)
    return [c for c in ids if idx.clusters[c].class_best_rank[class_id] <= k_x]


# -- serialization ----------------------------------------------------------

def _csv_f(vec: np.ndarray) -> str:
    return ",".join(f"{x:.9g}" for x in vec)


def _csv_i(values) -> str:
    return ",".join(str(v) for v in values)


def _render(idx: TopKIndex) -> str:
    h = idx.header
    out = [
        _MAGIC,
        f"stream_id={h.stream_id}",
        f"D={h.dim}",
        f"V={h.vocab}",
        f"n={h.n_objects}",
        format_config(h.config).rstrip("\n"),
        "[CLUSTERS]",
    ]
    for cid in sorted(idx.clusters):
        c = idx.clusters[cid]
        ranks = ",".join(
            f"{encode_class(cls, h.vocab)}:{rank}"
            for cls, rank in sorted(c.class_best_rank.items(),
                                    key=lambda kv: encode_class(kv[0], h.vocab)))
        cmid = "" if c.centroid_member_id is None else str(c.centroid_member_id)
        out.append(f"{cid}|{cmid}|{_csv_f(c.centroid)}|"
                   f"{_csv_i(c.member_object_ids)}|{_csv_i(c.frame_ids)}|{ranks}")
    out.append("[POSTINGS]")
    for class_id in sorted(idx.postings, key=lambda c: encode_class(c, h.vocab)):
        out.append(f"{encode_class(class_id, h.vocab)}|{_csv_i(idx.postings[class_id])}")
    body = "\n".join(out) + "\n"
    crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    return body + f"CRC32:{crc:08x}\n"


def save(idx: TopKIndex, path) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    data = _render(idx)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def load(path) -> TopKIndex:
    with open(path, "r", encoding="utf-8") as fh:
        data = fh.read()
    head, nl, last = data.rstrip("\n").rpartition("\n")
    if not last.startswith("CRC32:"):
        raise ChecksumMismatch("missing CRC32 trailer")
    body = head + nl
    expect = last[len("CRC32:"):]
    actual = f"{zlib.crc32(body.encode('utf-8')) & 0xFFFFFFFF:08x}"
    if actual != expect:
        raise ChecksumMismatch(f"CRC mismatch: file says {expect}, computed {actual}")
    lines = body.splitlines()
    if not lines or lines[0] != _MAGIC:
        raise FormatVersionMismatch(f"index file must start with {_MAGIC}")

    kv = {}
    config_lines = []
    i = 1
    while i < len(lines) and lines[i] != "[CLUSTERS]":
        key, _, value = lines[i].partition("=")
        if key in ("stream_id", "D", "V", "n"):
            kv[key] = value
        else:
            config_lines.append(lines[i])
        i += 1
    if i >= len(lines):
        raise DataError("index file has no [CLUSTERS] section")
    try:
        vocab = int(kv["V"])
        header = IndexHeader(
            stream_id=kv["stream_id"],
            dim=int(kv["D"]),
            vocab=vocab,
            n_objects=int(kv["n"]),
            config=parse_config("\n".join(config_lines)),
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"bad index header: {exc}") from exc

    clusters: dict[int, Cluster] = {}
    i += 1
    while i < len(lines) and lines[i] != "[POSTINGS]":
        parts = lines[i].split("|")
        if len(parts) != 6:
            raise DataError(f"bad cluster record: {lines[i]!r}")
        cid = int(parts[0])
        if cid in clusters:
            raise DuplicateClusterId(str(cid))
        ranks = {}
        if parts[5]:
            for item in parts[5].split(","):
                cls, _, rank = item.partition(":")
                ranks[decode_class(int(cls), vocab)] = int(rank)
        clusters[cid] = Cluster(
            cluster_id=cid,
            centroid=np.array([float(x) for x in parts[2].split(",")]),
            member_object_ids=[int(x) for x in parts[3].split(",")],
            frame_ids=[int(x) for x in parts[4].split(",")],
            class_best_rank=ranks,
            centroid_member_id=None if parts[1] == "" else int(parts[1]),
            sealed=True,
        )
        i += 1
    if i >= len(lines):
        raise DataError("index file has no [POSTINGS] section")
    postings: dict[int, list[int]] = {}
    for line in lines[i + 1:]:
        cls, _, ids = line.partition("|")
        postings[decode_class(int(cls), vocab)] = [int(x) for x in ids.split(",")]
    return TopKIndex(header=header, clusters=clusters, postings=postings)
