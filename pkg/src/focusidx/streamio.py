"""Line-delimited detected-object stream files.

Layout:

    FOCUSSTREAM/1
    stream_id=<id>
    fps=<float>
    D=<feature dim>
    S=<pixel signature dim>
    V=<vocabulary size>
    [OBJECTS]
    object_id|frame_id|true_class|pixel_signature_csv|feature_csv

`true_class` is empty for unlabeled objects.  Floats use 9 significant
digits, which round-trips the format bit-exactly on re-write.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DetectedObject, decode_class, encode_class
from .errors import DataError, FormatVersionMismatch

_MAGIC = "FOCUSSTREAM/1"


@dataclass(frozen=True)
class StreamHeader:
    stream_id: str
    fps: float
    dim: int
    sig_dim: int
    vocab: int


def _csv(vec: np.ndarray) -> str:
    return ",".join(f"{x:.9g}" for x in vec)


def write_stream(path, header: StreamHeader, objects) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{_MAGIC}\n")
        fh.write(f"stream_id={header.stream_id}\n")
        fh.write(f"fps={header.fps:.9g}\n")
        fh.write(f"D={header.dim}\n")
        fh.write(f"S={header.sig_dim}\n")
        fh.write(f"V={header.vocab}\n")
        fh.write("[OBJECTS]\n")
        for obj in objects:
            cls = "" if obj.true_class is None else str(encode_class(obj.true_class, header.vocab))
            fh.write(f"{obj.object_id}|{obj.frame_id}|{cls}|"
                     f"{_csv(obj.pixel_signature)}|{_csv(obj.feature)}\n")


def read_stream(path) -> tuple[StreamHeader, list[DetectedObject]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise FormatVersionMismatch(f"stream file must start with {_MAGIC}")
    kv = {}
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        if line == "[OBJECTS]":
            body_start = i + 1
            break
        key, _, value = line.partition("=")
        kv[key] = value
    if body_start is None:
        raise DataError("stream file has no [OBJECTS] section")
    try:
        header = StreamHeader(
            stream_id=kv["stream_id"],
            fps=float(kv["fps"]),
            dim=int(kv["D"]),
            sig_dim=int(kv["S"]),
            vocab=int(kv["V"]),
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"bad stream header: {exc}") from exc

    objects = []
    prev_oid = None
    prev_frame = None
    for line in lines[body_start:]:
        if not line:
            continue
        parts = line.split("|")
        if len(parts) != 5:
            raise DataError(f"bad object record: {line!r}")
        oid = int(parts[0])
        frame = int(parts[1])
        true_class = None if parts[2] == "" else decode_class(int(parts[2]), header.vocab)
        sig = np.array([float(x) for x in parts[3].split(",")])
        feat = np.array([float(x) for x in parts[4].split(",")])
        if sig.shape[0] != header.sig_dim or feat.shape[0] != header.dim:
            raise DataError(f"object {oid}: vector length mismatch with header")
        if prev_oid is not None and oid <= prev_oid:
            raise DataError(f"object ids must strictly increase (at {oid})")
        if prev_frame is not None and frame < prev_frame:
            raise DataError(f"frame ids must be non-decreasing (at object {oid})")
        prev_oid, prev_frame = oid, frame
        objects.append(DetectedObject(
            object_id=oid,
            frame_id=frame,
            timestamp_s=frame / header.fps,
            pixel_signature=sig,
            feature=feat,
            true_class=true_class,
        ))
    return header, objects
