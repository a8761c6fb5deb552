import numpy as np
import pytest

from focusidx.core import OTHER_CLASS
from focusidx.errors import DataError, FormatVersionMismatch
from focusidx.streamio import StreamHeader, read_stream, write_stream
from conftest import make_object


def _header(**kw):
    base = dict(stream_id="s", fps=30.0, dim=2, sig_dim=4, vocab=50)
    base.update(kw)
    return StreamHeader(**base)


def _objects():
    return [
        make_object(0, [0.5, -1.25], frame_id=0, true_class=3),
        make_object(1, [1e-9, 2.5], frame_id=0, true_class=None),
        make_object(5, [3.125, 4.0], frame_id=2, true_class=49),
    ]


def test_round_trip(tmp_path):
    path = tmp_path / "s.stream"
    write_stream(path, _header(), _objects())
    header, objects = read_stream(path)
    assert header == _header()
    assert [o.object_id for o in objects] == [0, 1, 5]
    assert [o.true_class for o in objects] == [3, None, 49]
    assert objects[2].timestamp_s == pytest.approx(2 / 30.0)
    for a, b in zip(_objects(), objects):
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.pixel_signature, b.pixel_signature)


def test_rewrite_is_byte_identical(tmp_path):
    p1, p2 = tmp_path / "a", tmp_path / "b"
    write_stream(p1, _header(), _objects())
    header, objects = read_stream(p1)
    write_stream(p2, header, objects)
    assert p1.read_bytes() == p2.read_bytes()


def test_bad_magic(tmp_path):
    p = tmp_path / "bad"
    p.write_text("WRONG/1\n")
    with pytest.raises(FormatVersionMismatch):
        read_stream(p)


def test_missing_objects_section(tmp_path):
    p = tmp_path / "bad"
    p.write_text("FOCUSSTREAM/1\nstream_id=s\nfps=30\nD=2\nS=4\nV=50\n")
    with pytest.raises(DataError, match="OBJECTS"):
        read_stream(p)


def _write_then_patch(tmp_path, patch):
    p = tmp_path / "s"
    write_stream(p, _header(), _objects())
    p.write_text(patch(p.read_text()))
    return p


def test_vector_length_mismatch(tmp_path):
    p = _write_then_patch(tmp_path, lambda t: t.replace("0.5,-1.25", "0.5"))
    with pytest.raises(DataError, match="length"):
        read_stream(p)


def test_object_ids_must_increase(tmp_path):
    p = _write_then_patch(tmp_path, lambda t: t.replace("\n5|", "\n1|"))
    with pytest.raises(DataError, match="increase"):
        read_stream(p)


def test_frame_ids_must_not_decrease(tmp_path):
    p = _write_then_patch(tmp_path, lambda t: t.replace("\n5|2|", "\n5|0|").replace("1|0|", "1|1|"))
    with pytest.raises(DataError, match="frame"):
        read_stream(p)


def test_other_class_serialized_as_vocab(tmp_path):
    p = tmp_path / "s"
    objs = [make_object(0, [0.0, 0.0], frame_id=0, true_class=OTHER_CLASS)]
    write_stream(p, _header(), objs)
    assert "|50|" in p.read_text()
    _, back = read_stream(p)
    assert back[0].true_class == OTHER_CLASS
