import numpy as np
import pytest

from focusidx.classifiers import make_default_profiles
from focusidx.core import DetectedObject
from focusidx.simharness import StreamSpec, generate_stream


@pytest.fixture(scope="session")
def profiles():
    return make_default_profiles(1000)


@pytest.fixture(scope="session")
def small_stream():
    """2,000-object default-spec stream shared across read-only tests."""
    spec = StreamSpec(n_objects=2000, seed=7, stream_id="small")
    return generate_stream(spec)


def make_object(object_id, feature, frame_id=None, true_class=0, sig=None):
    feature = np.asarray(feature, dtype=float)
    if sig is None:
        sig = np.full(4, float(object_id))
    return DetectedObject(
        object_id=object_id,
        frame_id=object_id if frame_id is None else frame_id,
        timestamp_s=0.0,
        pixel_signature=np.asarray(sig, dtype=float),
        feature=feature,
        true_class=true_class,
    )
