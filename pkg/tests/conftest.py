import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pupguard.dataset import (
    CaptureInstant,
    GrayImage,
    Label,
    PressPair,
    parse_timestamp,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_image(pixels) -> GrayImage:
    return GrayImage(np.asarray(pixels, dtype=np.uint8))


def make_pair(
    pair_id="p0",
    subject="s0",
    img1=None,
    img2=None,
    t1="20240301120000.000000",
    dt_us=1_500_000,
    label=Label.LEGITIMATE,
) -> PressPair:
    if img1 is None:
        img1 = make_image(np.zeros((160, 160)))
    if img2 is None:
        img2 = make_image(np.full((160, 160), 7))
    start = parse_timestamp(t1)
    return PressPair(
        pair_id,
        subject,
        img1,
        img2,
        start,
        CaptureInstant(start.micros_since_epoch + dt_us),
        label,
    )
