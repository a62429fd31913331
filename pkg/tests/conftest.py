from datetime import date

import pytest
from testfixtures import TempDirectory

from dune_edges.raster import SubpixelPoint
from dune_edges.synthgen import Barchan, SceneParams, SceneTruth


@pytest.fixture()
def dir():
    with TempDirectory() as dir:
        yield dir


@pytest.fixture()
def scene():
    # one dune on a 160x160 frame, small enough to keep tests quick
    return SceneParams(
        width=160,
        height=160,
        seed=42,
        noise_amplitude=0.02,
        ground_level=0.6,
        barchans=(Barchan(SubpixelPoint(80, 80), 20.0, 0.3, 0.2),),
    )


@pytest.fixture()
def truth():
    return SceneTruth(((6.0, -4.0),), pixel_scale=0.5,
                      date_a=date(1999, 3, 11), date_b=date(2007, 10, 13))
