from dataclasses import dataclass
from math import isfinite, pi, tan

import numpy

from dune_edges.errors import NumericError
from dune_edges.raster import Raster

FLAT_SPAN = 1e-12


@dataclass(frozen=True)
class ToneParams:
    """
    Brightness in ``[-1, 1]`` is added after the contrast slope, which
    is ``tan((contrast + 1) * pi / 4)`` about mid grey.
    """

    brightness: float = 0.0
    contrast: float = 0.0

    def __post_init__(self):
        if not (isfinite(self.brightness) and -1 <= self.brightness <= 1):
            raise NumericError('brightness must lie in [-1, 1], not %r' % (
                self.brightness,
            ))
        if not (isfinite(self.contrast) and -1 <= self.contrast <= 0.99):
            raise NumericError('contrast must lie in [-1, 0.99], not %r' % (
                self.contrast,
            ))

    @property
    def slope(self) -> float:
        if self.contrast == 0:
            return 1.0
        return tan((self.contrast + 1) * pi / 4)


def adjust(r: Raster, p: ToneParams) -> Raster:
    if p.brightness == 0 and p.contrast == 0:
        return r
    out = (r.samples - 0.5) * p.slope + 0.5 + p.brightness
    return Raster.clipped(out, r.pixel_scale)


def invert(r: Raster) -> Raster:
    return r.with_samples(1 - r.samples)


def stretch(r: Raster) -> Raster:
    "Map the sample range of ``r`` onto ``[0, 1]``."
    low = r.samples.min()
    high = r.samples.max()
    span = high - low
    if span < FLAT_SPAN:
        return r
    return Raster.clipped((r.samples - low) / span, r.pixel_scale)
