from enum import Enum
from math import isfinite

import numpy

from dune_edges.errors import NumericError
from dune_edges.filters import EdgeMap
from dune_edges.raster import Raster
from dune_edges.tone import invert


class BlendMode(Enum):

    MULTIPLY = 'multiply'
    ADDITIVE = 'additive'
    DARKEN = 'darken'


def _merge(base, layer, mode):
    if mode is BlendMode.MULTIPLY:
        return base * layer
    if mode is BlendMode.ADDITIVE:
        return numpy.minimum(base + layer, 1.0)
    return numpy.minimum(base, layer)


def blend(base: Raster, layer: Raster,
          mode: BlendMode = BlendMode.MULTIPLY,
          opacity: float = 1.0) -> Raster:
    """
    Merge ``layer`` onto ``base``; ``opacity`` mixes linearly between
    the untouched base and the full merge.
    """
    if base.shape != layer.shape:
        raise NumericError('cannot blend %ix%i layer onto %ix%i base' % (
            layer.width, layer.height, base.width, base.height
        ))
    if not (isfinite(opacity) and 0 <= opacity <= 1):
        raise NumericError('opacity must lie in [0, 1], not %r' % opacity)
    merged = _merge(base.samples, layer.samples, mode)
    out = (1 - opacity) * base.samples + opacity * merged
    return Raster.clipped(out, base.pixel_scale)


def edge_overlay(base: Raster, edges: EdgeMap,
                 mode: BlendMode = BlendMode.MULTIPLY,
                 opacity: float = 1.0) -> Raster:
    "Draw the edges of ``edges`` dark on ``base``."
    return blend(base, invert(edges.magnitude), mode, opacity)


def side_by_side(left: Raster, right: Raster, gap: int = 8,
                 fill: float = 1.0) -> Raster:
    """
    Place two rasters next to each other, top aligned, with ``gap``
    columns of ``fill`` between them. The shorter one is padded with
    ``fill`` at the bottom.
    """
    if gap < 0:
        raise NumericError('gap must not be negative, not %r' % gap)
    height = max(left.height, right.height)
    out = numpy.full((height, left.width + gap + right.width), float(fill))
    out[:left.height, :left.width] = left.samples
    out[:right.height, left.width + gap:] = right.samples
    scale = left.pixel_scale if left.pixel_scale == right.pixel_scale else None
    return Raster(out, scale)
