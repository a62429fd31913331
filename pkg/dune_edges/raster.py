from dataclasses import dataclass
from enum import Enum
from math import floor, isfinite
from typing import Optional

import numpy

from dune_edges.errors import NumericError

SAMPLE_GRID_STEPS = 2.0 ** 53


class BoundaryPolicy(Enum):
    """
    How samples outside a raster are read.
    ``reflect`` mirrors about the pixel edge, repeating the border
    pixel: ``d c b a | a b c d | d c b a``.
    """

    CLAMP = 'clamp'
    WRAP = 'wrap'
    REFLECT = 'reflect'
    ZERO = 'zero'

    @property
    def ndimage_mode(self):
        return _NDIMAGE_MODES[self]


_NDIMAGE_MODES = {
    BoundaryPolicy.CLAMP: 'nearest',
    BoundaryPolicy.WRAP: 'wrap',
    BoundaryPolicy.REFLECT: 'reflect',
    BoundaryPolicy.ZERO: 'constant',
}


@dataclass(frozen=True)
class SubpixelPoint:

    x: float
    y: float

    def __post_init__(self):
        if not (isfinite(self.x) and isfinite(self.y)):
            raise NumericError('point must be finite, not (%r, %r)' % (
                self.x, self.y
            ))


class Raster:
    """
    An immutable grid of luminance samples in ``[0, 1]``, stored as a
    ``height x width`` array of floats, with an optional ground
    resolution in metres per pixel.

    Samples are held on a grid of ``2 ** -53`` so that ``1 - s`` is
    always exact.
    """

    __slots__ = ('_samples', '_pixel_scale')

    def __init__(self, samples, pixel_scale: Optional[float] = None):
        array = numpy.array(samples, dtype=float)
        if array.ndim != 2 or 0 in array.shape:
            raise NumericError(
                'raster needs a non-empty 2d grid of samples, got shape %r' % (
                    array.shape,
                ))
        if not numpy.isfinite(array).all():
            raise NumericError('raster samples must be finite')
        if array.min() < 0 or array.max() > 1:
            raise NumericError(
                'raster samples must lie in [0, 1], got [%r, %r]' % (
                    float(array.min()), float(array.max())
                ))
        if pixel_scale is not None:
            pixel_scale = float(pixel_scale)
            if not (isfinite(pixel_scale) and pixel_scale > 0):
                raise NumericError(
                    'pixel scale must be positive and finite, not %r' % (
                        pixel_scale,
                    ))
        array = numpy.round(array * SAMPLE_GRID_STEPS) / SAMPLE_GRID_STEPS
        array.flags.writeable = False
        self._samples = array
        self._pixel_scale = pixel_scale

    @classmethod
    def from_flat(cls, width: int, height: int, values, pixel_scale=None):
        values = numpy.asarray(values, dtype=float)
        if values.size != width * height:
            raise NumericError('%i samples cannot fill a %ix%i raster' % (
                values.size, width, height
            ))
        return cls(values.reshape(height, width), pixel_scale)

    @classmethod
    def constant(cls, width: int, height: int, value: float,
                 pixel_scale=None):
        return cls(numpy.full((height, width), value, dtype=float),
                   pixel_scale)

    @classmethod
    def clipped(cls, samples, pixel_scale=None):
        "Build a raster from unconstrained values, clamping them to [0, 1]."
        return cls(numpy.clip(samples, 0.0, 1.0), pixel_scale)

    @property
    def samples(self) -> numpy.ndarray:
        return self._samples

    @property
    def pixel_scale(self) -> Optional[float]:
        return self._pixel_scale

    @property
    def width(self) -> int:
        return self._samples.shape[1]

    @property
    def height(self) -> int:
        return self._samples.shape[0]

    @property
    def shape(self):
        return self._samples.shape

    def with_samples(self, samples):
        "A raster of the same scale holding ``samples``."
        return Raster(samples, self._pixel_scale)

    def __eq__(self, other):
        if type(self) is not type(other):
            return False
        return (
            self.shape == other.shape and
            self._pixel_scale == other._pixel_scale and
            bool(numpy.array_equal(self._samples, other._samples))
        )

    def __hash__(self):
        return hash((self.shape, self._pixel_scale, self._samples.tobytes()))

    def __repr__(self):
        content = ['width=%i' % self.width, 'height=%i' % self.height]
        if self._pixel_scale is not None:
            content.append('pixel_scale=%r' % self._pixel_scale)
        return 'Raster(%s)' % ', '.join(content)

    __str__ = __repr__


def map_indices(indices, size: int, policy: BoundaryPolicy):
    """
    Map integer indices along an axis of ``size`` samples into range.
    Returns the mapped indices and a mask that is False where the
    policy reads zero instead.
    """
    indices = numpy.asarray(indices, dtype=numpy.int64)
    valid = numpy.ones(indices.shape, dtype=bool)
    if policy is BoundaryPolicy.CLAMP:
        mapped = numpy.clip(indices, 0, size - 1)
    elif policy is BoundaryPolicy.WRAP:
        mapped = numpy.mod(indices, size)
    elif policy is BoundaryPolicy.REFLECT:
        mapped = numpy.mod(indices, 2 * size)
        mapped = numpy.where(mapped >= size, 2 * size - 1 - mapped, mapped)
    else:
        valid = (indices >= 0) & (indices < size)
        mapped = numpy.where(valid, indices, 0)
    return mapped, valid


def sample(r: Raster, ix: int, iy: int,
           policy: BoundaryPolicy = BoundaryPolicy.CLAMP) -> float:
    if 0 <= ix < r.width and 0 <= iy < r.height:
        return float(r.samples[iy, ix])
    if policy is BoundaryPolicy.ZERO:
        return 0.0
    (x,), _ = map_indices([ix], r.width, policy)
    (y,), _ = map_indices([iy], r.height, policy)
    return float(r.samples[y, x])


def bilinear_sample(r: Raster, p: SubpixelPoint,
                    policy: BoundaryPolicy = BoundaryPolicy.CLAMP) -> float:
    x0 = floor(p.x)
    y0 = floor(p.y)
    fx = p.x - x0
    fy = p.y - y0
    return (
        (1 - fx) * (1 - fy) * sample(r, x0, y0, policy) +
        fx * (1 - fy) * sample(r, x0 + 1, y0, policy) +
        (1 - fx) * fy * sample(r, x0, y0 + 1, policy) +
        fx * fy * sample(r, x0 + 1, y0 + 1, policy)
    )


def _gather(r, ix, iy, policy):
    x, x_valid = map_indices(ix, r.width, policy)
    y, y_valid = map_indices(iy, r.height, policy)
    return numpy.where(x_valid & y_valid, r.samples[y, x], 0.0)


def bilinear_samples(r: Raster, xs, ys,
                     policy: BoundaryPolicy = BoundaryPolicy.CLAMP):
    """
    :func:`bilinear_sample` evaluated over arrays of coordinates,
    term for term, so both give identical results.
    """
    xs = numpy.asarray(xs, dtype=float)
    ys = numpy.asarray(ys, dtype=float)
    x0 = numpy.floor(xs)
    y0 = numpy.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(numpy.int64)
    y0 = y0.astype(numpy.int64)
    return (
        (1 - fx) * (1 - fy) * _gather(r, x0, y0, policy) +
        fx * (1 - fy) * _gather(r, x0 + 1, y0, policy) +
        (1 - fx) * fy * _gather(r, x0, y0 + 1, policy) +
        fx * fy * _gather(r, x0 + 1, y0 + 1, policy)
    )


def nearest_samples(r: Raster, xs, ys,
                    policy: BoundaryPolicy = BoundaryPolicy.CLAMP):
    ix = numpy.floor(numpy.asarray(xs, dtype=float) + 0.5).astype(numpy.int64)
    iy = numpy.floor(numpy.asarray(ys, dtype=float) + 0.5).astype(numpy.int64)
    return _gather(r, ix, iy, policy)


def quantize(r: Raster) -> numpy.ndarray:
    "Samples to bytes, rounding half up."
    return numpy.floor(r.samples * 255 + 0.5).astype(numpy.uint8)


def dequantize(data, pixel_scale: Optional[float] = None) -> Raster:
    data = numpy.asarray(data)
    if data.size and (data.min() < 0 or data.max() > 255):
        raise NumericError('byte values must lie in [0, 255]')
    return Raster(data.astype(float) / 255, pixel_scale)


def crop(r: Raster, x: int, y: int, width: int, height: int) -> Raster:
    if width < 1 or height < 1:
        raise NumericError('crop of %ix%i is empty' % (width, height))
    if x < 0 or y < 0 or x + width > r.width or y + height > r.height:
        raise NumericError(
            'crop %ix%i at (%i, %i) does not fit inside %ix%i raster' % (
                width, height, x, y, r.width, r.height
            ))
    return r.with_samples(r.samples[y:y + height, x:x + width])


def transpose(r: Raster) -> Raster:
    return r.with_samples(r.samples.T)


def rotate90(r: Raster, turns: int = 1) -> Raster:
    "Rotate counter-clockwise by ``turns`` quarter turns."
    return r.with_samples(numpy.rot90(r.samples, turns))


def compare_raster(x, y, context):
    if type(x) is not type(y):
        return compare_simple(x, y, context)

    args = []
    for obj in x, y:
        args.append(dict(
            width=obj.width,
            height=obj.height,
            pixel_scale=obj.pixel_scale,
            samples=obj.samples.tolist(),
        ))

    args.append(context)
    args.append(x)

    return _compare_mapping(*args)


try:
    from testfixtures.comparison import (
        register, _compare_mapping, compare_simple
    )
except ImportError:  # pragma: no cover
    pass
else:
    register(Raster, compare_raster)
