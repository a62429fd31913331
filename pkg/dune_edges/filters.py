from dataclasses import dataclass
from enum import Enum
from logging import getLogger
from math import ceil, isfinite, sqrt
from typing import Optional

import numpy
from scipy import ndimage

from dune_edges.errors import NumericError
from dune_edges.raster import BoundaryPolicy, Raster

logger = getLogger(__name__)

MAX_KERNEL_SIZE = 15
MAX_BLUR_RADIUS = 50


class Kernel:
    """
    A correlation kernel. Odd sizes are anchored on their centre
    pixel, the 2x2 size is anchored on its top-left pixel.
    """

    __slots__ = ('_weights',)

    def __init__(self, weights):
        weights = numpy.array(weights, dtype=float)
        if weights.ndim != 2:
            raise NumericError('kernel weights must be a 2d grid')
        height, width = weights.shape
        if (height, width) != (2, 2):
            for size in height, width:
                if size < 1 or size > MAX_KERNEL_SIZE or not size % 2:
                    raise NumericError(
                        '%ix%i kernel not supported: sizes must be odd and '
                        'at most %i, or exactly 2x2' % (
                            width, height, MAX_KERNEL_SIZE
                        ))
        if not numpy.isfinite(weights).all():
            raise NumericError('kernel weights must be finite')
        weights.flags.writeable = False
        self._weights = weights

    @property
    def weights(self) -> numpy.ndarray:
        return self._weights

    @property
    def width(self) -> int:
        return self._weights.shape[1]

    @property
    def height(self) -> int:
        return self._weights.shape[0]

    @property
    def anchor(self):
        "The ``(x, y)`` offset of the output pixel within the kernel."
        if self._weights.shape == (2, 2):
            return 0, 0
        return self.width // 2, self.height // 2

    def __repr__(self):
        return 'Kernel(%r)' % self._weights.tolist()


SOBEL_X = Kernel([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]])
SOBEL_Y = Kernel([[-1, -2, -1], [0, 0, 0], [1, 2, 1]])
PREWITT_X = Kernel([[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]])
PREWITT_Y = Kernel([[-1, -1, -1], [0, 0, 0], [1, 1, 1]])
ROBERTS_X = Kernel([[1, 0], [0, -1]])
ROBERTS_Y = Kernel([[0, 1], [-1, 0]])
LAPLACE_4 = Kernel([[0, 1, 0], [1, -4, 1], [0, 1, 0]])


class OperatorKind(Enum):

    SOBEL = 'sobel'
    PREWITT = 'prewitt'
    ROBERTS = 'roberts'
    LAPLACE = 'laplace'
    DOG = 'dog'


_GAINS = {
    OperatorKind.SOBEL: 4 * sqrt(2),
    OperatorKind.PREWITT: 3 * sqrt(2),
    OperatorKind.ROBERTS: sqrt(2),
    OperatorKind.LAPLACE: 4.0,
    OperatorKind.DOG: 1.0,
}

_GRADIENT_KERNELS = {
    OperatorKind.SOBEL: (SOBEL_X, SOBEL_Y),
    OperatorKind.PREWITT: (PREWITT_X, PREWITT_Y),
    OperatorKind.ROBERTS: (ROBERTS_X, ROBERTS_Y),
}


@dataclass(frozen=True)
class EdgeOperator:
    """
    One of the edge operators. Only the difference of Gaussians
    carries parameters, its two blur radii in pixels.
    """

    kind: OperatorKind
    radius_small: Optional[float] = None
    radius_large: Optional[float] = None

    def __post_init__(self):
        if self.kind is OperatorKind.DOG:
            small, large = self.radius_small, self.radius_large
            if small is None or large is None:
                raise NumericError('dog needs both radii')
            if not (0 < small < large <= MAX_BLUR_RADIUS):
                raise NumericError(
                    'dog radii must satisfy 0 < small < large <= %i, '
                    'got %r and %r' % (MAX_BLUR_RADIUS, small, large)
                )
        elif self.radius_small is not None or self.radius_large is not None:
            raise NumericError('%s takes no radii' % self.kind.value)

    @classmethod
    def dog(cls, radius_small: float, radius_large: float):
        return cls(OperatorKind.DOG, radius_small, radius_large)

    @classmethod
    def named(cls, name: str, radius_small: float = 1.0,
              radius_large: float = 3.0):
        try:
            kind = OperatorKind(name)
        except ValueError:
            raise NumericError('unknown edge operator: %r' % name) from None
        if kind is OperatorKind.DOG:
            return cls.dog(radius_small, radius_large)
        return cls(kind)

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def gain(self) -> float:
        "Largest response the operator can give on unit-range input."
        return _GAINS[self.kind]

    @property
    def is_gradient_pair(self) -> bool:
        return self.kind in _GRADIENT_KERNELS

    def as_dict(self):
        data = dict(name=self.name)
        if self.kind is OperatorKind.DOG:
            data.update(radius_small=self.radius_small,
                        radius_large=self.radius_large)
        return data

    def __str__(self):
        if self.kind is OperatorKind.DOG:
            return 'dog(%g, %g)' % (self.radius_small, self.radius_large)
        return self.name


SOBEL = EdgeOperator(OperatorKind.SOBEL)
PREWITT = EdgeOperator(OperatorKind.PREWITT)
ROBERTS = EdgeOperator(OperatorKind.ROBERTS)
LAPLACE = EdgeOperator(OperatorKind.LAPLACE)


@dataclass(frozen=True)
class EdgeMap:

    magnitude: Raster
    operator: EdgeOperator
    threshold_applied: Optional[float] = None

    def __post_init__(self):
        t = self.threshold_applied
        if t is not None:
            if not (0 <= t <= 1):
                raise NumericError('threshold must lie in [0, 1], not %r' % t)
            samples = self.magnitude.samples
            if ((samples != 0) & (samples < t)).any():
                raise NumericError(
                    'edge map has non-zero samples below its threshold %r' % t
                )


def kernel_for(op: EdgeOperator):
    """
    The published kernels of ``op``: the ``(x, y)`` pair for gradient
    operators, a single kernel for the Laplacian.
    """
    if op.is_gradient_pair:
        return _GRADIENT_KERNELS[op.kind]
    if op.kind is OperatorKind.LAPLACE:
        return LAPLACE_4
    raise NumericError('%s is not defined by a fixed kernel' % op)


def convolve(r: Raster, k: Kernel,
             policy: BoundaryPolicy = BoundaryPolicy.CLAMP) -> numpy.ndarray:
    """
    Correlate ``r`` with ``k``, reading outside the raster according
    to ``policy``. The result is an unclamped ``height x width`` array:

    ``out[y, x] = sum(w[j, i] * sample(r, x + i - ax, y + j - ay))``
    """
    anchor_x, anchor_y = k.anchor
    return ndimage.correlate(
        r.samples, k.weights,
        mode=policy.ndimage_mode,
        cval=0.0,
        origin=(anchor_y - k.height // 2, anchor_x - k.width // 2),
    )


def gradients(r: Raster, op: EdgeOperator,
              policy: BoundaryPolicy = BoundaryPolicy.CLAMP):
    if not op.is_gradient_pair:
        raise NumericError('%s has no gradient pair' % op)
    kernel_x, kernel_y = _GRADIENT_KERNELS[op.kind]
    return convolve(r, kernel_x, policy), convolve(r, kernel_y, policy)


def gaussian_kernel_1d(radius: float) -> numpy.ndarray:
    """
    Discrete Gaussian with sigma of a third of ``radius``, truncated at
    three sigma and normalized to unit sum.
    """
    _check_radius(radius)
    sigma = radius / 3
    # three sigma is the radius itself
    half = ceil(radius)
    x = numpy.arange(-half, half + 1, dtype=float)
    weights = numpy.exp(-x * x / (2 * sigma * sigma))
    return weights / weights.sum()


def _check_radius(radius):
    if not (isfinite(radius) and 0 < radius <= MAX_BLUR_RADIUS):
        raise NumericError('blur radius must be in (0, %i], not %r' % (
            MAX_BLUR_RADIUS, radius
        ))


def gaussian_blur(r: Raster, radius: float,
                  policy: BoundaryPolicy = BoundaryPolicy.CLAMP) -> Raster:
    weights = gaussian_kernel_1d(radius)
    mode = policy.ndimage_mode
    blurred = ndimage.correlate1d(r.samples, weights, axis=1,
                                  mode=mode, cval=0.0)
    blurred = ndimage.correlate1d(blurred, weights, axis=0,
                                  mode=mode, cval=0.0)
    return Raster.clipped(blurred, r.pixel_scale)


def edge_response(r: Raster, op: EdgeOperator = SOBEL,
                  policy: BoundaryPolicy = BoundaryPolicy.CLAMP) -> EdgeMap:
    """
    Edge magnitude of ``r`` under ``op``, divided by the operator's
    fixed gain so maps of different images share one scale.
    """
    if op.is_gradient_pair:
        gx, gy = gradients(r, op, policy)
        magnitude = numpy.hypot(gx, gy) / op.gain
    elif op.kind is OperatorKind.LAPLACE:
        magnitude = numpy.abs(convolve(r, LAPLACE_4, policy)) / op.gain
    else:
        small = gaussian_blur(r, op.radius_small, policy)
        large = gaussian_blur(r, op.radius_large, policy)
        magnitude = numpy.abs(small.samples - large.samples)
    logger.debug('%s edge response over %ix%i raster using %s boundary',
                 op, r.width, r.height, policy.value)
    return EdgeMap(Raster.clipped(magnitude, r.pixel_scale), op)


def threshold_edges(e: EdgeMap, t: float, binarize: bool = False) -> EdgeMap:
    """
    Zero every sample below ``t``. Samples at or above ``t`` are kept,
    or set to one if ``binarize`` is true.
    """
    if not (0 <= t <= 1):
        raise NumericError('threshold must lie in [0, 1], not %r' % t)
    samples = e.magnitude.samples
    kept = samples >= t
    if binarize:
        result = numpy.where(kept, 1.0, 0.0)
    else:
        result = numpy.where(kept, samples, 0.0)
    return EdgeMap(e.magnitude.with_samples(result), e.operator, t)
