from dataclasses import dataclass
from logging import getLogger, DEBUG, INFO
from math import atan2, cos, degrees, hypot, isfinite, sin
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy

from dune_edges.errors import ConfigError, NumericError
from dune_edges.raster import (
    BoundaryPolicy, Raster, SubpixelPoint, bilinear_samples, nearest_samples
)

logger = getLogger(__name__)

INTERPOLATIONS = ('bilinear', 'nearest')

MIN_SCALE = 1e-12


@dataclass(frozen=True)
class SimilarityTransform:
    """
    ``q = scale * R(rotation) * p + translation``, with ``rotation`` in
    radians, counter-clockwise in a frame whose y axis points down the
    image rows.
    """

    scale: float = 1.0
    rotation: float = 0.0
    translation: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (isfinite(self.scale) and self.scale > 0):
            raise NumericError('scale must be positive and finite, not %r' % (
                self.scale,
            ))
        if not isfinite(self.rotation):
            raise NumericError('rotation must be finite')
        tx, ty = self.translation
        if not (isfinite(tx) and isfinite(ty)):
            raise NumericError('translation must be finite')
        object.__setattr__(self, 'translation', (float(tx), float(ty)))

    @classmethod
    def identity(cls):
        return cls()

    @property
    def matrix(self) -> numpy.ndarray:
        "The 3x3 homogeneous matrix of this transform."
        c = self.scale * cos(self.rotation)
        s = self.scale * sin(self.rotation)
        tx, ty = self.translation
        return numpy.array([[c, -s, tx], [s, c, ty], [0.0, 0.0, 1.0]])

    def apply_arrays(self, xs, ys):
        c = cos(self.rotation)
        s = sin(self.rotation)
        tx, ty = self.translation
        xs = numpy.asarray(xs, dtype=float)
        ys = numpy.asarray(ys, dtype=float)
        return (
            self.scale * (c * xs - s * ys) + tx,
            self.scale * (s * xs + c * ys) + ty,
        )

    def apply(self, p: SubpixelPoint) -> SubpixelPoint:
        x, y = self.apply_arrays(p.x, p.y)
        return SubpixelPoint(float(x), float(y))

    def inverse(self) -> 'SimilarityTransform':
        if self.scale < MIN_SCALE:
            raise NumericError('transform with scale %r is not invertible' % (
                self.scale,
            ))
        c = cos(-self.rotation)
        s = sin(-self.rotation)
        tx, ty = self.translation
        return SimilarityTransform(
            1 / self.scale,
            -self.rotation,
            (-(c * tx - s * ty) / self.scale, -(s * tx + c * ty) / self.scale),
        )

    def compose(self, first: 'SimilarityTransform') -> 'SimilarityTransform':
        "The transform applying ``first`` and then this one."
        c = cos(self.rotation)
        s = sin(self.rotation)
        fx, fy = first.translation
        tx, ty = self.translation
        return SimilarityTransform(
            self.scale * first.scale,
            self.rotation + first.rotation,
            (self.scale * (c * fx - s * fy) + tx,
             self.scale * (s * fx + c * fy) + ty),
        )

    def as_dict(self):
        return dict(
            scale=self.scale,
            rotation_deg=degrees(self.rotation),
            translation=list(self.translation),
        )

    def __str__(self):
        return 'scale %.6g, rotation %.6g deg, translation (%.6g, %.6g)' % (
            self.scale, degrees(self.rotation), *self.translation
        )


@dataclass(frozen=True)
class ControlPointPair:

    source: SubpixelPoint
    target: SubpixelPoint


def _as_arrays(pairs):
    source = numpy.array([(p.source.x, p.source.y) for p in pairs], dtype=float)
    target = numpy.array([(p.target.x, p.target.y) for p in pairs], dtype=float)
    return source, target


def estimate_similarity(pairs: Sequence[ControlPointPair],
                        scale: Optional[float] = None,
                        fit_logging=INFO) -> SimilarityTransform:
    """
    Least-squares similarity transform taking each pair's source point
    to its target point. If ``scale`` is given it is held fixed and
    only rotation and translation are fitted.
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise NumericError('need at least 2 control point pairs, got %i' % (
            len(pairs),
        ))
    source, target = _as_arrays(pairs)
    source_mean = source.mean(axis=0)
    target_mean = target.mean(axis=0)
    sc = source - source_mean
    tc = target - target_mean
    spread = (sc * sc).sum()
    if spread <= MIN_SCALE * MIN_SCALE * max(1.0, (source * source).sum()):
        raise NumericError('control point sources all coincide')
    a = (sc[:, 0] * tc[:, 0] + sc[:, 1] * tc[:, 1]).sum() / spread
    b = (sc[:, 0] * tc[:, 1] - sc[:, 1] * tc[:, 0]).sum() / spread
    rotation = atan2(b, a)
    if scale is None:
        scale = hypot(a, b)
        if scale < MIN_SCALE:
            raise NumericError('control point targets all coincide')
    c = scale * cos(rotation)
    s = scale * sin(rotation)
    translation = (
        target_mean[0] - (c * source_mean[0] - s * source_mean[1]),
        target_mean[1] - (s * source_mean[0] + c * source_mean[1]),
    )
    xf = SimilarityTransform(scale, rotation, translation)
    logger.log(fit_logging, 'fitted %s to %i control points, rms error %.3g px',
               xf, len(pairs), rms(residuals(pairs, xf)))
    return xf


def residuals(pairs: Sequence[ControlPointPair],
              xf: SimilarityTransform) -> numpy.ndarray:
    source, target = _as_arrays(pairs)
    xs, ys = xf.apply_arrays(source[:, 0], source[:, 1])
    return numpy.hypot(xs - target[:, 0], ys - target[:, 1])


def rms(errors) -> float:
    errors = numpy.asarray(errors, dtype=float)
    if not errors.size:
        return 0.0
    return float(numpy.sqrt((errors * errors).mean()))


def transform_from_scales(mpp_moving: float,
                          mpp_fixed: float) -> SimilarityTransform:
    """
    Scale-only transform taking pixels of an image at ``mpp_moving``
    metres per pixel to pixels of one at ``mpp_fixed``.
    """
    for value in mpp_moving, mpp_fixed:
        if not (value and isfinite(value) and value > 0):
            raise NumericError('pixel scale must be positive, not %r' % value)
    return SimilarityTransform(mpp_moving / mpp_fixed)


def warp(r: Raster, xf: SimilarityTransform, out_width: int, out_height: int,
         policy: BoundaryPolicy = BoundaryPolicy.CLAMP,
         interpolation: str = 'bilinear') -> Raster:
    """
    Resample ``r`` into the frame ``xf`` maps it to. Each output pixel
    reads the input at the inverse-mapped position.
    """
    if out_width < 1 or out_height < 1:
        raise NumericError('cannot warp to %ix%i' % (out_width, out_height))
    if interpolation not in INTERPOLATIONS:
        raise NumericError('unknown interpolation: %r' % interpolation)
    inverse = xf.inverse()
    ys, xs = numpy.mgrid[0:out_height, 0:out_width].astype(float)
    sx, sy = inverse.apply_arrays(xs, ys)
    if interpolation == 'bilinear':
        values = bilinear_samples(r, sx, sy, policy)
    else:
        values = nearest_samples(r, sx, sy, policy)
    pixel_scale = None
    if r.pixel_scale is not None:
        pixel_scale = r.pixel_scale / xf.scale
    logger.debug('warped %ix%i raster to %ix%i: %s',
                 r.width, r.height, out_width, out_height, xf)
    return Raster.clipped(values, pixel_scale)


def parse_control_points(lines: Iterable[str],
                         source: str = '<string>') -> List[ControlPointPair]:
    """
    Parse ``sx sy tx ty`` lines. Blank lines and ``#`` comments are
    skipped.
    """
    pairs = []
    for number, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if len(fields) != 4:
                raise ValueError('expected 4 values, got %i' % len(fields))
            sx, sy, tx, ty = (float(field) for field in fields)
            pair = ControlPointPair(SubpixelPoint(sx, sy),
                                    SubpixelPoint(tx, ty))
        except ValueError as e:
            raise ConfigError('%s line %i: %s' % (source, number, e)) from None
        pairs.append(pair)
    logger.log(DEBUG, 'read %i control points from %s', len(pairs), source)
    return pairs


def read_control_points(path) -> List[ControlPointPair]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError('cannot read control points: %s' % e) from None
    return parse_control_points(text.splitlines(), str(path))
