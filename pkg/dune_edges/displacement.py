from dataclasses import dataclass, replace
from datetime import date
from logging import getLogger, INFO
from math import hypot, isfinite
from typing import Optional, Tuple

import numpy
from numpy.lib.stride_tricks import sliding_window_view

from dune_edges.errors import NumericError
from dune_edges.raster import Raster

logger = getLogger(__name__)

DAYS_PER_YEAR = 365.25
VARIANCE_FLOOR = 1e-12
CURVATURE_FLOOR = 1e-12


@dataclass(frozen=True)
class TemplateSpec:
    """
    A ``(2 * half_size + 1)`` pixel square of image A centred on
    ``(x, y)``, usually the toe of a dune.
    """

    x: int
    y: int
    half_size: int = 8

    def __post_init__(self):
        if self.half_size < 2:
            raise NumericError('template half size must be at least 2, not %r'
                               % self.half_size)

    @property
    def size(self) -> int:
        return 2 * self.half_size + 1


@dataclass(frozen=True)
class SearchSpec:

    max_shift: int = 16

    def __post_init__(self):
        if self.max_shift < 1:
            raise NumericError('search max shift must be at least 1, not %r'
                               % self.max_shift)


@dataclass(frozen=True)
class MatchResult:
    """
    Where the template of image A was found in image B: ``offset_px``
    is B position minus A position. The physical fields are filled in
    by :func:`to_physical`.
    """

    offset_px: Tuple[float, float]
    peak_score: float
    offset_m: Optional[Tuple[float, float]] = None
    rate_m_per_yr: Optional[float] = None
    interval_yr: Optional[float] = None

    def __post_init__(self):
        if not (isfinite(self.peak_score) and abs(self.peak_score) <= 1 + 1e-9):
            raise NumericError('peak score %r outside [-1, 1]' % self.peak_score)

    @property
    def distance_px(self) -> float:
        return hypot(*self.offset_px)

    @property
    def distance_m(self) -> Optional[float]:
        if self.offset_m is None:
            return None
        return hypot(*self.offset_m)

    def as_dict(self):
        return dict(
            offset_px=list(self.offset_px),
            peak_score=self.peak_score,
            offset_m=None if self.offset_m is None else list(self.offset_m),
            interval_yr=self.interval_yr,
            rate_m_per_yr=self.rate_m_per_yr,
        )


def period_str(date_a, date_b):
    if date_a is None and date_b is None:
        return 'undated'
    if date_a is None:
        return 'until %s' % date_b
    if date_b is None:
        return '%s onwards' % date_a
    return '%s to %s' % (date_a, date_b)


def _template(a, tpl):
    h = tpl.half_size
    if not (h <= tpl.x < a.width - h and h <= tpl.y < a.height - h):
        raise NumericError(
            '%ix%i template at (%i, %i) does not fit inside %ix%i image A' % (
                tpl.size, tpl.size, tpl.x, tpl.y, a.width, a.height
            ))
    return a.samples[tpl.y - h:tpl.y + h + 1, tpl.x - h:tpl.x + h + 1]


def _search_region(b, tpl, search):
    reach = tpl.half_size + search.max_shift
    if not (reach <= tpl.x < b.width - reach and
            reach <= tpl.y < b.height - reach):
        raise NumericError(
            'search of +/-%i px around (%i, %i) does not fit inside '
            '%ix%i image B' % (
                search.max_shift, tpl.x, tpl.y, b.width, b.height
            ))
    return b.samples[tpl.y - reach:tpl.y + reach + 1,
                     tpl.x - reach:tpl.x + reach + 1]


def ncc_scores(a: Raster, b: Raster, tpl: TemplateSpec,
               search: SearchSpec) -> numpy.ndarray:
    """
    Normalized cross-correlation of the template of ``a`` against
    every window of ``b`` offset by ``(u, v)`` within the search range.
    ``scores[v + max_shift, u + max_shift]`` holds offset ``(u, v)``.
    Windows without variance score ``-inf``.
    """
    template = _template(a, tpl)
    region = _search_region(b, tpl, search)
    centred = template - template.mean()
    template_energy = (centred * centred).sum()
    if template_energy <= VARIANCE_FLOOR:
        raise NumericError('template at (%i, %i) has no variance' % (
            tpl.x, tpl.y
        ))
    windows = sliding_window_view(region, (tpl.size, tpl.size))
    count = 2 * search.max_shift + 1
    scores = numpy.full((count, count), -numpy.inf)
    for row in range(count):
        candidates = windows[row]
        candidates = candidates - candidates.mean(axis=(1, 2), keepdims=True)
        energy = (candidates * candidates).sum(axis=(1, 2))
        cross = (candidates * centred).sum(axis=(1, 2))
        usable = energy > VARIANCE_FLOOR
        scores[row, usable] = cross[usable] / numpy.sqrt(
            template_energy * energy[usable]
        )
    return scores


def parabolic_peak(before: float, peak: float, after: float) -> float:
    """
    Offset of the vertex of the parabola through three equally spaced
    scores, or zero where there is no usable curvature.
    """
    if not (isfinite(before) and isfinite(after)):
        return 0.0
    curvature = before - 2 * peak + after
    if abs(curvature) < CURVATURE_FLOOR:
        return 0.0
    return (before - after) / (2 * curvature)


def ncc_match(a: Raster, b: Raster, tpl: TemplateSpec,
              search: SearchSpec = SearchSpec(),
              refine: bool = True) -> MatchResult:
    """
    Find the template of ``a`` in ``b`` by normalized cross-correlation,
    refining the best integer offset to sub-pixel precision along each
    axis. Ties go to the smallest ``(v, u)``.
    """
    scores = ncc_scores(a, b, tpl, search)
    if not numpy.isfinite(scores).any():
        raise NumericError('every candidate window in image B is flat')
    row, column = numpy.unravel_index(numpy.argmax(scores), scores.shape)
    peak = float(scores[row, column])
    m = search.max_shift
    last = 2 * m
    dx = float(column - m)
    dy = float(row - m)
    if refine:
        on_border = []
        if 0 < column < last:
            dx += parabolic_peak(scores[row, column - 1], peak,
                                 scores[row, column + 1])
        else:
            on_border.append('x')
        if 0 < row < last:
            dy += parabolic_peak(scores[row - 1, column], peak,
                                 scores[row + 1, column])
        else:
            on_border.append('y')
        if on_border:
            logger.warning(
                'correlation peak at (%i, %i) is on the search border, '
                'no sub-pixel refinement along %s', column - m, row - m,
                ' or '.join(on_border)
            )
    logger.debug('template at (%i, %i) matched at offset (%.3f, %.3f), '
                 'score %.4f', tpl.x, tpl.y, dx, dy, peak)
    return MatchResult((dx, dy), peak)


def day_count(date_a: date, date_b: date) -> int:
    return (date_b - date_a).days


def years_between(date_a: date, date_b: date) -> float:
    return day_count(date_a, date_b) / DAYS_PER_YEAR


def to_physical(m: MatchResult, meters_per_pixel: float,
                date_a: Optional[date] = None, date_b: Optional[date] = None,
                measure_logging=INFO) -> MatchResult:
    """
    Convert ``m`` to metres and, when both dates are given, to a rate
    in metres per Earth year of 365.25 days.
    """
    if not (isfinite(meters_per_pixel) and meters_per_pixel > 0):
        raise NumericError('pixel scale must be positive, not %r' % (
            meters_per_pixel,
        ))
    dx, dy = m.offset_px
    offset_m = (dx * meters_per_pixel, dy * meters_per_pixel)
    interval = rate = None
    if date_a is not None or date_b is not None:
        if date_a is None or date_b is None:
            raise NumericError('a rate needs both dates, got %s' % (
                period_str(date_a, date_b)
            ))
        if date_b <= date_a:
            raise NumericError('dates must increase, got %s' % (
                period_str(date_a, date_b)
            ))
        interval = years_between(date_a, date_b)
        rate = hypot(*offset_m) / interval
    result = replace(m, offset_m=offset_m, interval_yr=interval,
                     rate_m_per_yr=rate)
    if rate is None:
        logger.log(measure_logging, 'feature moved %.3f m', result.distance_m)
    else:
        logger.log(measure_logging,
                   'feature moved %.3f m from %s, %.3f m/yr over %.2f yr',
                   result.distance_m, period_str(date_a, date_b),
                   rate, interval)
    return result
