"""
Synthetic two-epoch scenes of crescent dunes on textured ground, with
the true displacement of every dune known.

Ground texture is uniform noise from :func:`numpy.random.default_rng`
seeded with the scene seed, drawn once and shared by both epochs.
"""
from dataclasses import asdict, dataclass
from datetime import date
from logging import getLogger
from math import ceil, cos, floor, hypot, isfinite, sin
from pathlib import Path
from typing import Tuple

import numpy

from dune_edges.displacement import SearchSpec, TemplateSpec
from dune_edges.errors import ConfigError, NumericError
from dune_edges.pipeline.io import save_image
from dune_edges.pipeline.report import truth_report, write_json
from dune_edges.raster import Raster, SubpixelPoint

logger = getLogger(__name__)

MAX_NOISE = 0.2
SUBSAMPLES = 4
HORN_OFFSET = 0.5
HOLLOW_RADIUS = 0.8


@dataclass(frozen=True)
class Barchan:
    """
    A crescent: the disc of ``radius`` about ``center`` minus a disc of
    ``0.8 * radius`` whose centre sits ``0.5 * radius`` away along
    ``orientation`` (radians, the direction the horns point).
    """

    center: SubpixelPoint
    radius: float
    orientation: float = 0.0
    albedo: float = 0.2

    def __post_init__(self):
        if not (isfinite(self.radius) and self.radius > 0):
            raise NumericError('barchan radius must be positive, not %r' % (
                self.radius,
            ))
        if not isfinite(self.orientation):
            raise NumericError('barchan orientation must be finite')
        if not (0 <= self.albedo <= 1):
            raise NumericError('barchan albedo must lie in [0, 1], not %r' % (
                self.albedo,
            ))

    def moved(self, dx: float, dy: float) -> 'Barchan':
        return Barchan(SubpixelPoint(self.center.x + dx, self.center.y + dy),
                       self.radius, self.orientation, self.albedo)

    def fits(self, width: int, height: int) -> bool:
        x, y, r = self.center.x, self.center.y, self.radius
        return r <= x <= width - 1 - r and r <= y <= height - 1 - r


@dataclass(frozen=True)
class SceneParams:

    width: int
    height: int
    seed: int = 0
    noise_amplitude: float = 0.02
    ground_level: float = 0.6
    barchans: Tuple[Barchan, ...] = ()

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise NumericError('scene must be at least 1x1, not %ix%i' % (
                self.width, self.height
            ))
        if not (0 <= self.noise_amplitude <= MAX_NOISE):
            raise NumericError('noise amplitude must lie in [0, %g], not %r'
                               % (MAX_NOISE, self.noise_amplitude))
        if not (0 <= self.ground_level <= 1):
            raise NumericError('ground level must lie in [0, 1], not %r' % (
                self.ground_level,
            ))
        object.__setattr__(self, 'barchans', tuple(self.barchans))


@dataclass(frozen=True)
class SceneTruth:

    displacement_px: Tuple[Tuple[float, float], ...]
    pixel_scale: float = 1.0
    date_a: date = date(1999, 3, 11)
    date_b: date = date(2007, 10, 13)

    def __post_init__(self):
        displacements = tuple(
            (float(dx), float(dy)) for dx, dy in self.displacement_px
        )
        for dx, dy in displacements:
            if not (isfinite(dx) and isfinite(dy)):
                raise NumericError('displacement must be finite')
        if not (isfinite(self.pixel_scale) and self.pixel_scale > 0):
            raise NumericError('pixel scale must be positive, not %r' % (
                self.pixel_scale,
            ))
        if self.date_b <= self.date_a:
            raise NumericError('dates must increase, got %s to %s' % (
                self.date_a, self.date_b
            ))
        object.__setattr__(self, 'displacement_px', displacements)


def _subpixel_grid(xs, ys):
    offsets = (numpy.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES - 0.5
    gx = xs[None, :, None, None] + offsets[None, None, None, :]
    gy = ys[:, None, None, None] + offsets[None, None, :, None]
    return gx, gy


def crescent_coverage(barchan: Barchan, width: int, height: int):
    """
    Fraction of each pixel covered by ``barchan``, estimated from a
    regular grid of sub-samples, as a ``height x width`` array.
    Pixel ``(x, y)`` is centred on integer coordinates.
    """
    coverage = numpy.zeros((height, width))
    cx, cy, r = barchan.center.x, barchan.center.y, barchan.radius
    x0 = max(0, floor(cx - r - 1))
    x1 = min(width, ceil(cx + r + 2))
    y0 = max(0, floor(cy - r - 1))
    y1 = min(height, ceil(cy + r + 2))
    if x0 >= x1 or y0 >= y1:
        return coverage
    gx, gy = _subpixel_grid(numpy.arange(x0, x1, dtype=float),
                            numpy.arange(y0, y1, dtype=float))
    hx = cx + HORN_OFFSET * r * cos(barchan.orientation)
    hy = cy + HORN_OFFSET * r * sin(barchan.orientation)
    inside = (gx - cx) ** 2 + (gy - cy) ** 2 <= r * r
    hollow = (gx - hx) ** 2 + (gy - hy) ** 2 <= (HOLLOW_RADIUS * r) ** 2
    coverage[y0:y1, x0:x1] = (inside & ~hollow).mean(axis=(2, 3))
    return coverage


def ground(params: SceneParams) -> numpy.ndarray:
    rng = numpy.random.default_rng(params.seed)
    noise = rng.uniform(-params.noise_amplitude, params.noise_amplitude,
                        size=(params.height, params.width))
    return params.ground_level + noise


def render(params: SceneParams, barchans, terrain, pixel_scale) -> Raster:
    image = terrain.copy()
    for barchan in barchans:
        coverage = crescent_coverage(barchan, params.width, params.height)
        image = image * (1 - coverage) + barchan.albedo * coverage
    return Raster.clipped(image, pixel_scale)


def generate_pair(p: SceneParams, truth: SceneTruth):
    """
    Render epoch A, and epoch B with every barchan moved by its true
    displacement over the same ground.
    """
    if len(truth.displacement_px) != len(p.barchans):
        raise NumericError('%i displacements given for %i barchans' % (
            len(truth.displacement_px), len(p.barchans)
        ))
    moved = []
    for number, (barchan, (dx, dy)) in enumerate(
            zip(p.barchans, truth.displacement_px), start=1
    ):
        after = barchan.moved(dx, dy)
        for epoch, candidate in ('A', barchan), ('B', after):
            if not candidate.fits(p.width, p.height):
                raise NumericError(
                    'barchan %i at (%g, %g) with radius %g is outside the '
                    '%ix%i frame in epoch %s' % (
                        number, candidate.center.x, candidate.center.y,
                        candidate.radius, p.width, p.height, epoch
                    ))
        moved.append(after)
    terrain = ground(p)
    epoch_a = render(p, p.barchans, terrain, truth.pixel_scale)
    epoch_b = render(p, moved, terrain, truth.pixel_scale)
    logger.debug('generated %ix%i scene with %i barchans from seed %i',
                 p.width, p.height, len(p.barchans), p.seed)
    return epoch_a, epoch_b, truth


def suggested_template(p: SceneParams, truth: SceneTruth, index: int = 0):
    """
    Template and search settings that track barchan ``index``: the
    template covers the dune with a margin and the search reaches past
    the true displacement.
    """
    barchan = p.barchans[index]
    dx, dy = truth.displacement_px[index]
    template = TemplateSpec(round(barchan.center.x), round(barchan.center.y),
                            max(2, ceil(1.2 * barchan.radius)))
    search = SearchSpec(max(16, ceil(hypot(dx, dy)) + 4))
    return template, search


def params_to_dict(p: SceneParams):
    data = asdict(p)
    data['barchans'] = [
        dict(center=[b.center.x, b.center.y], radius=b.radius,
             orientation=b.orientation, albedo=b.albedo)
        for b in p.barchans
    ]
    return data


def params_from_dict(data) -> SceneParams:
    try:
        barchans = tuple(
            Barchan(SubpixelPoint(*b['center']), b['radius'],
                    b.get('orientation', 0.0), b.get('albedo', 0.2))
            for b in data.get('barchans', ())
        )
        return SceneParams(
            width=data['width'],
            height=data['height'],
            seed=data.get('seed', 0),
            noise_amplitude=data.get('noise_amplitude', 0.02),
            ground_level=data.get('ground_level', 0.6),
            barchans=barchans,
        )
    except (KeyError, TypeError) as e:
        raise ConfigError('bad scene parameters: %r' % e) from None


def write_scene(directory, p: SceneParams, truth: SceneTruth):
    """
    Write ``epoch_a.png``, ``epoch_b.png``, ``truth.json`` and a
    ``config.json`` ready for the pipeline into ``directory``.
    Returns the paths written.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    epoch_a, epoch_b, truth = generate_pair(p, truth)
    paths = dict(
        epoch_a=directory / 'epoch_a.png',
        epoch_b=directory / 'epoch_b.png',
        truth=directory / 'truth.json',
        config=directory / 'config.json',
    )
    save_image(epoch_a, paths['epoch_a'])
    save_image(epoch_b, paths['epoch_b'])
    write_json(paths['truth'], truth_report(
        truth, params_to_dict(p), ('epoch_a.png', 'epoch_b.png')
    ))
    config = dict(
        input_a='epoch_a.png',
        input_b='epoch_b.png',
        pixel_scale_a=truth.pixel_scale,
        pixel_scale_b=truth.pixel_scale,
        date_a=truth.date_a.isoformat(),
        date_b=truth.date_b.isoformat(),
        output_dir='run',
    )
    if p.barchans:
        template, search = suggested_template(p, truth)
        config.update(
            template=dict(x=template.x, y=template.y,
                          half_size=template.half_size),
            search=dict(max_shift=search.max_shift),
        )
    write_json(paths['config'], config)
    logger.info('wrote synthetic scene to %s', directory)
    return paths
