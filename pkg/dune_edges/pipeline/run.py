from contextlib import contextmanager
from logging import getLogger, DEBUG, INFO, WARNING
from pathlib import Path

from dune_edges.compose import blend, side_by_side
from dune_edges.displacement import ncc_match, period_str, to_physical
from dune_edges.errors import ConfigError, StageError
from dune_edges.filters import edge_response, threshold_edges
from dune_edges.pipeline.config import PipelineConfig
from dune_edges.pipeline.io import load_image, save_image
from dune_edges.pipeline.report import build_report, write_json
from dune_edges.raster import crop
from dune_edges.register import (
    estimate_similarity, read_control_points, transform_from_scales, warp
)
from dune_edges.tone import adjust, invert

logger = getLogger(__name__)

#: The stages of a run, in the order they execute.
STAGES = (
    'load', 'register', 'tone', 'edge', 'threshold', 'invert', 'compose',
    'measure', 'write',
)

REPORT_NAME = 'report.json'


@contextmanager
def stage(name, stage_logging=DEBUG):
    logger.log(stage_logging, 'stage %s', name)
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e


def registration_for(config: PipelineConfig, fixed, moving):
    """
    The transform taking ``moving`` into the frame of ``fixed``, or
    ``None`` when the two already share a frame.
    """
    if config.control_points is not None:
        pairs = read_control_points(config.control_points)
        return estimate_similarity(pairs)
    if (fixed.pixel_scale is not None and moving.pixel_scale is not None and
            fixed.pixel_scale != moving.pixel_scale):
        logger.warning(
            'no control points, registering from pixel scales %g and %g '
            'only', moving.pixel_scale, fixed.pixel_scale
        )
        return transform_from_scales(moving.pixel_scale, fixed.pixel_scale)
    return None


class Run:
    """
    One pass of the pipeline over a pair of images. Artifacts are
    written to the output directory and removed again if any later
    stage fails.
    """

    def __init__(self, config: PipelineConfig, stage_logging=DEBUG,
                 result_logging=INFO):
        self.config = config
        self.stage_logging = stage_logging
        self.result_logging = result_logging
        self.written = []
        self.created_dir = False

    def stage(self, name):
        return stage(name, self.stage_logging)

    def artifact(self, name):
        return '%s.%s' % (name, self.config.image_format)

    def save(self, raster, name):
        path = self.config.output_dir / name
        self.written.append(path)
        save_image(raster, path)
        return name

    def load(self):
        config = self.config
        rasters = []
        for path, scale, window in (
                (config.input_a, config.pixel_scale_a, config.crop_a),
                (config.input_b, config.pixel_scale_b, config.crop_b),
        ):
            if not Path(path).is_file():
                raise ConfigError('input %s does not exist' % path)
            raster = load_image(path, scale)
            if window is not None:
                raster = crop(raster, window.x, window.y,
                              window.width, window.height)
            rasters.append(raster)
        return rasters

    def execute(self):
        config = self.config
        images = {}

        with self.stage('load'):
            a, b = self.load()

        registered = None
        with self.stage('register'):
            transform = registration_for(config, a, b)
            if transform is not None:
                b = registered = warp(b, transform, a.width, a.height,
                                      config.boundary, config.interpolation)
                logger.log(self.result_logging, 'registered B onto A: %s',
                           transform)

        with self.stage('tone'):
            a, b = adjust(a, config.tone), adjust(b, config.tone)

        with self.stage('edge'):
            edges = [edge_response(r, config.operator, config.boundary)
                     for r in (a, b)]

        with self.stage('threshold'):
            edges = [threshold_edges(e, config.threshold, config.binarize)
                     for e in edges]

        with self.stage('invert'):
            layers = [invert(e.magnitude) for e in edges]

        with self.stage('compose'):
            composites = [blend(base, layer, config.blend, config.opacity)
                          for base, layer in zip((a, b), layers)]
            comparison = side_by_side(*composites)

        match = None
        with self.stage('measure'):
            if config.measuring:
                match = ncc_match(a, b, config.template, config.search)
                mpp = config.meters_per_pixel
                if mpp is not None:
                    match = to_physical(match, mpp, config.date_a,
                                        config.date_b, self.result_logging)
                logger.log(self.result_logging,
                           'offset (%.3f, %.3f) px, score %.4f, %s',
                           *match.offset_px, match.peak_score,
                           period_str(config.date_a, config.date_b))

        with self.stage('write'):
            self.created_dir = not config.output_dir.exists()
            config.output_dir.mkdir(parents=True, exist_ok=True)
            for name, raster in (
                    ('composite_a', composites[0]),
                    ('composite_b', composites[1]),
                    ('edges_a', edges[0].magnitude),
                    ('edges_b', edges[1].magnitude),
                    ('comparison', comparison),
            ):
                images[name] = self.save(raster, self.artifact(name))
            if registered is not None:
                images['registered_b'] = self.save(
                    registered, self.artifact('registered_b')
                )
            report = build_report(
                inputs=dict(a=str(config.input_a), b=str(config.input_b)),
                parameters=config.as_dict(),
                match=match,
                registration=None if transform is None else transform.as_dict(),
                artifacts=sorted(images.values()),
            )
            path = config.output_dir / REPORT_NAME
            self.written.append(path)
            write_json(path, report)

        logger.log(self.result_logging, 'wrote %i artifacts and %s to %s',
                   len(images), REPORT_NAME, config.output_dir)
        return report

    def clean_up(self):
        for path in self.written:
            path.unlink(missing_ok=True)
        directory = self.config.output_dir
        if (self.created_dir and directory.is_dir() and
                not any(directory.iterdir())):
            directory.rmdir()
        if self.written:
            logger.log(WARNING, 'removed %i partial outputs from %s',
                       len(self.written), directory)


def run(config: PipelineConfig, **logging_levels):
    """
    Run the whole pipeline: load, register, tone, edge, threshold,
    invert, compose, measure and write ``report.json``. Returns the
    report. On failure, a :class:`~dune_edges.errors.StageError` names
    the stage and nothing is left in the output directory.
    """
    current = Run(config, **logging_levels)
    try:
        return current.execute()
    except Exception:
        current.clean_up()
        raise
