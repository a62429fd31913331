import json
import logging
import sys
from argparse import ArgumentParser
from datetime import date
from logging import getLogger
from pathlib import Path

from dune_edges.compose import BlendMode, blend
from dune_edges.displacement import (
    SearchSpec, TemplateSpec, ncc_match, to_physical
)
from dune_edges.errors import ConfigError, DuneEdgesError
from dune_edges.filters import (
    EdgeOperator, OperatorKind, edge_response, threshold_edges
)
from dune_edges.pipeline.config import (
    IMAGE_FORMATS, PipelineConfig, load_config, merge
)
from dune_edges.pipeline.io import load_image, save_image
from dune_edges.pipeline.run import REPORT_NAME, run
from dune_edges.raster import BoundaryPolicy, SubpixelPoint
from dune_edges.register import (
    INTERPOLATIONS, estimate_similarity, read_control_points,
    transform_from_scales, warp
)
from dune_edges.synthgen import (
    Barchan, SceneParams, SceneTruth, params_from_dict, write_scene
)
from dune_edges.tone import ToneParams, adjust, invert

logger = getLogger(__name__)

LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'

OPERATORS = [kind.value for kind in OperatorKind]
BOUNDARIES = [policy.value for policy in BoundaryPolicy]
BLENDS = [mode.value for mode in BlendMode]


def iso_date(text):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ConfigError('not an ISO date (YYYY-MM-DD): %r' % text) from None


def add_tone_options(parser):
    parser.add_argument('--brightness', type=float)
    parser.add_argument('--contrast', type=float)


def add_edge_options(parser):
    parser.add_argument('--operator', choices=OPERATORS)
    parser.add_argument('--dog-small', type=float,
                        help='smaller blur radius of the dog operator')
    parser.add_argument('--dog-large', type=float,
                        help='larger blur radius of the dog operator')
    parser.add_argument('--boundary', choices=BOUNDARIES)
    parser.add_argument('--threshold', type=float)
    parser.add_argument('--binarize', action='store_true', default=None)


def add_blend_options(parser):
    parser.add_argument('--blend', choices=BLENDS)
    parser.add_argument('--opacity', type=float)


def add_template_options(parser, required=False):
    parser.add_argument('--template-x', type=int, required=required)
    parser.add_argument('--template-y', type=int, required=required)
    parser.add_argument('--template-half', type=int)
    parser.add_argument('--search', type=int,
                        help='largest shift searched, in pixels')


def run_overrides(args):
    "The config keys given as flags to the run command."
    return dict(
        input_a=args.input_a,
        input_b=args.input_b,
        output_dir=args.out,
        pixel_scale_a=args.mpp_a,
        pixel_scale_b=args.mpp_b,
        date_a=args.date_a,
        date_b=args.date_b,
        tone=dict(brightness=args.brightness, contrast=args.contrast),
        operator=args.operator,
        dog=dict(radius_small=args.dog_small, radius_large=args.dog_large),
        boundary=args.boundary,
        threshold=args.threshold,
        binarize=args.binarize,
        blend=dict(mode=args.blend, opacity=args.opacity),
        control_points=args.control_points,
        template=dict(x=args.template_x, y=args.template_y,
                      half_size=args.template_half),
        search=dict(max_shift=args.search),
        interpolation=args.interpolation,
        image_format=args.format,
    )


def do_run(args):
    base = load_config(args.config) if args.config else {}
    config = PipelineConfig.from_dict(merge(base, run_overrides(args)))
    run(config)
    print(config.output_dir / REPORT_NAME)
    return 0


def do_edge(args):
    operator = EdgeOperator.named(args.operator or 'sobel',
                                  args.dog_small or 1.0, args.dog_large or 3.0)
    boundary = BoundaryPolicy(args.boundary or 'clamp')
    raster = load_image(args.input)
    raster = adjust(raster, ToneParams(args.brightness or 0.0,
                                       args.contrast or 0.0))
    edges = edge_response(raster, operator, boundary)
    if args.threshold is not None:
        edges = threshold_edges(edges, args.threshold, bool(args.binarize))
    result = edges.magnitude
    if args.invert:
        result = invert(result)
    save_image(result, args.output)
    return 0


def do_compose(args):
    base = load_image(args.base)
    layer = load_image(args.layer)
    if args.invert_layer:
        layer = invert(layer)
    opacity = 1.0 if args.opacity is None else args.opacity
    save_image(blend(base, layer, BlendMode(args.blend or 'multiply'), opacity),
               args.output)
    return 0


def do_register(args):
    moving = load_image(args.moving, args.mpp_moving)
    fixed = load_image(args.fixed, args.mpp_fixed)
    seeded = None
    if moving.pixel_scale is not None and fixed.pixel_scale is not None:
        seeded = transform_from_scales(moving.pixel_scale, fixed.pixel_scale)
    if args.control_points:
        pairs = read_control_points(args.control_points)
        scale = seeded.scale if (seeded and args.fix_scale) else None
        transform = estimate_similarity(pairs, scale=scale)
    elif seeded is not None:
        transform = seeded
    else:
        raise ConfigError('register needs control points or both pixel scales')
    warped = warp(moving, transform, fixed.width, fixed.height,
                  BoundaryPolicy(args.boundary or 'clamp'), args.interpolation)
    save_image(warped, args.output)
    print(json.dumps(transform.as_dict(), sort_keys=True))
    return 0


def do_measure(args):
    a = load_image(args.image_a)
    b = load_image(args.image_b)
    template = TemplateSpec(args.template_x, args.template_y,
                            args.template_half or 8)
    search = SearchSpec(args.search or 16)
    match = ncc_match(a, b, template, search)
    if args.mpp is not None:
        match = to_physical(match, args.mpp, args.date_a, args.date_b)
    elif args.date_a or args.date_b:
        raise ConfigError('a rate needs --mpp as well as dates')
    print(json.dumps(match.as_dict(), sort_keys=True))
    return 0


def do_synth(args):
    if args.params:
        try:
            data = json.loads(Path(args.params).read_text())
        except (OSError, ValueError) as e:
            raise ConfigError('cannot read scene parameters: %s' % e) from None
        params = params_from_dict(data)
        displacements = data.get('displacement_px') or [
            (args.dx, args.dy)
        ] * len(params.barchans)
    else:
        center = SubpixelPoint(
            args.width / 2 if args.center_x is None else args.center_x,
            args.height / 2 if args.center_y is None else args.center_y,
        )
        params = SceneParams(
            width=args.width,
            height=args.height,
            seed=args.seed,
            noise_amplitude=args.noise,
            ground_level=args.ground,
            barchans=(Barchan(center, args.radius, args.orientation,
                              args.albedo),),
        )
        displacements = [(args.dx, args.dy)]
    truth = SceneTruth(displacements, args.mpp, args.date_a, args.date_b)
    paths = write_scene(args.output_dir, params, truth)
    print(paths['config'])
    return 0


def make_parser():
    parser = ArgumentParser(
        prog='dune-edges',
        description='Compare two images of the same terrain by edge overlays '
                    'and measure how far features moved.',
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    commands = parser.add_subparsers(dest='command', required=True)

    command = commands.add_parser('run', help='the full pipeline')
    command.set_defaults(handler=do_run)
    command.add_argument('--config', help='JSON config file')
    command.add_argument('--input-a')
    command.add_argument('--input-b')
    command.add_argument('--out', help='output directory')
    command.add_argument('--mpp-a', type=float, help='metres per pixel of A')
    command.add_argument('--mpp-b', type=float, help='metres per pixel of B')
    command.add_argument('--date-a')
    command.add_argument('--date-b')
    command.add_argument('--control-points')
    command.add_argument('--interpolation', choices=INTERPOLATIONS)
    command.add_argument('--format', choices=IMAGE_FORMATS)
    add_tone_options(command)
    add_edge_options(command)
    add_blend_options(command)
    add_template_options(command)

    command = commands.add_parser('edge', help='edge map of one image')
    command.set_defaults(handler=do_edge)
    command.add_argument('input')
    command.add_argument('output')
    command.add_argument('--invert', action='store_true')
    add_tone_options(command)
    add_edge_options(command)

    command = commands.add_parser('compose', help='blend a layer onto a base')
    command.set_defaults(handler=do_compose)
    command.add_argument('base')
    command.add_argument('layer')
    command.add_argument('output')
    command.add_argument('--invert-layer', action='store_true')
    add_blend_options(command)

    command = commands.add_parser(
        'register', help='warp an image into the frame of another'
    )
    command.set_defaults(handler=do_register)
    command.add_argument('moving')
    command.add_argument('fixed')
    command.add_argument('output')
    command.add_argument('--control-points')
    command.add_argument('--mpp-moving', type=float)
    command.add_argument('--mpp-fixed', type=float)
    command.add_argument('--fix-scale', action='store_true',
                         help='hold scale at the pixel scale ratio')
    command.add_argument('--boundary', choices=BOUNDARIES)
    command.add_argument('--interpolation', choices=INTERPOLATIONS,
                         default='bilinear')

    command = commands.add_parser(
        'measure', help='displacement of a feature between two images'
    )
    command.set_defaults(handler=do_measure)
    command.add_argument('image_a')
    command.add_argument('image_b')
    add_template_options(command, required=True)
    command.add_argument('--mpp', type=float)
    command.add_argument('--date-a', type=iso_date)
    command.add_argument('--date-b', type=iso_date)

    command = commands.add_parser('synth', help='write a synthetic scene')
    command.set_defaults(handler=do_synth)
    command.add_argument('output_dir')
    command.add_argument('--params', help='JSON scene parameters')
    command.add_argument('--width', type=int, default=512)
    command.add_argument('--height', type=int, default=512)
    command.add_argument('--seed', type=int, default=0)
    command.add_argument('--noise', type=float, default=0.02)
    command.add_argument('--ground', type=float, default=0.6)
    command.add_argument('--center-x', type=float)
    command.add_argument('--center-y', type=float)
    command.add_argument('--radius', type=float, default=40.0)
    command.add_argument('--orientation', type=float, default=0.0)
    command.add_argument('--albedo', type=float, default=0.2)
    command.add_argument('--dx', type=float, default=12.0)
    command.add_argument('--dy', type=float, default=-5.0)
    command.add_argument('--mpp', type=float, default=1.0)
    command.add_argument('--date-a', type=iso_date,
                         default=date(1999, 3, 11))
    command.add_argument('--date-b', type=iso_date,
                         default=date(2007, 10, 13))
    return parser


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    try:
        return args.handler(args)
    except DuneEdgesError as e:
        logger.error('%s', e)
        return e.exit_code


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
