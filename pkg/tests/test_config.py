import json
from datetime import date
from pathlib import Path

import pytest
from testfixtures import ShouldRaise, compare

from dune_edges.compose import BlendMode
from dune_edges.displacement import SearchSpec, TemplateSpec
from dune_edges.errors import ConfigError
from dune_edges.filters import EdgeOperator, LAPLACE, SOBEL
from dune_edges.pipeline.config import (
    CropSpec, PipelineConfig, load_config, merge
)
from dune_edges.raster import BoundaryPolicy
from dune_edges.tone import ToneParams

MINIMAL = dict(input_a='a.png', input_b='b.png', output_dir='out')


def config(**values):
    return PipelineConfig.from_dict(dict(MINIMAL, **values))


class TestFromDict:

    def test_defaults(self):
        compare(config(), expected=PipelineConfig(
            input_a=Path('a.png'),
            input_b=Path('b.png'),
            output_dir=Path('out'),
        ))

    def test_default_values(self):
        actual = config()
        compare(actual.threshold, expected=0.1)
        compare(actual.operator, expected=SOBEL)
        compare(actual.boundary, expected=BoundaryPolicy.CLAMP)
        compare(actual.blend, expected=BlendMode.MULTIPLY)
        compare(actual.opacity, expected=1.0)
        compare(actual.search, expected=SearchSpec(16))
        compare(actual.tone, expected=ToneParams(0, 0))
        compare(actual.interpolation, expected='bilinear')
        compare(actual.image_format, expected='png')
        compare(actual.measuring, expected=False)

    def test_everything(self):
        actual = config(
            pixel_scale_a=0.5,
            pixel_scale_b=1.5,
            date_a='1999-03-11',
            date_b='2007-10-13',
            tone=dict(brightness=0.1, contrast=0.2),
            operator='dog',
            dog=dict(radius_small=2, radius_large=5),
            boundary='reflect',
            threshold=0.3,
            binarize=True,
            blend=dict(mode='darken', opacity=0.5),
            control_points='points.txt',
            template=dict(x=10, y=20, half_size=4),
            search=dict(max_shift=6),
            crop_a=dict(x=1, y=2, width=30, height=40),
            interpolation='nearest',
            image_format='pgm',
        )
        compare(actual, expected=PipelineConfig(
            input_a=Path('a.png'),
            input_b=Path('b.png'),
            output_dir=Path('out'),
            pixel_scale_a=0.5,
            pixel_scale_b=1.5,
            date_a=date(1999, 3, 11),
            date_b=date(2007, 10, 13),
            tone=ToneParams(0.1, 0.2),
            operator=EdgeOperator.dog(2, 5),
            boundary=BoundaryPolicy.REFLECT,
            threshold=0.3,
            binarize=True,
            blend=BlendMode.DARKEN,
            opacity=0.5,
            control_points=Path('points.txt'),
            template=TemplateSpec(10, 20, 4),
            search=SearchSpec(6),
            crop_a=CropSpec(1, 2, 30, 40),
            interpolation='nearest',
            image_format='pgm',
        ))
        compare(actual.measuring, expected=True)
        compare(actual.meters_per_pixel, expected=0.5)

    def test_meters_per_pixel_from_b(self):
        compare(config(pixel_scale_b=2).meters_per_pixel, expected=2.0)
        compare(config().meters_per_pixel, expected=None)

    def test_unknown_key(self):
        with ShouldRaise(ConfigError('unknown config keys: colour, size')):
            config(colour='red', size=3)

    @pytest.mark.parametrize('key', ['input_a', 'input_b', 'output_dir'])
    def test_required(self, key):
        data = dict(MINIMAL)
        del data[key]
        with ShouldRaise(ConfigError('%s is required' % key)):
            PipelineConfig.from_dict(data)

    def test_bad_operator(self):
        with ShouldRaise(ConfigError("unknown edge operator: 'canny'")):
            config(operator='canny')

    def test_bad_dog(self):
        with ShouldRaise(ConfigError(
                'dog radii must satisfy 0 < small < large <= 50, '
                'got 4.0 and 2.0'
        )):
            config(operator='dog', dog=dict(radius_small=4, radius_large=2))

    def test_laplace(self):
        compare(config(operator='laplace').operator, expected=LAPLACE)

    def test_bad_boundary(self):
        with ShouldRaise(ConfigError(
                "boundary must be one of clamp, wrap, reflect, zero, not 'mirror'"
        )):
            config(boundary='mirror')

    def test_bad_threshold(self):
        with ShouldRaise(ConfigError('threshold must lie in [0, 1], not 1.5')):
            config(threshold=1.5)

    def test_threshold_not_a_number(self):
        with ShouldRaise(ConfigError("threshold must be a number, not 'high'")):
            config(threshold='high')

    @pytest.mark.parametrize('value', ['false', 0, 1])
    def test_binarize_not_boolean(self, value):
        with ShouldRaise(ConfigError(
                'binarize must be true or false, not %r' % value
        )):
            config(binarize=value)

    @pytest.mark.parametrize('dates', [
        dict(date_a='2000-01-01'),
        dict(date_b='2008-01-01'),
        dict(date_a='2000-01-01', date_b='2008-01-01'),
    ])
    def test_dates_need_pixel_scale_when_measuring(self, dates):
        with ShouldRaise(ConfigError(
                'a rate needs pixel_scale_a or pixel_scale_b as well as dates'
        )):
            config(template=dict(x=5, y=6), **dates)

    def test_dates_without_measuring(self):
        compare(config(date_a='2000-01-01').date_a, expected=date(2000, 1, 1))
        compare(config(template=dict(x=5, y=6), pixel_scale_b=2,
                       date_a='2000-01-01').meters_per_pixel, expected=2.0)

    def test_bad_opacity(self):
        with ShouldRaise(ConfigError(
                'blend.opacity must lie in [0, 1], not -0.5'
        )):
            config(blend=dict(opacity=-0.5))

    def test_bad_tone(self):
        with ShouldRaise(ConfigError('brightness must lie in [-1, 1], not 3.0')):
            config(tone=dict(brightness=3))

    def test_bad_date(self):
        with ShouldRaise(ConfigError(
                "date_a must be an ISO date (YYYY-MM-DD), not '11/03/1999'"
        )):
            config(date_a='11/03/1999')

    def test_dates_backwards(self):
        with ShouldRaise(ConfigError(
                'date_b must be after date_a, got 2001-01-01 and 2000-01-01'
        )):
            config(date_a='2001-01-01', date_b='2000-01-01')

    def test_bad_pixel_scale(self):
        with ShouldRaise(ConfigError('pixel_scale_a must be positive, not 0.0')):
            config(pixel_scale_a=0)

    def test_template_needs_position(self):
        with ShouldRaise(ConfigError("template needs 'y'")):
            config(template=dict(x=3))

    def test_template_too_small(self):
        with ShouldRaise(ConfigError(
                'template half size must be at least 2, not 1'
        )):
            config(template=dict(x=3, y=3, half_size=1))

    def test_search_not_integer(self):
        with ShouldRaise(ConfigError(
                'search.max_shift must be an integer, not 2.5'
        )):
            config(search=dict(max_shift=2.5))

    def test_bad_crop(self):
        with ShouldRaise(ConfigError(
                'crop_b.height must be an integer, not None'
        )):
            config(crop_b=dict(x=0, y=0, width=3))

    def test_section_not_mapping(self):
        with ShouldRaise(ConfigError('tone must be a mapping, not 0.5')):
            config(tone=0.5)

    def test_bad_interpolation(self):
        with ShouldRaise(ConfigError(
                "interpolation must be one of bilinear, nearest, not 'cubic'"
        )):
            config(interpolation='cubic')

    def test_bad_format(self):
        with ShouldRaise(ConfigError(
                "image_format must be one of png, pgm, not 'tiff'"
        )):
            config(image_format='tiff')

    def test_as_dict(self):
        compare(config(template=dict(x=5, y=6)).as_dict(), expected=dict(
            pixel_scale_a=None,
            pixel_scale_b=None,
            date_a=None,
            date_b=None,
            tone=dict(brightness=0.0, contrast=0.0),
            operator=dict(name='sobel'),
            boundary='clamp',
            threshold=0.1,
            binarize=False,
            blend=dict(mode='multiply', opacity=1.0),
            control_points=None,
            template=dict(x=5, y=6, half_size=8),
            search=dict(max_shift=16),
            crop_a=None,
            crop_b=None,
            interpolation='bilinear',
            image_format='png',
        ))

    def test_as_dict_is_json(self):
        json.dumps(config(date_a='2000-01-01', control_points='p.txt').as_dict())


class TestLoadConfig:

    def test_relative_paths(self, dir):
        path = dir.write('sub/config.json', json.dumps(dict(
            input_a='a.png', input_b='/abs/b.png', output_dir='run',
            control_points='points.txt', threshold=0.2,
        )).encode())
        compare(load_config(path), expected=dict(
            input_a=dir.getpath('sub/a.png'),
            input_b='/abs/b.png',
            output_dir=dir.getpath('sub/run'),
            control_points=dir.getpath('sub/points.txt'),
            threshold=0.2,
        ))

    def test_missing(self, dir):
        with ShouldRaise(ConfigError):
            load_config(dir.getpath('missing.json'))

    def test_not_json(self, dir):
        path = dir.write('config.json', b'{nope')
        with ShouldRaise(ConfigError) as s:
            load_config(path)
        assert 'is not valid JSON' in str(s.raised)

    def test_not_object(self, dir):
        path = dir.write('config.json', b'[1, 2]')
        with ShouldRaise(ConfigError('config %s must hold a JSON object' % path)):
            load_config(path)


class TestMerge:

    def test_override(self):
        compare(merge(dict(a=1, b=2), dict(b=3, c=4)),
                expected=dict(a=1, b=3, c=4))

    def test_none_ignored(self):
        compare(merge(dict(a=1), dict(a=None, b=None)), expected=dict(a=1))

    def test_nested(self):
        compare(merge(dict(tone=dict(brightness=0.1, contrast=0.2)),
                      dict(tone=dict(brightness=None, contrast=0.5))),
                expected=dict(tone=dict(brightness=0.1, contrast=0.5)))

    def test_nested_new(self):
        compare(merge({}, dict(search=dict(max_shift=None))),
                expected=dict(search={}))

    def test_base_untouched(self):
        base = dict(tone=dict(brightness=0.1))
        merge(base, dict(tone=dict(brightness=0.2)))
        compare(base, expected=dict(tone=dict(brightness=0.1)))
