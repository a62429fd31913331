import json
from dataclasses import dataclass
from datetime import date
from math import isfinite
from pathlib import Path
from typing import Optional

from dune_edges.compose import BlendMode
from dune_edges.displacement import SearchSpec, TemplateSpec
from dune_edges.errors import ConfigError, DuneEdgesError
from dune_edges.filters import EdgeOperator, SOBEL
from dune_edges.raster import BoundaryPolicy
from dune_edges.register import INTERPOLATIONS
from dune_edges.tone import ToneParams

IMAGE_FORMATS = ('png', 'pgm')

PATH_KEYS = ('input_a', 'input_b', 'control_points', 'output_dir')

KNOWN_KEYS = frozenset((
    'input_a', 'input_b', 'pixel_scale_a', 'pixel_scale_b',
    'date_a', 'date_b', 'tone', 'operator', 'dog', 'boundary',
    'threshold', 'binarize', 'blend', 'control_points', 'template',
    'search', 'crop_a', 'crop_b', 'interpolation', 'output_dir',
    'image_format',
))


@dataclass(frozen=True)
class CropSpec:

    x: int
    y: int
    width: int
    height: int

    def as_dict(self):
        return dict(x=self.x, y=self.y, width=self.width, height=self.height)


def _section(data, key):
    value = data.get(key)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError('%s must be a mapping, not %r' % (key, value))
    return value


def _number(value, key, optional=False):
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError('%s must be a number, not %r' % (key, value))
    if not isfinite(value):
        raise ConfigError('%s must be finite, not %r' % (key, value))
    return float(value)


def _integer(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError('%s must be an integer, not %r' % (key, value))
    return value


def _boolean(value, key):
    if not isinstance(value, bool):
        raise ConfigError('%s must be true or false, not %r' % (key, value))
    return value


def _date(value, key):
    if value is None:
        return None
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(value)
    except (TypeError, ValueError):
        raise ConfigError('%s must be an ISO date (YYYY-MM-DD), not %r' % (
            key, value
        )) from None


def _choice(enum, value, key):
    try:
        return enum(value)
    except ValueError:
        raise ConfigError('%s must be one of %s, not %r' % (
            key, ', '.join(member.value for member in enum), value
        )) from None


def _pixel_scale(value, key):
    value = _number(value, key, optional=True)
    if value is not None and value <= 0:
        raise ConfigError('%s must be positive, not %r' % (key, value))
    return value


def _crop(data, key):
    section = _section(data, key)
    if not section:
        return None
    try:
        return CropSpec(*(_integer(section.get(name), '%s.%s' % (key, name))
                          for name in ('x', 'y', 'width', 'height')))
    except TypeError:
        raise ConfigError('%s needs x, y, width and height' % key) from None


@dataclass(frozen=True)
class PipelineConfig:
    """
    Everything a pipeline run needs. Build one with :meth:`from_dict`
    so values are checked.
    """

    input_a: Path
    input_b: Path
    output_dir: Path
    pixel_scale_a: Optional[float] = None
    pixel_scale_b: Optional[float] = None
    date_a: Optional[date] = None
    date_b: Optional[date] = None
    tone: ToneParams = ToneParams()
    operator: EdgeOperator = SOBEL
    boundary: BoundaryPolicy = BoundaryPolicy.CLAMP
    threshold: float = 0.1
    binarize: bool = False
    blend: BlendMode = BlendMode.MULTIPLY
    opacity: float = 1.0
    control_points: Optional[Path] = None
    template: Optional[TemplateSpec] = None
    search: SearchSpec = SearchSpec()
    crop_a: Optional[CropSpec] = None
    crop_b: Optional[CropSpec] = None
    interpolation: str = 'bilinear'
    image_format: str = 'png'

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ConfigError('unknown config keys: %s' % ', '.join(
                sorted(unknown)
            ))
        for key in 'input_a', 'input_b', 'output_dir':
            if not data.get(key):
                raise ConfigError('%s is required' % key)
        try:
            return cls._from_dict(data)
        except ConfigError:
            raise
        except DuneEdgesError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def _from_dict(cls, data):
        tone = _section(data, 'tone')
        dog = _section(data, 'dog')
        blend = _section(data, 'blend')
        template = _section(data, 'template')
        search = _section(data, 'search')

        operator = EdgeOperator.named(
            data.get('operator', 'sobel'),
            _number(dog.get('radius_small', 1.0), 'dog.radius_small'),
            _number(dog.get('radius_large', 3.0), 'dog.radius_large'),
        )

        threshold = _number(data.get('threshold', 0.1), 'threshold')
        if not 0 <= threshold <= 1:
            raise ConfigError('threshold must lie in [0, 1], not %r' % threshold)
        opacity = _number(blend.get('opacity', 1.0), 'blend.opacity')
        if not 0 <= opacity <= 1:
            raise ConfigError('blend.opacity must lie in [0, 1], not %r'
                              % opacity)

        date_a = _date(data.get('date_a'), 'date_a')
        date_b = _date(data.get('date_b'), 'date_b')
        if date_a and date_b and date_b <= date_a:
            raise ConfigError('date_b must be after date_a, got %s and %s' % (
                date_a, date_b
            ))

        interpolation = data.get('interpolation', 'bilinear')
        if interpolation not in INTERPOLATIONS:
            raise ConfigError('interpolation must be one of %s, not %r' % (
                ', '.join(INTERPOLATIONS), interpolation
            ))
        image_format = data.get('image_format', 'png')
        if image_format not in IMAGE_FORMATS:
            raise ConfigError('image_format must be one of %s, not %r' % (
                ', '.join(IMAGE_FORMATS), image_format
            ))

        tpl = None
        if template:
            try:
                tpl = TemplateSpec(
                    _integer(template['x'], 'template.x'),
                    _integer(template['y'], 'template.y'),
                    _integer(template.get('half_size', 8),
                             'template.half_size'),
                )
            except KeyError as e:
                raise ConfigError('template needs %s' % e) from None

        control_points = data.get('control_points')

        result = cls(
            input_a=Path(data['input_a']),
            input_b=Path(data['input_b']),
            output_dir=Path(data['output_dir']),
            pixel_scale_a=_pixel_scale(data.get('pixel_scale_a'),
                                       'pixel_scale_a'),
            pixel_scale_b=_pixel_scale(data.get('pixel_scale_b'),
                                       'pixel_scale_b'),
            date_a=date_a,
            date_b=date_b,
            tone=ToneParams(
                _number(tone.get('brightness', 0.0), 'tone.brightness'),
                _number(tone.get('contrast', 0.0), 'tone.contrast'),
            ),
            operator=operator,
            boundary=_choice(BoundaryPolicy, data.get('boundary', 'clamp'),
                             'boundary'),
            threshold=threshold,
            binarize=_boolean(data.get('binarize', False), 'binarize'),
            blend=_choice(BlendMode, blend.get('mode', 'multiply'),
                          'blend.mode'),
            opacity=opacity,
            control_points=Path(control_points) if control_points else None,
            template=tpl,
            search=SearchSpec(_integer(search.get('max_shift', 16),
                                       'search.max_shift')),
            crop_a=_crop(data, 'crop_a'),
            crop_b=_crop(data, 'crop_b'),
            interpolation=interpolation,
            image_format=image_format,
        )
        if (result.measuring and (date_a or date_b) and
                result.meters_per_pixel is None):
            raise ConfigError('a rate needs pixel_scale_a or pixel_scale_b '
                              'as well as dates')
        return result

    @property
    def measuring(self) -> bool:
        return self.template is not None

    @property
    def meters_per_pixel(self) -> Optional[float]:
        "Ground resolution of the frame displacement is measured in."
        if self.pixel_scale_a is not None:
            return self.pixel_scale_a
        return self.pixel_scale_b

    def as_dict(self):
        "The parameters echoed into a run report."
        return dict(
            pixel_scale_a=self.pixel_scale_a,
            pixel_scale_b=self.pixel_scale_b,
            date_a=None if self.date_a is None else self.date_a.isoformat(),
            date_b=None if self.date_b is None else self.date_b.isoformat(),
            tone=dict(brightness=self.tone.brightness,
                      contrast=self.tone.contrast),
            operator=self.operator.as_dict(),
            boundary=self.boundary.value,
            threshold=self.threshold,
            binarize=self.binarize,
            blend=dict(mode=self.blend.value, opacity=self.opacity),
            control_points=(None if self.control_points is None
                            else str(self.control_points)),
            template=None if self.template is None else dict(
                x=self.template.x, y=self.template.y,
                half_size=self.template.half_size,
            ),
            search=dict(max_shift=self.search.max_shift),
            crop_a=None if self.crop_a is None else self.crop_a.as_dict(),
            crop_b=None if self.crop_b is None else self.crop_b.as_dict(),
            interpolation=self.interpolation,
            image_format=self.image_format,
        )


def load_config(path):
    """
    Read a JSON config file. Relative paths in it are taken relative to
    the directory holding the file.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError('cannot read config %s: %s' % (path, e)) from None
    except ValueError as e:
        raise ConfigError('config %s is not valid JSON: %s' % (path, e)) from None
    if not isinstance(data, dict):
        raise ConfigError('config %s must hold a JSON object' % path)
    for key in PATH_KEYS:
        value = data.get(key)
        if value:
            data[key] = str(path.parent / value)
    return data


def merge(base, overrides):
    """
    Lay ``overrides`` over ``base``, merging nested mappings key by key
    and ignoring override values that are ``None``.
    """
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            merged[key] = merge(merged.get(key) or {}, value)
        else:
            merged[key] = value
    return merged
