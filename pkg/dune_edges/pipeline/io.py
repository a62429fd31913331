import re
from logging import getLogger
from pathlib import Path
from typing import Optional

import numpy
from PIL import Image

from dune_edges.errors import ImageIOError
from dune_edges.raster import Raster, dequantize, quantize

logger = getLogger(__name__)

LUMINANCE_WEIGHTS = (0.2126, 0.7152, 0.0722)
PGM_MAGIC = (b'P2', b'P5')
SIXTEEN_BIT_MODES = ('I', 'I;16', 'I;16B', 'I;16L', 'I;16N', 'F')
COMMENT = re.compile(rb'#[^\n]*')


def _pgm_header(data: bytes):
    tokens = []
    position = 0
    while len(tokens) < 4:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if position >= len(data):
            raise ImageIOError('truncated PGM header')
        if data[position:position + 1] == b'#':
            end = data.find(b'\n', position)
            position = len(data) if end < 0 else end + 1
            continue
        start = position
        while position < len(data) and not data[position:position + 1].isspace():
            position += 1
        tokens.append(data[start:position])
    # a single whitespace byte separates the header from the samples
    return tokens, position + 1


def decode_pgm(data: bytes) -> numpy.ndarray:
    "Decode a plain (P2) or raw (P5) 8-bit PGM into a byte grid."
    tokens, position = _pgm_header(data)
    magic = tokens[0]
    if magic not in PGM_MAGIC:
        raise ImageIOError('not a PGM file: magic %r' % magic)
    try:
        width, height, maxval = (int(token) for token in tokens[1:])
    except ValueError:
        raise ImageIOError('malformed PGM header: %r' % tokens) from None
    if width < 1 or height < 1:
        raise ImageIOError('PGM of %ix%i has no samples' % (width, height))
    if maxval > 255:
        raise ImageIOError(
            '16-bit PGM (maxval %i) is not supported, convert to 8-bit' % maxval
        )
    if maxval != 255:
        raise ImageIOError('PGM maxval must be 255, not %i' % maxval)
    count = width * height
    if magic == b'P5':
        if len(data) - position < count:
            raise ImageIOError('PGM holds %i of %i samples' % (
                max(0, len(data) - position), count
            ))
        values = numpy.frombuffer(data, dtype=numpy.uint8, count=count,
                                  offset=position)
    else:
        fields = COMMENT.sub(b'', data[position - 1:]).split()
        if len(fields) < count:
            raise ImageIOError('PGM holds %i of %i samples' % (
                len(fields), count
            ))
        try:
            values = numpy.array([int(f) for f in fields[:count]])
        except ValueError:
            raise ImageIOError('non-numeric sample in plain PGM') from None
        if values.min() < 0 or values.max() > maxval:
            raise ImageIOError('PGM sample outside [0, %i]' % maxval)
    return values.reshape(height, width).astype(numpy.uint8)


def encode_pgm(data: numpy.ndarray) -> bytes:
    height, width = data.shape
    header = b'P5\n%d %d\n255\n' % (width, height)
    return header + numpy.ascontiguousarray(data, dtype=numpy.uint8).tobytes()


def luminance(rgb: numpy.ndarray) -> numpy.ndarray:
    "8-bit luminance of an 8-bit ``height x width x 3`` RGB grid."
    weighted = rgb[..., :3].astype(float) @ numpy.array(LUMINANCE_WEIGHTS)
    return numpy.clip(numpy.floor(weighted + 0.5), 0, 255).astype(numpy.uint8)


def _raw_mode(image) -> str:
    "How the decoder reads the stored samples, e.g. ``RGB;16B``."
    if not image.tile:
        return ''
    rawmode = image.tile[0][3]
    if isinstance(rawmode, tuple):
        rawmode = rawmode[0]
    return rawmode if isinstance(rawmode, str) else ''


def _decode_png(path):
    with Image.open(path) as image:
        mode = image.mode
        if ';16' in _raw_mode(image):
            raise ImageIOError(
                '%s: 16-bit samples are not supported, only 8-bit grey or RGB'
                % path
            )
        image.load()
        if mode in SIXTEEN_BIT_MODES:
            raise ImageIOError(
                '%s: %s images are not supported, only 8-bit grey or RGB' % (
                    path, mode
                ))
        if mode in ('1', 'L', 'LA'):
            return numpy.asarray(image.convert('L'))
        if mode in ('P', 'RGB', 'RGBA'):
            return luminance(numpy.asarray(image.convert('RGB')))
        raise ImageIOError('%s: unsupported image mode %s' % (path, mode))


def load_image(path, pixel_scale: Optional[float] = None) -> Raster:
    """
    Load an 8-bit PGM (P2 or P5) or PNG as a raster. Colour images are
    reduced to 8-bit luminance first.
    """
    path = Path(path)
    try:
        with path.open('rb') as source:
            magic = source.read(2)
        if magic in PGM_MAGIC:
            data = decode_pgm(path.read_bytes())
        else:
            data = _decode_png(path)
    except ImageIOError:
        raise
    except OSError as e:
        raise ImageIOError('cannot read %s: %s' % (path, e)) from None
    logger.debug('loaded %ix%i image from %s', data.shape[1], data.shape[0],
                 path)
    return dequantize(data, pixel_scale)


def save_image(r: Raster, path) -> Path:
    """
    Write ``r`` as 8-bit grey, choosing PGM (P5) or PNG from the
    extension of ``path``.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    data = quantize(r)
    try:
        if suffix == '.pgm':
            path.write_bytes(encode_pgm(data))
        elif suffix == '.png':
            Image.fromarray(data).save(path, format='PNG')
        else:
            raise ImageIOError('cannot tell image format from extension %r of %s'
                               % (suffix, path))
    except ImageIOError:
        raise
    except OSError as e:
        raise ImageIOError('cannot write %s: %s' % (path, e)) from None
    logger.debug('saved %ix%i image to %s', r.width, r.height, path)
    return path
