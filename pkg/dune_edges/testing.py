from contextlib import contextmanager
from math import sqrt
from typing import Iterable

import numpy

from dune_edges.displacement import SearchSpec, TemplateSpec
from dune_edges.filters import (
    EdgeOperator, Kernel, LAPLACE_4, OperatorKind, gaussian_kernel_1d,
    kernel_for
)
from dune_edges.raster import BoundaryPolicy, Raster, sample
from dune_edges.synthgen import write_scene


def random_raster(seed: int, width: int = 16, height: int = 12,
                  pixel_scale=None) -> Raster:
    rng = numpy.random.default_rng(seed)
    return Raster(rng.uniform(0, 1, size=(height, width)), pixel_scale)


def smooth_raster(width: int = 64, height: int = 64, phase: float = 0.0,
                  pixel_scale=None) -> Raster:
    # long wavelengths keep bilinear interpolation error small
    ys, xs = numpy.mgrid[0:height, 0:width].astype(float)
    values = (
        0.5 +
        0.2 * numpy.sin(2 * numpy.pi * xs / 23.0 + phase) *
        numpy.cos(2 * numpy.pi * ys / 31.0) +
        0.15 * numpy.sin(2 * numpy.pi * (xs + 2 * ys) / 41.0)
    )
    return Raster(values, pixel_scale)


def step_raster(width: int = 4, height: int = 4, column: int = 2) -> Raster:
    "Zero left of ``column``, one from it onwards."
    values = numpy.zeros((height, width))
    values[:, column:] = 1.0
    return Raster(values)


def shifted(r: Raster, dx: int, dy: int,
            policy: BoundaryPolicy = BoundaryPolicy.CLAMP) -> Raster:
    "Move the content of ``r`` by whole pixels, filling per ``policy``."
    values = numpy.empty(r.shape)
    for y in range(r.height):
        for x in range(r.width):
            values[y, x] = sample(r, x - dx, y - dy, policy)
    return r.with_samples(values)


def convolve_direct(r: Raster, k: Kernel,
                    policy: BoundaryPolicy = BoundaryPolicy.CLAMP):
    anchor_x, anchor_y = k.anchor
    out = numpy.zeros(r.shape)
    for y in range(r.height):
        for x in range(r.width):
            total = 0.0
            for j in range(k.height):
                for i in range(k.width):
                    total += k.weights[j, i] * sample(
                        r, x + i - anchor_x, y + j - anchor_y, policy
                    )
            out[y, x] = total
    return out


def gaussian_kernel_2d(radius: float) -> Kernel:
    weights = gaussian_kernel_1d(radius)
    return Kernel(numpy.outer(weights, weights))


def edge_response_direct(r: Raster, op: EdgeOperator,
                         policy: BoundaryPolicy = BoundaryPolicy.CLAMP):
    "Edge magnitudes built only from :func:`convolve_direct`."
    if op.is_gradient_pair:
        kernel_x, kernel_y = kernel_for(op)
        magnitude = numpy.hypot(convolve_direct(r, kernel_x, policy),
                                convolve_direct(r, kernel_y, policy)) / op.gain
    elif op.kind is OperatorKind.LAPLACE:
        magnitude = numpy.abs(convolve_direct(r, LAPLACE_4, policy)) / op.gain
    else:
        blurs = [
            numpy.clip(convolve_direct(r, gaussian_kernel_2d(radius), policy),
                       0, 1)
            for radius in (op.radius_small, op.radius_large)
        ]
        magnitude = numpy.abs(blurs[0] - blurs[1])
    return numpy.clip(magnitude, 0, 1)


def ncc_direct(a: Raster, b: Raster, tpl: TemplateSpec, search: SearchSpec):
    "Correlation scores computed one offset and one pixel at a time."
    h = tpl.half_size
    m = search.max_shift
    template = [
        float(a.samples[tpl.y + j, tpl.x + i])
        for j in range(-h, h + 1) for i in range(-h, h + 1)
    ]
    template_mean = sum(template) / len(template)
    scores = numpy.full((2 * m + 1, 2 * m + 1), -numpy.inf)
    for v in range(-m, m + 1):
        for u in range(-m, m + 1):
            window = [
                float(b.samples[tpl.y + v + j, tpl.x + u + i])
                for j in range(-h, h + 1) for i in range(-h, h + 1)
            ]
            window_mean = sum(window) / len(window)
            cross = template_energy = window_energy = 0.0
            for t, w in zip(template, window):
                cross += (t - template_mean) * (w - window_mean)
                template_energy += (t - template_mean) ** 2
                window_energy += (w - window_mean) ** 2
            if window_energy > 1e-12:
                scores[v + m, u + m] = cross / sqrt(
                    template_energy * window_energy
                )
    return scores


@contextmanager
def scene_directory(params, truth) -> Iterable[dict]:
    """
    Write a synthetic scene into a temporary directory and yield the
    paths of what was written.
    """
    from testfixtures import TempDirectory
    with TempDirectory() as directory:
        yield write_scene(directory.path, params, truth)
