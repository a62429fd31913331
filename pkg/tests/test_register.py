from math import degrees, radians

import numpy
import pytest
from testfixtures import LogCapture, ShouldRaise, compare

from dune_edges.errors import ConfigError, NumericError
from dune_edges.raster import BoundaryPolicy, Raster, SubpixelPoint
from dune_edges.register import (
    ControlPointPair, SimilarityTransform, estimate_similarity,
    parse_control_points, read_control_points, residuals, rms,
    transform_from_scales, warp
)
from dune_edges.testing import random_raster, smooth_raster


def pairs_for(xf, points):
    return [ControlPointPair(SubpixelPoint(x, y), xf.apply(SubpixelPoint(x, y)))
            for x, y in points]


def check_transform(actual, scale, rotation, translation, tolerance=1e-9):
    assert actual.scale == pytest.approx(scale, abs=tolerance)
    assert actual.rotation == pytest.approx(rotation, abs=tolerance)
    assert actual.translation[0] == pytest.approx(translation[0], abs=tolerance)
    assert actual.translation[1] == pytest.approx(translation[1], abs=tolerance)


class TestSimilarityTransform:

    def test_identity(self):
        p = SubpixelPoint(3.5, -2)
        compare(SimilarityTransform.identity().apply(p), expected=p)

    def test_apply(self):
        xf = SimilarityTransform(2, radians(90), (1, 0))
        q = xf.apply(SubpixelPoint(1, 0))
        assert q.x == pytest.approx(1, abs=1e-12)
        assert q.y == pytest.approx(2, abs=1e-12)

    def test_matrix(self):
        xf = SimilarityTransform(3.0, radians(2), (4.5, -1.25))
        point = numpy.array([7.0, -3.0, 1.0])
        q = xf.apply(SubpixelPoint(7, -3))
        numpy.testing.assert_allclose(xf.matrix @ point, [q.x, q.y, 1],
                                      atol=1e-12)

    def test_inverse(self):
        xf = SimilarityTransform(3.0, radians(2), (4.5, -1.25))
        check_transform(xf.inverse().compose(xf), 1, 0, (0, 0), 1e-12)
        check_transform(xf.compose(xf.inverse()), 1, 0, (0, 0), 1e-12)

    def test_compose(self):
        first = SimilarityTransform(2, radians(30), (1, 2))
        second = SimilarityTransform(0.5, radians(-10), (-3, 4))
        p = SubpixelPoint(5, -7)
        expected = second.apply(first.apply(p))
        actual = second.compose(first).apply(p)
        assert actual.x == pytest.approx(expected.x, abs=1e-12)
        assert actual.y == pytest.approx(expected.y, abs=1e-12)

    def test_bad_scale(self):
        with ShouldRaise(NumericError(
                'scale must be positive and finite, not 0'
        )):
            SimilarityTransform(0)

    def test_bad_translation(self):
        with ShouldRaise(NumericError('translation must be finite')):
            SimilarityTransform(translation=(float('inf'), 0))

    def test_as_dict(self):
        xf = SimilarityTransform(2, radians(90), (5, 0))
        actual = xf.as_dict()
        assert actual.pop('rotation_deg') == pytest.approx(90)
        compare(actual, expected={'scale': 2, 'translation': [5.0, 0.0]})

    def test_str(self):
        compare(str(SimilarityTransform(2, 0, (5, -1))),
                expected='scale 2, rotation 0 deg, translation (5, -1)')


class TestEstimateSimilarity:

    def test_identity(self):
        points = [(0, 0), (10, 0), (3, 7)]
        fitted = estimate_similarity(pairs_for(SimilarityTransform(), points))
        check_transform(fitted, 1, 0, (0, 0))

    def test_recovers_transform(self):
        xf = SimilarityTransform(3.0, radians(2), (4.5, -1.25))
        pairs = pairs_for(xf, [(0, 0), (100, 0), (0, 80), (57, 33)])
        fitted = estimate_similarity(pairs)
        check_transform(fitted, 3.0, radians(2), (4.5, -1.25))
        assert residuals(pairs, fitted).max() <= 1e-9

    def test_two_pairs(self):
        pairs = [
            ControlPointPair(SubpixelPoint(0, 0), SubpixelPoint(5, 0)),
            ControlPointPair(SubpixelPoint(1, 0), SubpixelPoint(5, 2)),
        ]
        fitted = estimate_similarity(pairs)
        check_transform(fitted, 2, radians(90), (5, 0))
        assert degrees(fitted.rotation) == pytest.approx(90)

    def test_fixed_scale(self):
        xf = SimilarityTransform(1.5, radians(-20), (3, 4))
        pairs = pairs_for(xf, [(0, 0), (40, 10), (-5, 30)])
        fitted = estimate_similarity(pairs, scale=1.5)
        check_transform(fitted, 1.5, radians(-20), (3, 4))

    def test_least_squares(self):
        xf = SimilarityTransform(1.2, radians(5), (2, -3))
        points = [(0, 0), (50, 0), (0, 50), (50, 50), (25, 10)]
        rng = numpy.random.default_rng(3)
        pairs = [
            ControlPointPair(p.source, SubpixelPoint(p.target.x + dx,
                                                     p.target.y + dy))
            for p, (dx, dy) in zip(pairs_for(xf, points),
                                   rng.normal(0, 0.1, size=(5, 2)))
        ]
        fitted = estimate_similarity(pairs)
        check_transform(fitted, 1.2, radians(5), (2, -3), tolerance=0.5)
        # any other transform fits no better
        for other in xf, SimilarityTransform(1.21, fitted.rotation,
                                             fitted.translation):
            assert rms(residuals(pairs, fitted)) <= rms(residuals(pairs, other))

    def test_exact_pair_does_not_worsen_fit(self):
        xf = SimilarityTransform(0.8, radians(12), (1, 1))
        pairs = pairs_for(xf, [(0, 0), (30, 5)])
        pairs.append(ControlPointPair(SubpixelPoint(3, 3),
                                      SubpixelPoint(50, 50)))
        fitted = estimate_similarity(pairs)
        before = (residuals(pairs, fitted) ** 2).sum()
        extra = pairs_for(fitted, [(12, -4)])
        refitted = estimate_similarity(pairs + extra)
        after = (residuals(pairs + extra, refitted) ** 2).sum()
        assert after <= before + 1e-9

    def test_too_few(self):
        with ShouldRaise(NumericError(
                'need at least 2 control point pairs, got 1'
        )):
            estimate_similarity(pairs_for(SimilarityTransform(), [(0, 0)]))

    def test_coincident_sources(self):
        pairs = [
            ControlPointPair(SubpixelPoint(1, 1), SubpixelPoint(0, 0)),
            ControlPointPair(SubpixelPoint(1, 1), SubpixelPoint(5, 5)),
        ]
        with ShouldRaise(NumericError('control point sources all coincide')):
            estimate_similarity(pairs)

    def test_coincident_targets(self):
        pairs = [
            ControlPointPair(SubpixelPoint(0, 0), SubpixelPoint(2, 2)),
            ControlPointPair(SubpixelPoint(1, 1), SubpixelPoint(2, 2)),
        ]
        with ShouldRaise(NumericError('control point targets all coincide')):
            estimate_similarity(pairs)

    def test_logging(self):
        pairs = [
            ControlPointPair(SubpixelPoint(0, 0), SubpixelPoint(1, 1)),
            ControlPointPair(SubpixelPoint(1, 0), SubpixelPoint(2, 1)),
        ]
        with LogCapture() as log:
            estimate_similarity(pairs)
        log.check(('dune_edges.register', 'INFO',
                   'fitted scale 1, rotation 0 deg, translation (1, 1) to 2 '
                   'control points, rms error 0 px'))


class TestControlPoints:

    def test_parse(self):
        pairs = parse_control_points([
            '# sx sy tx ty',
            '1 2 3 4',
            '',
            '5.5 -6 7e1 8  # toe of the dune',
        ])
        compare(pairs, expected=[
            ControlPointPair(SubpixelPoint(1, 2), SubpixelPoint(3, 4)),
            ControlPointPair(SubpixelPoint(5.5, -6), SubpixelPoint(70, 8)),
        ])

    def test_wrong_count(self):
        with ShouldRaise(ConfigError('points.txt line 2: expected 4 values, '
                                     'got 3')):
            parse_control_points(['1 2 3 4', '1 2 3'], 'points.txt')

    def test_not_a_number(self):
        with ShouldRaise(ConfigError(
                "<string> line 1: could not convert string to float: 'x'"
        )):
            parse_control_points(['1 2 x 4'])

    def test_not_finite(self):
        with ShouldRaise(ConfigError(
                '<string> line 1: point must be finite, not (nan, 2.0)'
        )):
            parse_control_points(['nan 2 3 4'])

    def test_read(self, dir):
        path = dir.write('points.txt', b'0 0 5 0\n1 0 5 2\n')
        compare(len(read_control_points(path)), expected=2)

    def test_read_missing(self, dir):
        with ShouldRaise(ConfigError):
            read_control_points(dir.getpath('missing.txt'))


class TestWarp:

    def test_identity(self):
        r = random_raster(0)
        compare(warp(r, SimilarityTransform(), r.width, r.height), expected=r)

    def test_translation(self):
        r = Raster([[0, 0.25, 0.5, 1]])
        out = warp(r, SimilarityTransform(translation=(1, 0)), 4, 1)
        compare(out.samples.tolist(), expected=[[0, 0, 0.25, 0.5]])

    def test_translation_zero_boundary(self):
        r = Raster([[0.5, 0.25, 0.5, 1]])
        out = warp(r, SimilarityTransform(translation=(1, 0)), 4, 1,
                   BoundaryPolicy.ZERO)
        compare(out.samples.tolist(), expected=[[0, 0.5, 0.25, 0.5]])

    def test_constant(self):
        r = Raster.constant(10, 8, 0.5)
        out = warp(r, SimilarityTransform(1.7, radians(33), (2.2, -5)), 12, 6)
        numpy.testing.assert_allclose(out.samples, 0.5, atol=1e-12)

    def test_round_trip(self):
        r = smooth_raster()
        xf = SimilarityTransform(1.0, radians(5), (2, 1))
        there = warp(r, xf, r.width, r.height)
        back = warp(there, xf.inverse(), r.width, r.height)
        error = numpy.abs(back.samples - r.samples)[16:48, 16:48]
        assert error.max() <= 0.02

    def test_nearest(self):
        r = Raster([[0, 0.25, 0.5, 1]])
        out = warp(r, SimilarityTransform(translation=(0.6, 0)), 4, 1,
                   interpolation='nearest')
        compare(out.samples.tolist(), expected=[[0, 0, 0.25, 0.5]])

    def test_pixel_scale(self):
        r = Raster.constant(4, 4, 0.5, pixel_scale=2.0)
        compare(warp(r, transform_from_scales(2.0, 1.0), 8, 8).pixel_scale,
                expected=1.0)

    def test_bad_size(self):
        with ShouldRaise(NumericError('cannot warp to 0x3')):
            warp(random_raster(0), SimilarityTransform(), 0, 3)

    def test_bad_interpolation(self):
        with ShouldRaise(NumericError("unknown interpolation: 'cubic'")):
            warp(random_raster(0), SimilarityTransform(), 3, 3,
                 interpolation='cubic')


class TestTransformFromScales:

    def test_scale(self):
        compare(transform_from_scales(2.0, 0.5),
                expected=SimilarityTransform(4.0))

    def test_bad(self):
        with ShouldRaise(NumericError('pixel scale must be positive, not -1')):
            transform_from_scales(-1, 1)
