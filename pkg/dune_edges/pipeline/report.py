import json
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from math import hypot, isfinite
from pathlib import Path

from dune_edges.displacement import MatchResult, years_between
from dune_edges.errors import ImageIOError, NumericError

DISTRIBUTION = 'dune_edges'

NUMBER = (int, float)
NOTHING = type(None)

#: Top-level keys of a report and the JSON types each may hold.
REPORT_SCHEMA = {
    'inputs': (dict,),
    'parameters': (dict,),
    'registration': (dict, NOTHING),
    'offset_px': (list, NOTHING),
    'peak_score': NUMBER + (NOTHING,),
    'offset_m': (list, NOTHING),
    'interval_yr': NUMBER + (NOTHING,),
    'rate_m_per_yr': NUMBER + (NOTHING,),
    'artifacts': (list,),
    'version': (str,),
    'created': (str,),
}

VECTOR_KEYS = ('offset_px', 'offset_m')


def tool_version() -> str:
    try:
        return version(DISTRIBUTION)
    except PackageNotFoundError:
        return 'unknown'


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


def _check_finite(value, where):
    if isinstance(value, bool):
        return
    if isinstance(value, float) and not isfinite(value):
        raise NumericError('report value %s is not finite: %r' % (where, value))
    if isinstance(value, dict):
        for key, item in value.items():
            _check_finite(item, '%s.%s' % (where, key))
    elif isinstance(value, list):
        for index, item in enumerate(value):
            _check_finite(item, '%s[%i]' % (where, index))


def validate_report(report):
    missing = set(REPORT_SCHEMA) - set(report)
    if missing:
        raise NumericError('report is missing %s' % ', '.join(sorted(missing)))
    for key, types in REPORT_SCHEMA.items():
        value = report[key]
        if isinstance(value, bool) or not isinstance(value, types):
            raise NumericError('report %s has unexpected value %r' % (
                key, value
            ))
    for key in VECTOR_KEYS:
        value = report[key]
        if value is not None and (
                len(value) != 2 or
                not all(isinstance(v, NUMBER) and not isinstance(v, bool)
                        for v in value)
        ):
            raise NumericError('report %s must be two numbers, not %r' % (
                key, value
            ))
    if not all(isinstance(a, str) for a in report['artifacts']):
        raise NumericError('report artifacts must be paths')
    _check_finite(report, 'report')
    return report


def build_report(inputs, parameters, match: MatchResult = None,
                 registration=None, artifacts=()):
    report = dict(
        inputs=inputs,
        parameters=parameters,
        registration=registration,
        offset_px=None,
        peak_score=None,
        offset_m=None,
        interval_yr=None,
        rate_m_per_yr=None,
        artifacts=list(artifacts),
        version=tool_version(),
        created=timestamp(),
    )
    if match is not None:
        report.update(match.as_dict())
    return validate_report(report)


def truth_report(truth, scene, inputs):
    """
    A report holding the true motion of the first barchan of a
    synthetic scene, so measured reports can be checked against it.
    """
    offset_px = offset_m = rate = None
    if truth.displacement_px:
        dx, dy = truth.displacement_px[0]
        offset_px = [dx, dy]
        offset_m = [dx * truth.pixel_scale, dy * truth.pixel_scale]
    interval = years_between(truth.date_a, truth.date_b)
    if offset_m is not None:
        rate = hypot(*offset_m) / interval
    return validate_report(dict(
        inputs=dict(a=inputs[0], b=inputs[1]),
        parameters=dict(
            scene=scene,
            displacement_px=[list(d) for d in truth.displacement_px],
            pixel_scale=truth.pixel_scale,
            date_a=truth.date_a.isoformat(),
            date_b=truth.date_b.isoformat(),
        ),
        registration=None,
        offset_px=offset_px,
        peak_score=None,
        offset_m=offset_m,
        interval_yr=interval,
        rate_m_per_yr=rate,
        artifacts=list(inputs),
        version=tool_version(),
        created=timestamp(),
    ))


def write_json(path, data) -> Path:
    path = Path(path)
    text = json.dumps(data, indent=2, sort_keys=True, allow_nan=False)
    try:
        path.write_text(text + '\n')
    except OSError as e:
        raise ImageIOError('cannot write %s: %s' % (path, e)) from None
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise ImageIOError('cannot read %s: %s' % (path, e)) from None
