"""JSON and CSV interchange for systems, histograms, data sets and samples.

JSON floats rely on Python's shortest round-trip repr (at least 17
significant digits whenever needed); CSV cells are always printed with 17
significant digits.  Both writers are byte-deterministic for equal inputs.
"""

from __future__ import annotations

import csv
import json
from typing import IO

import numpy as np

from .errors import SchemaError
from .evaluate import SampleSet
from .histopolation import Histogram, HistoSolution
from .poly import PiecewisePolynomial
from .system import (
    DataSet,
    FractalSystem,
    ScaleFactors,
    VariantReport,
    make_partition,
)


def _require(cond: bool, message: str):
    if not cond:
        raise SchemaError(message)


def _number_list(obj, field: str) -> list[float]:
    _require(isinstance(obj, list) and len(obj) > 0, f"'{field}' must be a non-empty array")
    out = []
    for v in obj:
        _require(isinstance(v, (int, float)) and not isinstance(v, bool),
                 f"'{field}' must contain only numbers")
        out.append(float(v))
    return out


def _floats(values) -> list[float]:
    return [float(v) for v in np.asarray(values).ravel()]


# ---------------------------------------------------------------------------
# piecewise polynomials
# ---------------------------------------------------------------------------

def pp_to_obj(p: PiecewisePolynomial) -> dict:
    return {
        "breakpoints": _floats(p.breakpoints),
        "pieces": [_floats(c) for c in p.pieces],
    }


def pp_from_obj(obj) -> PiecewisePolynomial:
    _require(isinstance(obj, dict), "each shift map must be an object")
    _require(set(obj) <= {"breakpoints", "pieces"},
             "shift map keys are 'breakpoints' and 'pieces'")
    bps = _number_list(obj.get("breakpoints"), "breakpoints")
    pieces = obj.get("pieces")
    _require(isinstance(pieces, list) and len(pieces) == len(bps) - 1,
             "'pieces' must hold one coefficient list per breakpoint gap")
    coeffs = [_number_list(c, "pieces") for c in pieces]
    try:
        return PiecewisePolynomial(np.asarray(bps), [np.asarray(c) for c in coeffs])
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# ---------------------------------------------------------------------------
# system descriptors
# ---------------------------------------------------------------------------

def system_to_obj(sys: FractalSystem, source: str | None = None) -> dict:
    meta: dict = {}
    if sys.variant_tag is not None:
        meta["variant"] = sys.variant_tag
    if source is not None:
        meta["source"] = source
    obj = {
        "knots": _floats(sys.partition.knots),
        "alpha": _floats(sys.scales.alpha),
        "q": [pp_to_obj(q) for q in sys.shifts],
    }
    if meta:
        obj["meta"] = meta
    return obj


def system_from_obj(obj) -> FractalSystem:
    _require(isinstance(obj, dict), "system descriptor must be a JSON object")
    _require({"knots", "alpha", "q"} <= set(obj),
             "system descriptor needs 'knots', 'alpha' and 'q'")
    _require(set(obj) <= {"knots", "alpha", "q", "meta"},
             "unknown keys in system descriptor")
    knots = _number_list(obj["knots"], "knots")
    alpha = _number_list(obj["alpha"], "alpha")
    _require(len(alpha) == len(knots) - 1,
             "'alpha' must have one entry per mesh cell")
    q_objs = obj["q"]
    _require(isinstance(q_objs, list) and len(q_objs) == len(alpha),
             "'q' must have one shift map per mesh cell")
    meta = obj.get("meta", {})
    _require(isinstance(meta, dict), "'meta' must be an object")
    variant = meta.get("variant")
    _require(variant is None or isinstance(variant, str),
             "'meta.variant' must be a string")
    partition = make_partition(knots)
    shifts = [pp_from_obj(q) for q in q_objs]
    return FractalSystem(partition, ScaleFactors(np.asarray(alpha)), shifts,
                         variant_tag=variant)


# ---------------------------------------------------------------------------
# histograms and data sets
# ---------------------------------------------------------------------------

def histogram_to_obj(hist: Histogram) -> dict:
    return {
        "knots": _floats(hist.partition.knots),
        "frequencies": _floats(hist.frequencies),
    }


def histogram_from_obj(obj) -> Histogram:
    _require(isinstance(obj, dict), "histogram must be a JSON object")
    _require({"knots", "frequencies"} <= set(obj),
             "histogram needs 'knots' and 'frequencies'")
    knots = _number_list(obj["knots"], "knots")
    freqs = _number_list(obj["frequencies"], "frequencies")
    _require(len(freqs) == len(knots) - 1,
             "'frequencies' must have one entry per mesh cell")
    try:
        return Histogram(make_partition(knots), np.asarray(freqs))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def dataset_to_obj(data: DataSet) -> dict:
    return {"xs": _floats(data.xs), "ys": _floats(data.ys)}


def dataset_from_obj(obj) -> DataSet:
    _require(isinstance(obj, dict), "data set must be a JSON object")
    _require({"xs", "ys"} <= set(obj), "data set needs 'xs' and 'ys'")
    xs = _number_list(obj["xs"], "xs")
    ys = _number_list(obj["ys"], "ys")
    _require(len(xs) == len(ys), "'xs' and 'ys' must have equal length")
    return DataSet(np.asarray(xs), np.asarray(ys))


def variant_report_to_obj(report: VariantReport) -> dict:
    return {
        "variant": report.variant.value,
        "epsilon": None if report.epsilon is None else float(report.epsilon),
        "join_residuals": _floats(report.join_residuals),
        "endpoint_residuals": _floats(report.endpoint_residuals),
        "ck_order": report.ck_order,
    }


def solution_to_obj(sol: HistoSolution, source: str | None = None) -> dict:
    return {
        "system": None if sol.system is None else system_to_obj(sol.system, source),
        "feasible": sol.feasible,
        "targets": _floats(sol.targets),
        "areas": None if sol.areas is None else _floats(sol.areas),
        "residuals": None if sol.area_residuals is None else _floats(sol.area_residuals),
        "diagnostics": sol.diagnostics,
    }


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(obj, fh: IO[str]):
    json.dump(obj, fh, indent=2, ensure_ascii=False)
    fh.write("\n")


def _cell(x: float) -> str:
    return format(float(x), ".17g")


def write_samples_csv(samples: SampleSet, fh: IO[str]):
    """Rows `x,value,code`; duplicate abscissae stay adjacent, left first."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x", "value", "code"])
    for x, v, code in zip(samples.xs, samples.values, samples.codes):
        writer.writerow([_cell(x), _cell(v), code])


def write_points_csv(samples: SampleSet, fh: IO[str]):
    """Rows `x,y` for chaos-game point clouds."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x", "y"])
    for x, v in zip(samples.xs, samples.values):
        writer.writerow([_cell(x), _cell(v)])
