"""Counting functions N(V), weighted counts and log-log exponent fits."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .enumeration import IsotropicSet
from .sphere import WeightFunction

# Admissible power saving in the error term; carried as metadata only.
ERROR_EXPONENT_DELTA = Fraction(4, 697633)
SPHERE_MEASURE = "unit total measure (integral of a weight = its (0,0) coefficient)"
ALL_ORBITS_NOTE = "non-unimodular lattice: counts include every primitive isotropic vector, not one orbit"


class CountingError(ValueError):
    pass


@dataclass
class CountTable:
    thresholds: list[Fraction]
    counts: list[int]
    exponent_expected: int
    uncertain: list[int] = field(default_factory=list)
    paper_delta: Fraction = ERROR_EXPONENT_DELTA
    plane_descriptor: dict = field(default_factory=dict)
    mode: str = "exact"
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise CountingError("thresholds must be increasing")
        if not self.uncertain:
            self.uncertain = [0] * len(self.counts)

    def fitted_constant(self) -> float:
        """``N(V_max) / V_max^(p+q-2)``."""
        return self.counts[-1] / float(self.thresholds[-1]) ** self.exponent_expected

    def to_csv(self, window=None) -> str:
        slope = None
        try:
            slope, _ = fit_exponent(self, window)
        except CountingError:
            pass
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["V", "N", "logV", "logN", "fitted_slope", "boundary_uncertain"])
        for V, N, u in zip(self.thresholds, self.counts, self.uncertain):
            w.writerow([str(V), N, repr(math.log(V)), repr(math.log(N)) if N > 0 else "",
                        "" if slope is None else repr(slope), u])
        return buf.getvalue()

    def summary(self, window=None) -> dict:
        out = {
            "thresholds": [str(V) for V in self.thresholds],
            "counts": list(self.counts),
            "boundary_uncertain": list(self.uncertain),
            "exponent_expected": self.exponent_expected,
            "paper_delta": str(self.paper_delta),
            "plane": self.plane_descriptor,
            "mode": self.mode,
            "sphere_measure": SPHERE_MEASURE,
            "fitted_constant": self.fitted_constant() if self.counts else None,
            "notes": list(self.notes),
        }
        try:
            slope, stderr = fit_exponent(self, window)
            out.update(fitted_slope=slope, slope_stderr=stderr)
        except CountingError as exc:
            out.update(fitted_slope=None, fit_note=str(exc))
        return out

    def to_json(self, window=None) -> str:
        return json.dumps(self.summary(window), indent=2, sort_keys=True) + "\n"


def _snorm_and_flags(records) -> tuple[list, np.ndarray, np.ndarray, bool]:
    if isinstance(records, IsotropicSet):
        return list(records.snorm), records.halfwidth, records.uncertain, records.exact
    recs = list(records)
    snorm = [r.snorm_sq for r in recs]
    hw = np.array([r.snorm_halfwidth for r in recs])
    unc = np.array([r.boundary_uncertain for r in recs], dtype=bool)
    exact = all(isinstance(s, Fraction) for s in snorm)
    return snorm, hw, unc, exact


def _within(snorm, hw, exact: bool, V) -> tuple[np.ndarray, np.ndarray]:
    if not snorm:
        return np.zeros(0, dtype=bool), np.zeros(0, dtype=bool)
    if exact:
        v2 = Fraction(V) ** 2
        return np.array([s <= v2 for s in snorm], dtype=bool), np.zeros(len(snorm), dtype=bool)
    v2 = float(V) ** 2
    s = np.array(snorm, dtype=float)
    certain = s + hw <= v2
    return certain, ~certain & (s - hw <= v2)


def count_table(records, thresholds: Sequence, exponent_expected: int | None = None) -> CountTable:
    """``N(V_i)`` = number of records with ``|e|_P <= V_i``; float-mode straddlers counted apart."""
    thresholds = [Fraction(V) for V in thresholds]
    plane_desc, mode, notes = {}, "exact", []
    if isinstance(records, IsotropicSet):
        lat = records.plane.lattice
        p, _, q = lat.signature
        exponent_expected = p + q - 2 if exponent_expected is None else exponent_expected
        plane_desc, mode = records.plane.describe(), records.plane.mode
        notes = list(lat.warnings) + ([] if lat.is_unimodular else [ALL_ORBITS_NOTE])
    if exponent_expected is None:
        raise CountingError("exponent_expected is needed when records carry no lattice")
    snorm, hw, unc, exact = _snorm_and_flags(records)
    if not exact:
        mode = "float"
    counts, uncertain = [], []
    for V in thresholds:
        certain, straddle = _within(snorm, hw, exact, V)
        counts.append(int(certain.sum()))
        uncertain.append(int(straddle.sum()))
    return CountTable(thresholds, counts, exponent_expected, uncertain, plane_descriptor=plane_desc, mode=mode,
                      notes=notes)


def weighted_count(records, w: WeightFunction, V) -> float:
    """``sum w(direction(e))`` over records with ``|e|_P <= V``."""
    if isinstance(records, IsotropicSet):
        dirs = records.directions
    else:
        records = list(records)
        dirs = np.array([r.direction for r in records], dtype=float).reshape(len(records), -1)
    if dirs.shape[1] != 3:
        raise CountingError("weights live on S^2: the plane must be 3-dimensional")
    snorm, hw, unc, exact = _snorm_and_flags(records)
    certain, _ = _within(snorm, hw, exact, V)
    if not certain.any():
        return 0.0
    return math.fsum(w(dirs[certain]))


def _window_indices(table: CountTable, window) -> range:
    k = len(table.thresholds)
    if window is None:
        return range(k)
    if isinstance(window, slice):
        return range(k)[window]
    lo, hi = window
    return range(lo, hi)


def fit_exponent(table: CountTable, window=None) -> tuple[float, float]:
    """Least-squares slope of ``log N`` against ``log V`` and its standard error."""
    idx = [i for i in _window_indices(table, window) if table.counts[i] > 0]
    if len(idx) < 3:
        raise CountingError("need at least 3 thresholds with positive counts")
    x = np.array([math.log(table.thresholds[i]) for i in idx])
    y = np.array([math.log(table.counts[i]) for i in idx])
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - ym - slope * (x - xm)
    stderr = math.sqrt(float(np.sum(resid ** 2)) / (len(idx) - 2) / sxx)
    return slope, stderr


def two_point_slope(n_low: int, n_high: int, v_low, v_high) -> float:
    return math.log(n_high / n_low) / math.log(float(v_high) / float(v_low))


def ratio_ladder(table: CountTable) -> list[float]:
    """``N(V) / V^(p+q-2)`` along the thresholds (sanity band only)."""
    return [N / float(V) ** table.exponent_expected for V, N in zip(table.thresholds, table.counts)]
