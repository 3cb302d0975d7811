"""Domain types for mixtures, censored bins and estimates, plus dB helpers.

Estimation runs entirely in the linear power domain (mW); dB shows up only
at I/O boundaries.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .gamma_core import GammaParams

ESTIMATE_FIELDS = ("ld", "alpha1", "m1", "omega1", "m2", "omega2",
                   "mean1_db", "mean2_db", "loss_fraction")


def db_to_linear(v):
    """dBm -> mW."""
    v = np.asarray(v, dtype=float)
    out = 10.0 ** (v / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(p):
    """mW -> dBm. Requires p > 0."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("linear power must be > 0")
    out = 10.0 * np.log10(p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MixtureParams:
    """Two-component Gamma mixture: comp1 = signal, comp2 = interference."""

    alpha1: float
    comp1: GammaParams
    comp2: GammaParams

    def __post_init__(self):
        if not (0.0 <= self.alpha1 <= 1.0):
            raise ValueError(f"alpha1 must be in [0, 1], got {self.alpha1}")

    @property
    def alpha2(self) -> float:
        return 1.0 - self.alpha1


def mixture_mean_db(params: MixtureParams, component: int) -> float:
    """dBm value of the chosen component's Gamma mean, 10*log10(m*omega)."""
    if component == 1:
        comp = params.comp1
    elif component == 2:
        comp = params.comp2
    else:
        raise ValueError(f"component must be 1 or 2, got {component}")
    return linear_to_db(comp.mean)


@dataclass(frozen=True)
class CensoredBin:
    """One distance bin: received linear powers plus the censored count.

    ``observed`` holds only received samples, all strictly above the linear
    threshold; ``r1 = n_total - len(observed)`` packets were lost.
    """

    ld: float
    observed: np.ndarray
    n_total: int
    r1: int
    c_db: float

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=float)
        object.__setattr__(self, "observed", obs)
        if self.r1 != self.n_total - obs.size or self.r1 < 0:
            raise ValueError(
                f"inconsistent counts: n_total={self.n_total}, "
                f"observed={obs.size}, r1={self.r1}")
        if obs.size and np.any(obs <= self.c_lin):
            raise ValueError("observed samples must be strictly above the "
                             "censoring threshold")

    @property
    def c_lin(self) -> float:
        return db_to_linear(self.c_db)

    @property
    def loss_fraction(self) -> float:
        return self.r1 / self.n_total if self.n_total else 0.0


@dataclass(frozen=True)
class BinEstimate:
    """Per-bin estimate with the dBm component means spelled out."""

    ld: float
    params: MixtureParams
    mean1_db: float
    mean2_db: float
    loss_fraction: float

    @classmethod
    def from_params(cls, ld, params, loss_fraction):
        return cls(ld=ld, params=params,
                   mean1_db=mixture_mean_db(params, 1),
                   mean2_db=mixture_mean_db(params, 2),
                   loss_fraction=loss_fraction)

    def as_row(self) -> dict:
        return {
            "ld": self.ld,
            "alpha1": self.params.alpha1,
            "m1": self.params.comp1.m,
            "omega1": self.params.comp1.omega,
            "m2": self.params.comp2.m,
            "omega2": self.params.comp2.omega,
            "mean1_db": self.mean1_db,
            "mean2_db": self.mean2_db,
            "loss_fraction": self.loss_fraction,
        }


@dataclass(frozen=True)
class PathLossLine:
    """Straight-line median path loss: value(ld) = A - B * ld."""

    A: float
    B: float

    def __post_init__(self):
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise ValueError("A and B must be finite")

    def value_at(self, ld):
        return self.A - self.B * np.asarray(ld, dtype=float)


def write_estimates(path, rows, statuses=None):
    """Write the per-bin estimates CSV. ``rows`` maps 1:1 to bins; entries
    may be BinEstimate or dicts with at least ``ld``. A status column is
    appended (ok / failure reason)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(ESTIMATE_FIELDS) + ["status"])
        for i, row in enumerate(rows):
            status = statuses[i] if statuses else "ok"
            if isinstance(row, BinEstimate):
                row = row.as_row()
            w.writerow([repr(float(row.get(f, math.nan))) if f in row else ""
                        for f in ESTIMATE_FIELDS] + [status])


def read_estimates(path):
    """Read an estimates CSV back into (list of dict rows, statuses)."""
    rows, statuses = [], []
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        missing = set(ESTIMATE_FIELDS) - set(r.fieldnames or ())
        if missing:
            raise ValueError(f"estimates CSV missing columns: {sorted(missing)}")
        for rec in r:
            statuses.append(rec.get("status", "ok"))
            rows.append({f: float(rec[f]) if rec[f] not in ("", None) else math.nan
                         for f in ESTIMATE_FIELDS})
    return rows, statuses
