"""Synthetic censored-mixture scenarios: attenuating signal component,
constant-median interference, per-index mixing, left-censoring at a noise
floor. Simulated data leaves through the same packet-log format that the
ingest side reads, so both paths share one pipeline."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .gamma_core import GammaParams
from .model import CensoredBin, MixtureParams, PathLossLine, db_to_linear

SCENARIO_FIELDS = ("ld_start", "ld_end", "ld_step", "n_per_bin", "m1", "m2",
                   "pl_a", "pl_b", "interference_mean_db", "mixing_alpha1",
                   "c_db", "seed")


@dataclass(frozen=True)
class Scenario:
    """Simulation configuration. The signal mean line in dBm is
    pl_a - pl_b * ld; the interference mean is flat over distance."""

    ld_start: float = 23.0
    ld_end: float = 32.0
    ld_step: float = 0.5
    n_per_bin: int = 1000
    m1: float = 7.0
    m2: float = 35.0
    pl_a: float = -16.0
    pl_b: float = 3.0
    interference_mean_db: float = -97.0
    mixing_alpha1: float = 0.5
    c_db: float = -109.0
    seed: int = 0

    def __post_init__(self):
        if self.ld_end < self.ld_start or self.ld_step <= 0:
            raise ValueError("empty or invalid ld grid")
        if self.n_per_bin < 1:
            raise ValueError("n_per_bin must be >= 1")
        if self.m1 <= 0 or self.m2 <= 0:
            raise ValueError("shapes must be > 0")
        if not (0.0 <= self.mixing_alpha1 <= 1.0):
            raise ValueError("mixing_alpha1 must be in [0, 1]")

    @property
    def pl_line(self) -> PathLossLine:
        return PathLossLine(A=self.pl_a, B=self.pl_b)

    @property
    def ld_grid(self) -> np.ndarray:
        n = int(round((self.ld_end - self.ld_start) / self.ld_step)) + 1
        grid = self.ld_start + self.ld_step * np.arange(n)
        return grid[grid <= self.ld_end + 1e-9]

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        doc = json.loads(text)
        unknown = set(doc) - set(SCENARIO_FIELDS)
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**doc)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class GroundTruth:
    """Per-bin true parameters, for oracle checks on simulated data."""

    lds: np.ndarray
    params: list  # MixtureParams per bin
    mean1_db: np.ndarray
    mean2_db: np.ndarray


def signal_omega_at(ld: float, sc: Scenario) -> float:
    """Signal scale at a bin: mean m1*omega1 sits on the path-loss line."""
    return db_to_linear(sc.pl_a - sc.pl_b * ld) / sc.m1


def interference_omega(sc: Scenario) -> float:
    return db_to_linear(sc.interference_mean_db) / sc.m2


def bin_rng(seed: int, bin_index: int) -> np.random.Generator:
    """Per-bin generator independent of scheduling order."""
    return np.random.default_rng([seed, bin_index])


def true_params_at(ld: float, sc: Scenario) -> MixtureParams:
    return MixtureParams(
        alpha1=sc.mixing_alpha1,
        comp1=GammaParams(m=sc.m1, omega=signal_omega_at(ld, sc)),
        comp2=GammaParams(m=sc.m2, omega=interference_omega(sc)))


def _draw_bin(sc: Scenario, bin_index: int, ld: float):
    """Per-packet mixture values for one bin plus the keep (received) mask."""
    rng = bin_rng(sc.seed, bin_index)
    signal = rng.gamma(sc.m1, signal_omega_at(ld, sc), sc.n_per_bin)
    interf = rng.gamma(sc.m2, interference_omega(sc), sc.n_per_bin)
    take_signal = rng.random(sc.n_per_bin) < sc.mixing_alpha1
    mixed = np.where(take_signal, signal, interf)
    keep = mixed > db_to_linear(sc.c_db)
    return mixed, keep


def generate_scenario(sc: Scenario):
    """Returns (bins, ground truth, censored-out count per bin)."""
    bins, params, dropped = [], [], []
    grid = sc.ld_grid
    for b, ld in enumerate(grid):
        mixed, keep = _draw_bin(sc, b, ld)
        r1 = int(sc.n_per_bin - keep.sum())
        bins.append(CensoredBin(ld=float(ld), observed=mixed[keep],
                                n_total=sc.n_per_bin, r1=r1, c_db=sc.c_db))
        params.append(true_params_at(float(ld), sc))
        dropped.append(r1)
    truth = GroundTruth(
        lds=grid,
        params=params,
        mean1_db=sc.pl_a - sc.pl_b * grid,
        mean2_db=np.full(grid.size, sc.interference_mean_db))
    return bins, truth, dropped


def censoring_probability(ld: float, sc: Scenario) -> float:
    """Analytic P(sample below threshold) for one bin."""
    from .gamma_core import reg_lower_gamma
    c = db_to_linear(sc.c_db)
    phi = true_params_at(ld, sc)
    return (phi.alpha1 * reg_lower_gamma(phi.comp1.m, c / phi.comp1.omega)
            + phi.alpha2 * reg_lower_gamma(phi.comp2.m, c / phi.comp2.omega))


def packet_rows(sc: Scenario):
    """One (seq, distance_m, rssi_dbm or None) row per transmitted packet,
    drawn identically to ``generate_scenario``."""
    rows = []
    seq = 1
    for b, ld in enumerate(sc.ld_grid):
        mixed, keep = _draw_bin(sc, b, float(ld))
        dist = 10.0 ** (float(ld) / 10.0)
        for v, k in zip(mixed, keep):
            rssi = 10.0 * math.log10(v) if k else None
            rows.append((seq, dist, rssi))
            seq += 1
    return rows
