"""Stochastic EM for the left-censored two-component Gamma mixture.

One iteration is E (responsibilities for received and censored samples),
S (draw component labels and impute censored values from the truncated
conditional) and M (closed-form weight/scale updates plus a digamma root
solve for the shapes). The chain is ergodic rather than convergent, so the
point estimate is the average over a trailing burn window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .errors import (DegenerateCensorMassError, DegenerateFitError,
                     DegenerateLikelihoodError, EmptyComponentError,
                     InsufficientDataError)
from .gamma_core import (GammaParams, gamma_logpdf, reg_lower_gamma,
                         sample_truncated_gamma, solve_shape)
from .model import CensoredBin, MixtureParams, db_to_linear

EMPTY_COMPONENT_RETRIES = 10


@dataclass(frozen=True)
class SemConfig:
    iterations: int = 50
    burn_window: int = 10
    alpha_floor: float = 0.02
    seed: int = 0
    digamma_mode: str = "exact"

    def __post_init__(self):
        if not (1 <= self.burn_window <= self.iterations):
            raise ValueError("need 1 <= burn_window <= iterations")
        if not (0.0 < self.alpha_floor < 0.5):
            raise ValueError("need 0 < alpha_floor < 0.5")
        if self.digamma_mode not in ("exact", "paper_approx"):
            raise ValueError(f"unknown digamma mode {self.digamma_mode!r}")


@dataclass
class SemTrace:
    """Per-iteration parameter history of one run."""

    iterates: list          # MixtureParams per iteration
    final: MixtureParams    # burn-window average
    imputed_comp1: list = field(default_factory=list)  # censored labels = 1

    @property
    def last(self) -> MixtureParams:
        return self.iterates[-1]


@dataclass(frozen=True)
class CompletedAssignment:
    """One stochastic completion: boolean labels (True = component 1) for
    observed and censored samples, plus the imputed censored values."""

    z_obs: np.ndarray
    z_cens: np.ndarray
    y_cens: np.ndarray


def e_step_observed(x, phi: MixtureParams):
    """P(component 1 | received sample x). Log-domain with max subtraction."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        l1 = np.log(phi.alpha1) + gamma_logpdf(x, phi.comp1)
        l2 = np.log(phi.alpha2) + gamma_logpdf(x, phi.comp2)
    top = np.maximum(l1, l2)
    if np.any(~np.isfinite(top)):
        raise DegenerateLikelihoodError(
            "both component densities underflowed at some sample")
    t = np.exp(l1 - top) / (np.exp(l1 - top) + np.exp(l2 - top))
    return float(t) if t.ndim == 0 else t


def e_step_censored(c_lin: float, phi: MixtureParams) -> float:
    """P(component 1 | sample was censored below c_lin)."""
    if not c_lin > 0:
        raise ValueError("c_lin must be > 0")
    w1 = phi.alpha1 * reg_lower_gamma(phi.comp1.m, c_lin / phi.comp1.omega)
    w2 = phi.alpha2 * reg_lower_gamma(phi.comp2.m, c_lin / phi.comp2.omega)
    total = w1 + w2
    if total <= 0.0:
        raise DegenerateCensorMassError(
            "no component carries mass below the censoring threshold")
    return w1 / total


def s_step(bin_: CensoredBin, phi: MixtureParams,
           rng: np.random.Generator) -> CompletedAssignment:
    """Draw labels for every sample and impute the censored values."""
    t_obs = np.atleast_1d(e_step_observed(bin_.observed, phi)) \
        if bin_.observed.size else np.empty(0)
    z_obs = rng.random(bin_.observed.size) < t_obs

    if bin_.r1 == 0:
        return CompletedAssignment(z_obs, np.empty(0, bool), np.empty(0))

    t1 = e_step_censored(bin_.c_lin, phi)
    z_cens = rng.random(bin_.r1) < t1
    y_cens = np.empty(bin_.r1)
    for comp, mask in ((phi.comp1, z_cens), (phi.comp2, ~z_cens)):
        k = int(mask.sum())
        if k:
            y_cens[mask] = sample_truncated_gamma(comp, bin_.c_lin, rng, k)
    return CompletedAssignment(z_obs, z_cens, y_cens)


def m_step(bin_: CensoredBin, completed: CompletedAssignment,
           phi_prev: MixtureParams, config: SemConfig,
           on_empty: str = "error") -> MixtureParams:
    """Update (alpha, omega, m) from the completed sample.

    Scales use the previous shapes (omega_i = omega_im / m_i^prev); the new
    shapes then solve digamma(m) = weighted mean of ln(x / omega_i^new).
    Scale updates use the unclamped weights; only the stored alpha is
    clamped away from {0, 1}.
    """
    n = bin_.n_total
    counts = np.array([
        completed.z_obs.sum() + completed.z_cens.sum(),
        (~completed.z_obs).sum() + (~completed.z_cens).sum(),
    ], dtype=float)
    if counts.sum() != n:
        raise ValueError("completed assignment inconsistent with bin counts")

    prev = (phi_prev.comp1, phi_prev.comp2)
    comps = []
    for i, (mask_o, mask_c) in enumerate(((completed.z_obs, completed.z_cens),
                                          (~completed.z_obs, ~completed.z_cens))):
        if counts[i] == 0:
            if on_empty == "keep":
                comps.append(prev[i])
                continue
            raise EmptyComponentError(f"component {i + 1} got no samples")
        values = np.concatenate([bin_.observed[mask_o],
                                 completed.y_cens[mask_c]])
        omega_m = values.sum() / counts[i]
        omega = omega_m / prev[i].m
        log_mean = float(np.mean(np.log(values / omega)))
        m = solve_shape(log_mean, config.digamma_mode)
        comps.append(GammaParams(m=m, omega=omega))

    alpha1 = counts[0] / n
    alpha1 = min(max(alpha1, config.alpha_floor), 1.0 - config.alpha_floor)
    return MixtureParams(alpha1=alpha1, comp1=comps[0], comp2=comps[1])


def _component_distance(a: GammaParams, b: GammaParams) -> float:
    return abs(math.log(a.mean) - math.log(b.mean)) + abs(math.log(a.m)
                                                          - math.log(b.m))


def _ordered(phi: MixtureParams, prev: MixtureParams) -> MixtureParams:
    # keep labels consistent across iterations: pick the orientation whose
    # components moved least (in log mean / log shape) from the previous
    # iterate, so traces and burn averages track one physical component
    keep = (_component_distance(phi.comp1, prev.comp1)
            + _component_distance(phi.comp2, prev.comp2))
    swap = (_component_distance(phi.comp1, prev.comp2)
            + _component_distance(phi.comp2, prev.comp1))
    if swap < keep:
        return MixtureParams(alpha1=phi.alpha2, comp1=phi.comp2,
                             comp2=phi.comp1)
    return phi


def _burn_average(iterates, window: int) -> MixtureParams:
    tail = iterates[-window:]
    alpha1 = float(np.mean([p.alpha1 for p in tail]))
    comps = []
    for pick in (lambda p: p.comp1, lambda p: p.comp2):
        m = float(np.mean([pick(p).m for p in tail]))
        om = float(np.mean([pick(p).omega for p in tail]))
        comps.append(GammaParams(m=m, omega=om))
    return MixtureParams(alpha1=alpha1, comp1=comps[0], comp2=comps[1])


def run_semcm(bin_: CensoredBin, init: MixtureParams, config: SemConfig,
              rng: np.random.Generator | None = None) -> SemTrace:
    """Run the full E/S/M chain and return the trace with its burn average."""
    if bin_.observed.size < 2:
        raise InsufficientDataError(
            f"bin ld={bin_.ld}: need >= 2 observed samples, "
            f"got {bin_.observed.size}")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    phi = init
    iterates, imputed = [], []
    for _ in range(config.iterations):
        for attempt in range(EMPTY_COMPONENT_RETRIES):
            completed = s_step(bin_, phi, rng)
            try:
                nxt = m_step(bin_, completed, phi, config)
                break
            except EmptyComponentError:
                continue
        else:
            raise DegenerateFitError(
                f"bin ld={bin_.ld}: a component stayed empty after "
                f"{EMPTY_COMPONENT_RETRIES} redraws",
                partial_trace=SemTrace(iterates,
                                       _burn_average(iterates, 1) if iterates
                                       else init, imputed))
        phi = _ordered(nxt, phi)
        iterates.append(phi)
        imputed.append(int(completed.z_cens.sum()))

    final = _burn_average(iterates, config.burn_window)
    return SemTrace(iterates=iterates, final=final, imputed_comp1=imputed)


def init_heuristic(bin_: CensoredBin,
                   m1_guess: float | None = None) -> MixtureParams:
    """Starting point: moment-based (or supplied) signal shape, Rayleigh-like
    interference (m = 1), both means anchored at the observed sample mean
    with the interference offset +3 dB to break symmetry."""
    if bin_.observed.size < 2:
        raise InsufficientDataError("need >= 2 observed samples")
    mean = float(bin_.observed.mean())
    m1 = float(m1_guess) if m1_guess is not None else baselines.mb_shape(
        bin_.observed)
    comp1 = GammaParams(m=m1, omega=mean / m1)
    comp2 = GammaParams(m=1.0, omega=mean * db_to_linear(3.0))
    return MixtureParams(alpha1=0.5, comp1=comp1, comp2=comp2)
