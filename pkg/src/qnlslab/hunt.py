"""Locating the codimension-1 stable-manifold crossing in additive families.

A family u_0(x; A) = g(x) + A is classified under the heat flow (theta = 0):
large-enough A blows up, small-enough A decays, and the crossing A* marks the
strong stable manifold of zero.  Interval bisection on the classified fate
pins A*; parameter sweeps run the same families under the rotated flows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dcfield, replace

import numpy as np

from .evolution import EvolveConfig, SpectralStepper, evolve, trapping_entry_time
from .fields import FourierField

__all__ = [
    "FamilySpec",
    "FateReport",
    "HeatFateConfig",
    "BisectionResult",
    "SweepRow",
    "classify_heat_fate",
    "bisect_manifold",
    "sweep_nls",
    "BracketError",
    "UndeterminedError",
]


@dataclass(frozen=True)
class FamilySpec:
    """1-parameter family g(x) + A; A shifts only the constant mode."""

    g: FourierField
    A_range: tuple
    description: str = ""

    def member(self, A: float) -> FourierField:
        c = self.g.coeffs.copy()
        c[self.g.n_modes] += A
        return FourierField(c, self.g.period)


@dataclass(frozen=True)
class FateReport:
    fate: str            # blowup | decay | undetermined
    t: float
    certificate: str
    final_norm: float


@dataclass
class HeatFateConfig:
    n_modes: int = 256
    dt: float = 1e-4
    t_max: float = 5.0
    max_doublings: int = 4
    blowup_threshold: float = 1e8
    decay_threshold: float = 1e-3
    check_stride: int = 20
    period: float = 1.0


class BracketError(ValueError):
    def __init__(self, msg, reports=None):
        super().__init__(msg)
        self.reports = reports


class UndeterminedError(RuntimeError):
    pass


def classify_heat_fate(u0: FourierField, config: HeatFateConfig | None = None) -> FateReport:
    """Integrate the heat flow until a blowup or decay certificate fires.

    Blowup: ||u||_inf crosses the threshold.  Decay: the solution becomes
    pointwise negative (the comparison principle then forces decay to zero),
    or its sup norm falls below the decay threshold.  An undetermined window
    is retried with doubled t_max up to max_doublings times.
    """
    config = config or HeatFateConfig()
    if not u0.is_real(tol=1e-12 * max(1.0, float(np.abs(u0.coeffs).max()))):
        raise ValueError("heat-fate classification expects real initial data")
    ev = EvolveConfig(theta=0.0, dt=config.dt, t_end=config.t_max,
                      n_modes=config.n_modes, period=config.period,
                      blowup_threshold=config.blowup_threshold)
    stepper = SpectralStepper(ev)
    c = u0.coeffs.astype(complex)
    t_cap = config.t_max * 2 ** config.max_doublings
    i = 0
    s = stepper.sup_norm(c)
    while True:
        if not np.isfinite(s):
            return FateReport("blowup", i * config.dt,
                              "non-finite values (post-threshold overflow)", float("inf"))
        if s > config.blowup_threshold:
            return FateReport("blowup", i * config.dt,
                              f"sup norm exceeded {config.blowup_threshold:g}", s)
        if i % config.check_stride == 0:
            grid_max = float(stepper.oversampled_grid(c).real.max())
            if grid_max < 0.0:
                return FateReport("decay", i * config.dt,
                                  "pointwise negative (comparison principle)", s)
            if s < config.decay_threshold:
                return FateReport("decay", i * config.dt,
                                  f"sup norm below {config.decay_threshold:g}", s)
        if i * config.dt >= t_cap:
            return FateReport("undetermined", i * config.dt,
                              f"no certificate before t={t_cap:g}", s)
        c = stepper.step(c)
        i += 1
        s = stepper.sup_norm(c)


@dataclass
class BisectionResult:
    a_star: float
    bracket: tuple
    history: list = dcfield(default_factory=list)   # (A, fate, t, certificate)


def bisect_manifold(fam: FamilySpec, tol: float,
                    config: HeatFateConfig | None = None) -> BisectionResult:
    """Shrink [A_decay, A_blowup] by midpoint probes until width < tol.

    Requires opposite fates at the range endpoints (larger A on the blowup
    side); an undetermined probe aborts with advice to raise t_max.
    """
    config = config or HeatFateConfig()
    lo, hi = float(fam.A_range[0]), float(fam.A_range[1])
    history = []

    def probe(A):
        rep = classify_heat_fate(fam.member(A), config)
        history.append((A, rep.fate, rep.t, rep.certificate))
        if rep.fate == "undetermined":
            raise UndeterminedError(
                f"probe A={A} undetermined up to t={rep.t:g}; raise t_max "
                f"(currently {config.t_max:g} with {config.max_doublings} doublings)")
        return rep

    rep_lo, rep_hi = probe(lo), probe(hi)
    if rep_lo.fate == rep_hi.fate:
        raise BracketError(
            f"endpoints have the same fate ({rep_lo.fate}); widen the range",
            reports=(rep_lo, rep_hi))
    if rep_lo.fate == "blowup":   # keep decay at lo, blowup at hi
        lo, hi = hi, lo
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        rep = probe(mid)
        if rep.fate == "blowup":
            hi = mid
        else:
            lo = mid
    return BisectionResult(a_star=0.5 * (lo + hi),
                           bracket=(min(lo, hi), max(lo, hi)),
                           history=history)


@dataclass(frozen=True)
class SweepRow:
    A: float
    outcome: str
    outcome_t: float
    trap_time: float | None
    max_norm: float
    error: str = ""


def sweep_nls(fam: FamilySpec, A_values, config: EvolveConfig | None = None,
              collect_records: bool = False):
    """Evolve every family member and tabulate outcome, trapping entry, max norm.

    Per-A failures are captured in the row, never aborting the sweep.
    Returns the rows sorted by A (and the records too if requested).
    """
    config = config or EvolveConfig(theta=math.pi / 2, dt=1e-4, t_end=1.0,
                                    n_modes=fam.g.n_modes, trapping_check=True)
    if not config.trapping_check:
        config = replace(config, trapping_check=True)
    rows, records = [], []
    for A in sorted(float(a) for a in A_values):
        try:
            rec = evolve(fam.member(A), config)
            rows.append(SweepRow(
                A=A,
                outcome=rec.outcome.kind,
                outcome_t=rec.outcome.t,
                trap_time=trapping_entry_time(rec),
                max_norm=float(np.nanmax(rec.sup_norms)),
            ))
            records.append(rec if collect_records else None)
        except Exception as exc:  # per-A isolation
            rows.append(SweepRow(A=A, outcome="error", outcome_t=float("nan"),
                                 trap_time=None, max_norm=float("nan"),
                                 error=str(exc)))
            records.append(None)
    return (rows, records) if collect_records else rows
