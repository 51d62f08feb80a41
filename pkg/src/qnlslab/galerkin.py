"""Cosine-ansatz Galerkin truncations and the closed-form N=3 internal flow.

The N-mode truncation keeps a = (a_0, ..., a_N) with a_{-n} = a_n and evolves

    da_n/dt = e^{i theta} ( -n^2 a_n + sum_{n1+n2=n, |ni|<=N} a_{|n1|} a_{|n2|} ).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .evolution import Outcome

__all__ = [
    "GalerkinSystem",
    "GalerkinTrajectory",
    "SigmaState",
    "galerkin_rhs",
    "integrate_galerkin",
    "closed_form_sigma",
    "secular_crossing_times",
    "sigma2_envelope",
    "sigma3_envelope",
]

SUP_GRID_POINTS = 512


def coupling_table(n_modes: int) -> list[list[tuple[int, int, int]]]:
    """For each output mode n: (i, j, count) with count ordered pairs
    n1 + n2 = n, |n1|, |n2| <= N and {|n1|, |n2|} = {i, j}."""
    N = n_modes
    table = []
    for n in range(N + 1):
        cnt: dict[tuple[int, int], int] = {}
        for n1 in range(-N, N + 1):
            n2 = n - n1
            if -N <= n2 <= N:
                key = tuple(sorted((abs(n1), abs(n2))))
                cnt[key] = cnt.get(key, 0) + 1
        table.append([(i, j, c) for (i, j), c in sorted(cnt.items())])
    return table


@dataclass(frozen=True)
class GalerkinSystem:
    n_modes: int
    theta: float = 0.0

    @property
    def couplings(self):
        return coupling_table(self.n_modes)

    def eigenvalues(self) -> np.ndarray:
        """Linearization spectrum at zero: -e^{i theta} n^2, n = 0..N."""
        return -np.exp(1j * self.theta) * np.arange(self.n_modes + 1) ** 2


@dataclass
class GalerkinTrajectory:
    times: np.ndarray
    states: np.ndarray          # (len(times), N+1) complex
    sup_norms: np.ndarray
    outcome: Outcome


def galerkin_rhs(a: np.ndarray, sys: GalerkinSystem) -> np.ndarray:
    """Right-hand side of the N-mode cosine truncation."""
    a = np.asarray(a, dtype=complex)
    N = sys.n_modes
    if a.shape != (N + 1,):
        raise ValueError(f"state must have length N+1 = {N + 1}")
    mu = cmath.exp(1j * sys.theta)
    out = np.empty(N + 1, dtype=complex)
    for n, pairs in enumerate(sys.couplings):
        q = 0j
        for i, j, c in pairs:
            q += c * a[i] * a[j]
        out[n] = mu * (-(n * n) * a[n] + q)
    return out


def _sup_norm_cosine(a: np.ndarray, basis: np.ndarray) -> float:
    vals = a[0] + 2.0 * (a[1:] @ basis)
    return float(np.abs(vals).max())


def integrate_galerkin(
    a0,
    sys: GalerkinSystem,
    dt: float = 1e-3,
    t_end: float = 100.0,
    blowup_threshold: float = 1e8,
    record_stride: int = 1,
) -> GalerkinTrajectory:
    """Classical RK4 with per-step blowup/overflow detection.

    The sup norm is the max of the cosine series on a 512-point grid,
    evaluated every step; states are stored every record_stride steps.
    """
    a = np.asarray(a0, dtype=complex).copy()
    N = sys.n_modes
    if a.shape != (N + 1,):
        raise ValueError(f"initial state must have length N+1 = {N + 1}")
    mu = cmath.exp(1j * sys.theta)
    table = sys.couplings
    lam = -np.arange(N + 1) ** 2

    def rhs(state):
        out = np.empty(N + 1, dtype=complex)
        for n, pairs in enumerate(table):
            q = 0j
            for i, j, c in pairs:
                q += c * state[i] * state[j]
            out[n] = q
        return mu * (lam * state + out)

    basis = np.cos(
        2 * np.pi * np.arange(SUP_GRID_POINTS) / SUP_GRID_POINTS
        * np.arange(1, N + 1)[:, None]
    )
    n_steps = int(round(t_end / dt))
    times = [0.0]
    states = [a.copy()]
    sups = np.empty(n_steps + 1)
    sups[0] = _sup_norm_cosine(a, basis)
    outcome = None
    i = -1
    for i in range(n_steps):
        k1 = rhs(a)
        k2 = rhs(a + 0.5 * dt * k1)
        k3 = rhs(a + 0.5 * dt * k2)
        k4 = rhs(a + dt * k3)
        a = a + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (i + 1) * dt
        s = _sup_norm_cosine(a, basis)
        sups[i + 1] = s
        if not np.isfinite(s):
            outcome = Outcome("numerical_failure", t)
            break
        if s > blowup_threshold:
            outcome = Outcome("blowup", t)
            break
        if (i + 1) % record_stride == 0 or i + 1 == n_steps:
            times.append(t)
            states.append(a.copy())
    if outcome is None:
        outcome = Outcome("reached_t_end", n_steps * dt)
        i = n_steps - 1
    return GalerkinTrajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        sup_norms=sups[: i + 2],
        outcome=outcome,
    )


# ---------------------------------------------------------------------------
# closed-form internal dynamics of the N=3 manifold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaState:
    """Initial point gamma and unit phase mu = e^{i theta} of the conjugate flow."""

    gamma: tuple
    mu: complex = 1.0 + 0j

    def __post_init__(self):
        if len(self.gamma) != 3:
            raise ValueError("gamma must have three components")
        if abs(abs(self.mu) - 1.0) > 1e-12:
            raise ValueError("mu must have unit modulus")


def closed_form_sigma(s: SigmaState, t: float) -> np.ndarray:
    """Exact solution of the resonant normal form on the N=3 manifold.

    sigma_1' = mu (-sigma_1)
    sigma_2' = mu (-4 sigma_2 + sigma_1^4 / 3)
    sigma_3' = mu (-9 sigma_3 - sigma_1 sigma_2^2 + (19/24) sigma_1^5 sigma_2
                   + (11/81) sigma_1^9)
    """
    g1, g2, g3 = [complex(g) for g in s.gamma]
    mu = complex(s.mu)
    mt = mu * t
    s1 = g1 * cmath.exp(-mt)
    s2 = (g2 + (mt / 3.0) * g1**4) * cmath.exp(-4 * mt)
    s3 = (
        g3
        - mt * g1 * g2**2
        + (19.0 * mt / 24.0 - mt**2 / 3.0) * g1**5 * g2
        + (11.0 * mt / 81.0 + 19.0 * mt**2 / 144.0 - mt**3 / 27.0) * g1**9
    ) * cmath.exp(-9 * mt)
    return np.array([s1, s2, s3])


def conjugate_rhs(sigma: np.ndarray, mu: complex) -> np.ndarray:
    """Vector field of the conjugate (normal-form) dynamics."""
    s1, s2, s3 = sigma
    return mu * np.array([
        -s1,
        -4 * s2 + s1**4 / 3.0,
        -9 * s3 - s1 * s2**2 + (19.0 / 24.0) * s1**5 * s2 + (11.0 / 81.0) * s1**9,
    ])


def sigma2_envelope(t: float, eps: float) -> float:
    """Leading secular envelope of |sigma_2| for gamma = (eps, 0, 0), mu = +-i."""
    return t * eps**4 / 3.0


def sigma3_envelope(t: float, eps: float) -> float:
    """Leading secular envelope of |sigma_3| for gamma = (eps, 0, 0), mu = +-i."""
    return t**3 * eps**9 / 27.0


def secular_crossing_times(eps: float) -> tuple[float, float]:
    """Leading-order times until |sigma_3| overtakes |sigma_2| and |sigma_1|.

    For gamma = (eps, 0, 0) and rotational dynamics (mu = +-i) the envelopes
    t eps^4 / 3 and t^3 eps^9 / 27 cross |sigma_2| at t ~ eps^{-2.5} and
    |sigma_1| = eps at t ~ eps^{-8/3}.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return eps ** (-2.5), eps ** (-8.0 / 3.0)
