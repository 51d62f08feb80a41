"""Post-processing of blowup trajectories: singularity tracking, rate fits,
self-similar frames, and stationary Type-I profile residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dcfield

import numpy as np
import scipy.fft as sfft
from scipy import stats

from .evolution import TrajectoryRecord
from .fields import FourierField, sup_grid_size, to_grid

__all__ = [
    "BlowupFit",
    "SelfSimilarFrame",
    "BlowupPath",
    "track_blowup_points",
    "fit_blowup_rate",
    "rescale_frame",
    "typeI_residual",
    "typeI_residual_field",
    "taper_window",
]


# ---------------------------------------------------------------------------
# blowup-point tracking
# ---------------------------------------------------------------------------

@dataclass
class BlowupPath:
    times: list = dcfield(default_factory=list)
    locations: list = dcfield(default_factory=list)

    def as_arrays(self):
        return np.asarray(self.times), np.asarray(self.locations)


def _local_maxima(f: FourierField, rel_height: float = 0.5):
    """Refined positions of local maxima of |u| above rel_height * max."""
    M = sup_grid_size(f.n_modes)
    g = np.abs(to_grid(f, M).values)
    gmax = g.max()
    if gmax == 0:
        return []
    left = np.roll(g, 1)
    right = np.roll(g, -1)
    idx = np.nonzero((g >= left) & (g > right) & (g > rel_height * gmax))[0]
    dx = f.period / M
    out = []
    for j in idx:
        a, b, c = g[(j - 1) % M], g[j], g[(j + 1) % M]
        denom = a - 2 * b + c
        delta = 0.5 * (a - c) / denom if denom != 0 else 0.0
        out.append(((j + delta) * dx) % f.period)
    return out


def _circ_dist(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def track_blowup_points(rec: TrajectoryRecord, rel_height: float = 0.5):
    """Link per-snapshot |u| maxima into moving singularity paths.

    Matching is nearest-neighbor with periodic wrap; unmatched maxima open
    new paths and unmatched paths close.  Returns (paths, events) where each
    event is (t, count_before, count_after) at a path-count change.
    """
    if not rec.snapshots:
        raise ValueError("trajectory record carries no snapshots")
    period = rec.snapshots[0].period
    active: list[BlowupPath] = []
    finished: list[BlowupPath] = []
    events = []
    prev_count = 0
    for t, snap in zip(rec.snapshot_times, rec.snapshots):
        maxima = _local_maxima(snap, rel_height)
        pairs = []
        for pi, path in enumerate(active):
            for mi, m in enumerate(maxima):
                pairs.append((_circ_dist(path.locations[-1], m, period), pi, mi))
        pairs.sort()
        used_p, used_m = set(), set()
        for _, pi, mi in pairs:
            if pi in used_p or mi in used_m:
                continue
            used_p.add(pi)
            used_m.add(mi)
            active[pi].times.append(t)
            active[pi].locations.append(maxima[mi])
        still = []
        for pi, path in enumerate(active):
            (still if pi in used_p else finished).append(path)
        active = still
        for mi, m in enumerate(maxima):
            if mi not in used_m:
                p = BlowupPath([t], [m])
                active.append(p)
        if len(active) != prev_count:
            events.append((t, prev_count, len(active)))
            prev_count = len(active)
    return finished + active, events


# ---------------------------------------------------------------------------
# power-law fitting of the inverse sup norm
# ---------------------------------------------------------------------------

@dataclass
class BlowupFit:
    T: float
    alpha: float
    C0: float
    r_squared: float
    window: tuple
    residual_normality_flag: bool
    half_fits: list = dcfield(default_factory=list)


def _ols_loglog(t: np.ndarray, y: np.ndarray, T: float):
    """OLS of log y against log(T - t); returns (alpha, logC0, R^2)."""
    x = np.log(T - t)
    ly = np.log(y)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    fitted = A @ coef
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return coef[0], coef[1], r2, ly - fitted


def fit_blowup_rate(series, window, n_scan: int = 200,
                    sensitivity: bool = True) -> BlowupFit:
    """Fit 1/||u||_inf ~ C0 (T - t)^alpha over the window.

    The blowup time T is not fit jointly: it is scanned on a grid above the
    window end and refined by golden-section search on the coefficient of
    determination of the log-log regression; the best (T, alpha, C0, R^2)
    is returned together with a Shapiro normality flag on the residuals.
    """
    series = np.asarray(series, dtype=float)
    t, norms = series[:, 0], series[:, 1]
    t0, t1 = window
    mask = (t >= t0) & (t <= t1) & (norms > 0) & np.isfinite(norms)
    tw, yw = t[mask], 1.0 / norms[mask]
    if tw.size < 4:
        raise ValueError("window selects fewer than 4 usable samples")

    t_end = tw[-1]
    span = max(tw[-1] - tw[0], 1e-12)
    eps0 = span * 1e-6

    def neg_r2(T):
        return -_ols_loglog(tw, yw, T)[2]

    # coarse scan then golden-section refinement
    Ts = t_end + eps0 + np.linspace(0.0, 2.0 * span, n_scan) ** 2 / (2.0 * span)
    scores = np.array([neg_r2(T) for T in Ts])
    i = int(np.argmin(scores))
    a = Ts[max(0, i - 1)]
    b = Ts[min(len(Ts) - 1, i + 1)]
    gr = (math.sqrt(5) - 1) / 2
    c, d = b - gr * (b - a), a + gr * (b - a)
    for _ in range(120):
        if neg_r2(c) < neg_r2(d):
            b, d = d, c
            c = b - gr * (b - a)
        else:
            a, c = c, d
            d = a + gr * (b - a)
        if b - a < 1e-14 * max(1.0, abs(t_end)):
            break
    T = 0.5 * (a + b)
    alpha, logc, r2, resid = _ols_loglog(tw, yw, T)
    normal = False
    if resid.size >= 3 and np.ptp(resid) > 0:
        sample = resid[:: max(1, resid.size // 4999 + 1)]  # shapiro size cap
        normal = bool(stats.shapiro(sample).pvalue > 0.05)
    half_fits = []
    if sensitivity and tw.size >= 8:
        mid = 0.5 * (t0 + t1)
        for sub in ((t0, mid), (mid, t1)):
            try:
                half_fits.append(fit_blowup_rate(series, sub, n_scan=n_scan,
                                                 sensitivity=False))
            except ValueError:
                pass
    return BlowupFit(T=float(T), alpha=float(alpha), C0=float(math.exp(logc)),
                     r_squared=float(r2), window=(float(t0), float(t1)),
                     residual_normality_flag=normal, half_fits=half_fits)


# ---------------------------------------------------------------------------
# self-similar frames
# ---------------------------------------------------------------------------

@dataclass
class SelfSimilarFrame:
    s: float
    y_grid: np.ndarray
    U_values: np.ndarray
    xi: float
    scaling: tuple                 # (alpha, beta)
    wrapped: bool = False          # y-grid spans more than one period


def default_y_grid(n: int = 512, half_width: float = 10.0) -> np.ndarray:
    return np.linspace(-half_width, half_width, n)


def rescale_frame(f: FourierField, t: float, fit: BlowupFit, beta: float,
                  xi: float, alpha: float | None = None,
                  y_grid: np.ndarray | None = None) -> SelfSimilarFrame:
    """Sample U(s, y) = (T-t)^alpha u(t, xi + (T-t)^beta y) spectrally.

    Band-limited interpolation evaluates u at the off-grid points directly
    from its Fourier coefficients; x positions wrap periodically and a y-grid
    wider than one period is flagged.
    """
    if t >= fit.T:
        raise ValueError(f"t={t} is not below the fitted blowup time T={fit.T}")
    alpha = fit.alpha if alpha is None else alpha
    y = default_y_grid() if y_grid is None else np.asarray(y_grid, dtype=float)
    tau = fit.T - t
    lam = tau**beta
    x = xi + lam * y
    wrapped = (x.max() - x.min()) > f.period
    N = f.n_modes
    k = 2 * np.pi * np.arange(-N, N + 1) / f.period
    u = np.exp(1j * np.outer(x, k)) @ f.coeffs
    return SelfSimilarFrame(
        s=float(-math.log(tau)),
        y_grid=y,
        U_values=tau**alpha * u,
        xi=float(xi),
        scaling=(float(alpha), float(beta)),
        wrapped=bool(wrapped),
    )


# ---------------------------------------------------------------------------
# Type-I profile residual
# ---------------------------------------------------------------------------

def taper_window(n: int, fraction: float = 0.1) -> np.ndarray:
    """Planck-taper window: 1 in the interior, C-infinity roll-off to 0."""
    m = max(2, int(round(fraction * n)))
    edge = np.zeros(m)
    j = np.arange(1, m)
    z = m / j - m / (m - j)
    edge[1:] = 1.0 / (1.0 + np.exp(np.clip(z, -700, 700)))
    w = np.ones(n)
    w[:m] = edge
    w[n - m:] = edge[::-1]
    return w


def _tapered(frame: SelfSimilarFrame):
    """Blend U to a linear edge ramp so the periodic extension is smooth."""
    y = frame.y_grid
    U = frame.U_values
    ell = U[0] + (U[-1] - U[0]) * (y - y[0]) / (y[-1] - y[0])
    w = taper_window(y.size)
    return ell + w * (U - ell), ell


def typeI_residual_field(frame: SelfSimilarFrame) -> np.ndarray:
    """Pointwise residual of the stationary Type-I profile equation.

    Evaluates d_yy V - (i/2) y d_y V - i V + V^2 for the edge-tapered frame V,
    with spectral differentiation on the (now smooth) periodic extension; the
    linear edge ramp is differentiated analytically.
    """
    if frame.scaling != (1.0, 0.5):
        raise ValueError(f"Type-I residual requires scaling (1, 1/2), "
                         f"got {frame.scaling}")
    y = frame.y_grid
    V, ell = _tapered(frame)
    n = y.size
    Lspan = y[-1] - y[0]
    # periodic extension of (V - ell) on n-1 distinct points (endpoints equal)
    P = (V - ell)[:-1]
    k = 2 * np.pi * sfft.fftfreq(n - 1, d=Lspan / (n - 1))
    Ph = sfft.fft(P)
    dP = sfft.ifft(1j * k * Ph)
    d2P = sfft.ifft(-(k**2) * Ph)
    slope = (frame.U_values[-1] - frame.U_values[0]) / Lspan
    dV = np.concatenate([dP, dP[:1]]) + slope
    d2V = np.concatenate([d2P, d2P[:1]])
    return d2V - 0.5j * y * dV - 1j * V + V * V


def typeI_residual(frame: SelfSimilarFrame) -> float:
    """Discrete L2 norm of the Type-I residual over the frame's y-grid."""
    r = typeI_residual_field(frame)
    y = frame.y_grid
    dy = (y[-1] - y[0]) / (y.size - 1)
    return float(np.sqrt(np.sum(np.abs(r) ** 2) * dy))
