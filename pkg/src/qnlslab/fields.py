"""Periodic complex fields as two-sided Fourier coefficient vectors.

A field u(x) = sum_n a_n exp(i k_n x) with k_n = 2 pi n / period is stored
as the coefficient vector (a_{-N}, ..., a_0, ..., a_N).  Real functions have
a_{-n} = conj(a_n); the cosine ansatz used throughout the lab has a_{-n} = a_n
with complex, time-varying a_n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.fft as sfft

__all__ = [
    "FourierField",
    "GridField",
    "TrappingStatus",
    "to_grid",
    "from_grid",
    "nonlinear_square",
    "sup_norm",
    "l2_norm_sq",
    "energy_proportions",
    "trapping_status",
    "sup_grid_size",
    "dealias_grid_size",
    "save_field",
    "load_field",
]

TRAPPING_FACTOR = math.exp(-math.pi / 2)


class TrappingStatus(Enum):
    NOT_TRAPPED = "not_trapped"
    FORWARD_TRAPPED = "forward_trapped"
    BACKWARD_TRAPPED = "backward_trapped"
    BOTH_TRAPPED = "both_trapped"


@dataclass(frozen=True)
class FourierField:
    """Two-sided spectrum of a periodic field. coeffs[i] is mode i - n_modes."""

    coeffs: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coeffs must be a 1-d vector of odd length 2N+1")
        if not self.period > 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return (self.coeffs.size - 1) // 2

    def mode(self, n: int) -> complex:
        N = self.n_modes
        if abs(n) > N:
            return 0.0 + 0.0j
        return complex(self.coeffs[N + n])

    @classmethod
    def zeros(cls, n_modes: int, period: float = 1.0) -> "FourierField":
        return cls(np.zeros(2 * n_modes + 1, dtype=complex), period)

    @classmethod
    def from_modes(cls, modes: dict, n_modes: int, period: float = 1.0) -> "FourierField":
        c = np.zeros(2 * n_modes + 1, dtype=complex)
        for n, v in modes.items():
            if abs(n) > n_modes:
                raise ValueError(f"mode {n} outside +-{n_modes}")
            c[n_modes + n] = v
        return cls(c, period)

    @classmethod
    def from_cosine(cls, amplitudes, n_modes: int, period: float = 1.0) -> "FourierField":
        """Field a_0 + sum_{n>=1} c_n cos(k_n x) given (a_0, c_1, c_2, ...).

        Cosine amplitudes c_n split evenly onto the +-n modes (a_n = c_n / 2).
        """
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.size > n_modes + 1:
            raise ValueError("more cosine amplitudes than modes")
        c = np.zeros(2 * n_modes + 1, dtype=complex)
        c[n_modes] = amplitudes[0]
        for n in range(1, amplitudes.size):
            c[n_modes + n] = amplitudes[n] / 2
            c[n_modes - n] = amplitudes[n] / 2
        return cls(c, period)

    def conjugate(self) -> "FourierField":
        """Spectrum of conj(u): a_n -> conj(a_{-n})."""
        return FourierField(np.conj(self.coeffs[::-1]), self.period)

    def is_real(self, tol: float = 0.0) -> bool:
        return np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= tol

    def is_cosine_symmetric(self, tol: float = 0.0) -> bool:
        return np.max(np.abs(self.coeffs - self.coeffs[::-1])) <= tol


@dataclass(frozen=True)
class GridField:
    """Collocation values at x_j = j * period / M."""

    values: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def x(self) -> np.ndarray:
        M = self.values.size
        return np.arange(M) * (self.period / M)


def _slots(n_modes: int, M: int) -> np.ndarray:
    # positions of modes -N..N in an fft-ordered length-M array
    return np.arange(-n_modes, n_modes + 1) % M


def dealias_grid_size(n_modes: int) -> int:
    """Smallest fast FFT size that makes the quadratic product alias-free."""
    return sfft.next_fast_len(3 * n_modes + 1)


def sup_grid_size(n_modes: int) -> int:
    """Even fast FFT size with at least 4x oversampling of the spectrum."""
    m = sfft.next_fast_len(4 * (2 * n_modes + 1))
    while m % 2:
        m = sfft.next_fast_len(m + 1)
    return m


def to_grid(f: FourierField, M: int) -> GridField:
    """Evaluate u at M equispaced collocation points."""
    N = f.n_modes
    if M < 2 * N + 1:
        raise ValueError(f"grid size {M} < 2N+1 = {2 * N + 1}: aliasing")
    pad = np.zeros(M, dtype=complex)
    pad[_slots(N, M)] = f.coeffs
    return GridField(sfft.ifft(pad) * M, f.period)


def from_grid(values, n_modes: int, period: float = 1.0) -> FourierField:
    """Recover modes -N..N from M >= 2N+1 equispaced samples."""
    values = np.asarray(values, dtype=complex)
    M = values.size
    if M < 2 * n_modes + 1:
        raise ValueError(f"grid size {M} < 2N+1 = {2 * n_modes + 1}")
    spec = sfft.fft(values) / M
    return FourierField(spec[_slots(n_modes, M)], period)


def nonlinear_square(f: FourierField) -> FourierField:
    """Fourier coefficients of u^2 on the retained modes, alias-free.

    Zero-padding to >= 3N+1 points makes the pseudo-spectral product equal
    to the exact convolution sum_{n1+n2=n} a_{n1} a_{n2} for |n| <= N.
    """
    N = f.n_modes
    M = dealias_grid_size(N)
    slots = _slots(N, M)
    pad = np.zeros(M, dtype=complex)
    pad[slots] = f.coeffs
    grid = sfft.ifft(pad) * M
    sq = sfft.fft(grid * grid) / M
    out = sq[slots]
    # restore exact symmetry the analytic convolution preserves
    if f.is_cosine_symmetric():
        out = 0.5 * (out + out[::-1])
    return FourierField(out, f.period)


def sup_norm(f: FourierField) -> float:
    """max |u| on a >= 4x oversampled grid."""
    g = to_grid(f, sup_grid_size(f.n_modes))
    return float(np.abs(g.values).max())


def l2_norm_sq(f: FourierField) -> float:
    """Squared L2 norm with the normalized measure dx/period: sum_n |a_n|^2."""
    return float(np.sum(np.abs(f.coeffs) ** 2))


def energy_proportions(f: FourierField, n_max: int) -> np.ndarray:
    """Relative mode energies (E_0, ..., E_{n_max}); all modes sum to 1.

    E_0 = |a_0|^2 / ||a||^2 and E_n = (|a_n|^2 + |a_{-n}|^2) / ||a||^2, which
    reduces to 2|a_n|^2 / ||a||^2 for cosine-symmetric fields.
    """
    total = l2_norm_sq(f)
    if total == 0.0:
        raise ValueError("energy proportions undefined for the zero field")
    N = f.n_modes
    out = np.zeros(n_max + 1)
    out[0] = np.abs(f.coeffs[N]) ** 2 / total
    for n in range(1, n_max + 1):
        if n <= N:
            out[n] = (np.abs(f.coeffs[N + n]) ** 2 + np.abs(f.coeffs[N - n]) ** 2) / total
    return out


def trapping_status(f: FourierField) -> TrappingStatus:
    """Classify the field against the trapping cone ||w||_l1 < e^{-pi/2} |a_0|.

    Inside the cone the fate is set by the phase of the mean: phases in the
    open upper half-plane give convergence to zero in backward time, the open
    lower half-plane in forward time, and a real mean gives both.
    """
    N = f.n_modes
    z0 = complex(f.coeffs[N])
    if z0 == 0:
        return TrappingStatus.NOT_TRAPPED
    w_l1 = float(np.sum(np.abs(f.coeffs))) - abs(z0)
    if not w_l1 < TRAPPING_FACTOR * abs(z0):
        return TrappingStatus.NOT_TRAPPED
    phi = math.atan2(z0.imag, z0.real) % (2 * math.pi)
    if phi == 0.0 or phi == math.pi:
        return TrappingStatus.BOTH_TRAPPED
    if phi < math.pi:
        return TrappingStatus.BACKWARD_TRAPPED
    return TrappingStatus.FORWARD_TRAPPED


# ---------------------------------------------------------------------------
# serialization: columnar CSV (mode, re, im) + JSON header
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_field(f: FourierField, base_path: str, time: float | None = None) -> None:
    """Write <base>.csv with (mode, re, im) rows and <base>.json header."""
    N = f.n_modes
    with open(base_path + ".csv", "w") as fh:
        fh.write("mode,re,im\n")
        for i, n in enumerate(range(-N, N + 1)):
            c = f.coeffs[i]
            fh.write(f"{n},{_fmt(c.real)},{_fmt(c.imag)}\n")
    header = {"period": f.period, "n_modes": N, "time": time}
    with open(base_path + ".json", "w") as fh:
        json.dump(header, fh, indent=1)
        fh.write("\n")


def load_field(base_path: str) -> tuple[FourierField, float | None]:
    with open(base_path + ".json") as fh:
        header = json.load(fh)
    N = int(header["n_modes"])
    coeffs = np.zeros(2 * N + 1, dtype=complex)
    with open(base_path + ".csv") as fh:
        next(fh)  # header row
        for line in fh:
            n_s, re_s, im_s = line.strip().split(",")
            coeffs[N + int(n_s)] = float(re_s) + 1j * float(im_s)
    return FourierField(coeffs, float(header["period"])), header.get("time")
