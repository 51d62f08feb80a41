"""Parameterization method for the invariant manifold of Galerkin truncations.

For the truncation with modes 0..N the zero equilibrium has the diagonal
linearization diag(0, -1, -4, ..., -N^2).  The manifold tangent to the
nonzero-mode eigenspace is written as a chart W: C^N -> C^{N+1} with internal
dynamics f, solving the invariance equation F(W(sigma)) = DW(sigma) f(sigma)
order by order in exact rational arithmetic.  The complex phase e^{i theta}
cancels from the invariance equation, so one chart serves every rotation of
the flow.

Resonances k . lambda = lambda_i obstruct linear internal dynamics; at a
resonant multi-index the obstruction is moved into f (resonant normal form)
and the corresponding chart component is gauged to zero.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field as dcfield
from fractions import Fraction

import numpy as np

from .galerkin import GalerkinSystem
from .rational import RationalComplex, format_rational, parse_rational

__all__ = [
    "TaylorModel",
    "ResonanceSet",
    "detect_resonances",
    "solve_cohomological",
    "evaluate_W",
    "evaluate_W_jacobian",
    "evaluate_f",
    "solve_sigma_for_constraints",
    "estimate_radius",
    "RadiusEstimate",
    "invariance_residual",
    "save_model",
    "load_model",
    "multi_indices",
]

WORKING_RADIUS = 0.8


def multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices in N^dim with |k| = order, lexicographically sorted."""
    if dim == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(dim - 1, order - first):
            out.append((first,) + rest)
    return sorted(out, reverse=True)


@dataclass(frozen=True)
class ResonanceSet:
    """Multi-indices k with k . lambda = lambda_i for a target eigenvalue i."""

    entries: tuple  # of (k, i) pairs

    def targets(self) -> set:
        return {i for _, i in self.entries}

    def as_dict(self) -> dict:
        out: dict[tuple, list[int]] = {}
        for k, i in self.entries:
            out.setdefault(k, []).append(i)
        return out

    def max_order(self) -> int:
        return max((sum(k) for k, _ in self.entries), default=0)


def detect_resonances(tangent_eigenvalues, max_order: int) -> ResonanceSet:
    """All (k, i) with 2 <= |k| <= max_order and k . lambda = lambda_i.

    tangent_eigenvalues are the rational eigenvalues of the tangent directions
    (-1, -4, ..., -N^2); targets include the range-side eigenvalue 0.
    """
    lam = [Fraction(x) for x in tangent_eigenvalues]
    targets = [Fraction(0)] + lam
    d = len(lam)
    hits = []
    for order in range(2, max_order + 1):
        for k in multi_indices(d, order):
            dot = sum(ki * li for ki, li in zip(k, lam))
            for i, li in enumerate(targets):
                if dot == li:
                    hits.append((k, i))
    return ResonanceSet(tuple(hits))


@dataclass
class TaylorModel:
    """Chart W and internal dynamics f as graded rational Taylor data.

    W_coeffs[k] is the length-(dim_range) coefficient vector of sigma^k in W;
    f_coeffs[k] the length-(dim_domain) vector in f.  Order-1 entries carry
    the tangency data W_1 = L (identity injection onto modes 1..N) and
    f_1 = Lambda; nonlinear f entries exist only at resonant multi-indices.
    theta never enters: the chart is shared by the whole rotation family.
    """

    dim_domain: int
    dim_range: int
    order: int
    eigenvalues: list            # range-side, rational, length dim_range
    W_coeffs: dict
    f_coeffs: dict
    _float_cache: dict = dcfield(default_factory=dict, repr=False, compare=False)

    def tangent_eigenvalues(self) -> list:
        return self.eigenvalues[1:]

    def nonlinear_f(self) -> dict:
        """Nonzero nonlinear f entries as {k: {component: RationalComplex}}."""
        out: dict = {}
        for k, vec in self.f_coeffs.items():
            if sum(k) < 2:
                continue
            comps = {j: v for j, v in enumerate(vec) if v}
            if comps:
                out[k] = comps
        return out

    def _floats(self):
        if "W" not in self._float_cache:
            ks = sorted(self.W_coeffs)
            self._float_cache["keys"] = np.array(ks, dtype=int)
            self._float_cache["W"] = np.array(
                [[complex(c) for c in self.W_coeffs[k]] for k in ks])
            self._float_cache["f_keys"] = np.array(sorted(self.f_coeffs), dtype=int)
            self._float_cache["f"] = np.array(
                [[complex(c) for c in self.f_coeffs[k]] for k in sorted(self.f_coeffs)])
        return self._float_cache


def _quadratic_orders(couplings, W, by_order, order, dim_range, zero):
    """Coefficients of [Q(W)]_k for all |k| = order (Q from the coupling table)."""
    out = {k: [zero] * dim_range for k in by_order[order]}
    for m1 in range(1, order):
        m2 = order - m1
        for k1 in by_order[m1]:
            W1 = W[k1]
            for k2 in by_order[m2]:
                W2 = W[k2]
                k = tuple(x + y for x, y in zip(k1, k2))
                acc = out[k]
                for n, pairs in enumerate(couplings):
                    s = zero
                    for i, j, c in pairs:
                        a, b = W1[i], W2[j]
                        if a and b:
                            s = s + c * a * b
                    if s:
                        acc[n] = acc[n] + s
    return out


def solve_cohomological(sys: GalerkinSystem, K: int, exact: bool = True) -> TaylorModel:
    """Solve the cohomological equations through order K.

    Per multi-index k in graded order: assemble the error term E_k from
    strictly lower-order data, then componentwise either solve
    (lambda_i - k.lambda) W_k[i] = -E_k[i] (non-resonant, f_k[i] = 0) or
    absorb the obstruction, f_k[i] = E_k[i] with W_k[i] = 0 (resonant).
    With exact=True every scalar is an exact rational; the vector field is
    real, so no imaginary parts ever appear.  exact=False runs the same
    recursion in floating point (used as a conditioning cross-check).
    """
    N = sys.n_modes
    d, n = N, N + 1
    scalar = (lambda x: Fraction(x)) if exact else float
    zero = scalar(0)
    lam = [scalar(-(i * i)) for i in range(n)]       # range eigenvalues
    tlam = lam[1:]
    couplings = sys.couplings

    W: dict = {}
    f: dict = {}
    by_order: dict[int, list] = {1: multi_indices(d, 1)}
    for j, k in enumerate(by_order[1]):
        col = [zero] * n
        # multi_indices(d, 1) is sorted with e_1 first
        col[j + 1] = scalar(1)
        W[k] = col
        fv = [zero] * d
        fv[j] = tlam[j]
        f[k] = fv

    nonlinear_f: dict = {}   # k -> {component j: value}, |k| >= 2
    for order in range(2, K + 1):
        by_order[order] = multi_indices(d, order)
        E = _quadratic_orders(couplings, W, by_order, order, n, zero)
        # cross terms -[DW_{>=2} f_{>=2}]_k
        for kf, comps in nonlinear_f.items():
            mw = order - sum(kf) + 1
            if mw < 1:
                continue
            for kW in by_order[mw]:
                Wv = W[kW]
                for j, val in comps.items():
                    if kW[j] == 0:
                        continue
                    k = tuple(a + b - (1 if idx == j else 0)
                              for idx, (a, b) in enumerate(zip(kW, kf)))
                    acc = E[k]
                    factor = kW[j] * val
                    for comp in range(n):
                        if Wv[comp]:
                            acc[comp] = acc[comp] - factor * Wv[comp]
        for k in by_order[order]:
            kdot = sum(ki * li for ki, li in zip(k, tlam))
            Wk = [zero] * n
            fk = [zero] * d
            resonant = False
            for i in range(n):
                delta = kdot - lam[i]
                if (delta == 0) if exact else (abs(delta) < 1e-9):
                    if i == 0:
                        raise ArithmeticError(
                            f"singular solve at non-resonant index {k}, component 0")
                    fk[i - 1] = E[k][i]
                    resonant = True
                else:
                    Wk[i] = E[k][i] / delta
            W[k] = Wk
            if resonant:
                f[k] = fk
                comps = {j: v for j, v in enumerate(fk) if v}
                if comps:
                    nonlinear_f[k] = comps

    def wrap(x):
        return RationalComplex(x) if exact else complex(x)

    return TaylorModel(
        dim_domain=d,
        dim_range=n,
        order=K,
        eigenvalues=[wrap(x) for x in lam],
        W_coeffs={k: [wrap(c) for c in col] for k, col in W.items()},
        f_coeffs={k: [wrap(c) for c in col] for k, col in f.items()},
    )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _monomials(keys: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """sigma^k for each multi-index row of keys, via cached power tables."""
    max_pow = int(keys.max(initial=0))
    pows = np.empty((sigma.size, max_pow + 1), dtype=complex)
    pows[:, 0] = 1.0
    for p in range(1, max_pow + 1):
        pows[:, p] = pows[:, p - 1] * sigma
    out = np.ones(keys.shape[0], dtype=complex)
    for j in range(sigma.size):
        out *= pows[j, keys[:, j]]
    return out


def _check_radius(sigma: np.ndarray) -> None:
    if np.max(np.abs(sigma)) > WORKING_RADIUS:
        warnings.warn(
            f"|sigma| = {np.max(np.abs(sigma)):.3f} beyond the working radius "
            f"{WORKING_RADIUS}; the chart may no longer converge", stacklevel=3)


def evaluate_W(model: TaylorModel, sigma) -> np.ndarray:
    """Floating-point evaluation of the order-K chart at sigma."""
    sigma = np.asarray(sigma, dtype=complex)
    _check_radius(sigma)
    cache = model._floats()
    return _monomials(cache["keys"], sigma) @ cache["W"]


def evaluate_f(model: TaylorModel, sigma) -> np.ndarray:
    """Internal dynamics f(sigma) (theta factored out) in floating point."""
    sigma = np.asarray(sigma, dtype=complex)
    cache = model._floats()
    return _monomials(cache["f_keys"], sigma) @ cache["f"]


def evaluate_W_jacobian(model: TaylorModel, sigma) -> np.ndarray:
    """DW(sigma) as an (dim_range x dim_domain) float matrix."""
    sigma = np.asarray(sigma, dtype=complex)
    cache = model._floats()
    keys, Wf = cache["keys"], cache["W"]
    jac = np.zeros((model.dim_range, model.dim_domain), dtype=complex)
    for j in range(model.dim_domain):
        kj = keys[:, j]
        mask = kj > 0
        dk = keys[mask].copy()
        dk[:, j] -= 1
        jac[:, j] = (kj[mask] * _monomials(dk, sigma)) @ Wf[mask]
    return jac


def solve_sigma_for_constraints(
    model: TaylorModel,
    targets,
    initial=None,
    tol: float = 1e-12,
    max_iter: int = 60,
) -> np.ndarray:
    """Damped Newton for sigma with W(sigma) matching targets on modes 1..N."""
    targets = np.asarray(targets, dtype=complex)
    d = model.dim_domain
    if targets.shape != (d,):
        raise ValueError(f"need {d} target components (modes 1..{d})")
    sigma = np.asarray(initial, dtype=complex) if initial is not None else targets.copy()

    def residual(s):
        return evaluate_W(model, s)[1:] - targets

    r = residual(sigma)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            break
        J = evaluate_W_jacobian(model, sigma)[1:, :]
        step = np.linalg.solve(J, r)
        lam = 1.0
        while lam > 1e-6:
            trial = sigma - lam * step
            rt = residual(trial)
            if np.max(np.abs(rt)) < np.max(np.abs(r)):
                sigma, r = trial, rt
                break
            lam /= 2
        else:
            break
    if np.max(np.abs(r)) >= tol:
        raise RuntimeError(
            f"Newton did not reach tol={tol}: last residual {np.max(np.abs(r)):.3e}")
    return sigma


@dataclass(frozen=True)
class RadiusEstimate:
    estimate: float
    orders: np.ndarray
    roots: np.ndarray            # per-order max |coeff|^{1/m}
    degenerate: bool = False


def estimate_radius(model: TaylorModel) -> RadiusEstimate:
    """Radius of convergence from the growth of per-order max coefficients.

    Fits log(max |coeff|) against the order over the top half of available
    orders; the estimate is exp(-slope).  A chart whose nonlinear tail is
    identically zero is flagged degenerate with an infinite radius.
    """
    K = model.order
    per_order = np.zeros(K + 1)
    for k, col in model.W_coeffs.items():
        m = sum(k)
        mag = max(abs(complex(c)) for c in col)
        per_order[m] = max(per_order[m], mag)
    orders = np.arange(2, K + 1)
    mags = per_order[2:]
    if np.all(mags == 0):
        return RadiusEstimate(np.inf, orders, np.zeros_like(mags, dtype=float),
                              degenerate=True)
    top = orders[orders >= max(2, K // 2)]
    vals = per_order[top]
    good = vals > 0
    if good.sum() < 2:
        return RadiusEstimate(np.inf, orders, mags ** (1.0 / orders),
                              degenerate=True)
    slope = np.polyfit(top[good], np.log(vals[good]), 1)[0]
    roots = np.where(mags > 0, mags ** (1.0 / orders), 0.0)
    return RadiusEstimate(float(np.exp(-slope)), orders, roots)


# ---------------------------------------------------------------------------
# exact invariance residual
# ---------------------------------------------------------------------------

def invariance_residual(model: TaylorModel) -> dict:
    """Nonzero Taylor coefficients of F(W(sigma)) - DW(sigma) f(sigma).

    Computed in exact rational arithmetic through the model's order; an empty
    dict certifies exact invariance.  The quadratic part of F is rebuilt from
    the coupling table, independent of how the model was produced.
    """
    d, n, K = model.dim_domain, model.dim_range, model.order
    sys = GalerkinSystem(n_modes=d)
    couplings = sys.couplings
    zero = RationalComplex(0)
    lam = model.eigenvalues
    R: dict = {}

    def add(k, comp, val):
        if not val:
            return
        vec = R.setdefault(k, [zero] * n)
        vec[comp] = vec[comp] + val

    by_order: dict[int, list] = {}
    for k in model.W_coeffs:
        by_order.setdefault(sum(k), []).append(k)

    # linear part of F(W): DF(0) W_k
    for k, col in model.W_coeffs.items():
        for i in range(n):
            if col[i]:
                add(k, i, lam[i] * col[i])
    # quadratic part of F(W)
    for m1, ks1 in by_order.items():
        for m2, ks2 in by_order.items():
            if m1 + m2 > K:
                continue
            for k1 in ks1:
                W1 = model.W_coeffs[k1]
                for k2 in ks2:
                    W2 = model.W_coeffs[k2]
                    k = tuple(x + y for x, y in zip(k1, k2))
                    for comp, pairs in enumerate(couplings):
                        s = zero
                        for i, j, c in pairs:
                            a, b = W1[i], W2[j]
                            if a and b:
                                s = s + c * a * b
                        add(k, comp, s)
    # -DW f
    for kW, Wv in model.W_coeffs.items():
        for kf, fv in model.f_coeffs.items():
            if sum(kW) + sum(kf) - 1 > K:
                continue
            for j in range(d):
                if kW[j] == 0 or not fv[j]:
                    continue
                k = tuple(a + b - (1 if idx == j else 0)
                          for idx, (a, b) in enumerate(zip(kW, kf)))
                factor = kW[j] * fv[j]
                for comp in range(n):
                    if Wv[comp]:
                        add(k, comp, -(factor * Wv[comp]))

    return {k: vec for k, vec in R.items()
            if sum(k) <= K and any(vec)}


# ---------------------------------------------------------------------------
# serialization: exact rationals as "p/q" strings
# ---------------------------------------------------------------------------

def _enc(c: RationalComplex) -> list:
    return [format_rational(c.re), format_rational(c.im)]


def _dec(pair) -> RationalComplex:
    return RationalComplex(parse_rational(pair[0]), parse_rational(pair[1]))


def save_model(model: TaylorModel, path: str) -> None:
    doc = {
        "dim_domain": model.dim_domain,
        "dim_range": model.dim_range,
        "order": model.order,
        "eigenvalues": [_enc(c) for c in model.eigenvalues],
        "W": {",".join(map(str, k)): [_enc(c) for c in col]
              for k, col in sorted(model.W_coeffs.items())},
        "f": {",".join(map(str, k)): [_enc(c) for c in col]
              for k, col in sorted(model.f_coeffs.items())},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str) -> TaylorModel:
    with open(path) as fh:
        doc = json.load(fh)

    def key(s):
        return tuple(int(x) for x in s.split(","))

    return TaylorModel(
        dim_domain=int(doc["dim_domain"]),
        dim_range=int(doc["dim_range"]),
        order=int(doc["order"]),
        eigenvalues=[_dec(p) for p in doc["eigenvalues"]],
        W_coeffs={key(s): [_dec(p) for p in col] for s, col in doc["W"].items()},
        f_coeffs={key(s): [_dec(p) for p in col] for s, col in doc["f"].items()},
    )
