"""Experiment configurations and named presets for the standard runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dcfield

import numpy as np
import yaml

from .fields import FourierField, load_field

__all__ = [
    "ExperimentConfig",
    "recipe",
    "recipe_names",
    "parse_initial",
    "parse_theta",
    "parse_range",
]

KINDS = {"simulate", "sweep", "bisect", "galerkin", "manifold", "selfsim"}


@dataclass
class ExperimentConfig:
    """Declarative description of one run; fully determines its artifacts."""

    kind: str
    name: str = ""
    params: dict = dcfield(default_factory=dict)
    post: dict = dcfield(default_factory=dict)
    output_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {sorted(KINDS)}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "params": dict(self.params),
                "post": dict(self.post), "output_dir": self.output_dir}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - {"kind", "name", "params", "post", "output_dir"}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "kind" not in d:
            raise ValueError("config needs a 'kind' field")
        return cls(kind=d["kind"], name=d.get("name", ""),
                   params=dict(d.get("params") or {}),
                   post=dict(d.get("post") or {}),
                   output_dir=d.get("output_dir"))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(yaml.safe_load(text))

    def override(self, dotted: str, value) -> None:
        """Apply one 'a.b=value'-style override (CLI flags beat file values)."""
        parts = dotted.split(".")
        target = self.to_dict()
        node = target
        for p in parts[:-1]:
            node = node[p]
        node[parts[-1]] = value
        updated = ExperimentConfig.from_dict(target)
        self.__dict__.update(updated.__dict__)


def parse_theta(s) -> float:
    """Angles as floats or strings like 'pi/2', '-pi/4', '0.3'."""
    if isinstance(s, (int, float)):
        return float(s)
    t = s.strip().lower().replace(" ", "")
    sign = -1.0 if t.startswith("-") else 1.0
    t = t.lstrip("+-")
    if t == "pi":
        return sign * math.pi
    if t.startswith("pi/"):
        return sign * math.pi / float(t[3:])
    return sign * float(t)


def parse_range(s) -> np.ndarray:
    """'lo:hi' or 'lo:hi:step' (inclusive endpoints) or an explicit list."""
    if isinstance(s, (list, tuple, np.ndarray)):
        return np.asarray(s, dtype=float)
    lo, hi, *rest = s.split(":")
    lo, hi = float(lo), float(hi)
    step = float(rest[0]) if rest else (hi - lo)
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def parse_initial(spec: str, n_modes: int, period: float = 1.0) -> FourierField:
    """Initial-data strings.

    cos:AMP[,OFFSET]   AMP cos(2 pi x / period) + OFFSET
    exp:AMP[,MODE]     AMP e^{2 pi i MODE x / period}   (default mode 1)
    const:C            constant field
    file:BASE          a field saved with save_field
    """
    head, _, body = spec.partition(":")
    if head == "cos":
        parts = body.split(",")
        amp = float(parts[0])
        off = float(parts[1]) if len(parts) > 1 else 0.0
        return FourierField.from_cosine([off, amp], n_modes, period)
    if head == "exp":
        parts = body.split(",")
        amp = complex(parts[0])
        mode = int(parts[1]) if len(parts) > 1 else 1
        return FourierField.from_modes({mode: amp}, n_modes, period)
    if head == "const":
        return FourierField.from_modes({0: complex(body)}, n_modes, period)
    if head == "file":
        f, _ = load_field(body)
        return f
    raise ValueError(f"unknown initial-data spec {spec!r}")


SIGMA_FIG5 = "0.4300654917290795,-0.07398732057014827,0.00530826265454094"

_RECIPES = {
    # A-sweep of u0 = 30 cos(2 pi x) + A under the theta = pi/2 flow
    "fig2-sweep": dict(
        kind="sweep",
        params=dict(family="cos:30", A="-150:150:1", theta="pi/2",
                    modes=256, dt=1e-4, t_end=1.0, record_stride=10),
    ),
    # near-manifold real data, slow secular growth into blowup
    "fig3-blowup": dict(
        kind="simulate",
        params=dict(initial="cos:30,-5.3070235", theta="pi/2", modes=4096,
                    dt=1e-7, t_end=1.5, record_stride=1000,
                    snapshot_stride=100000),
        slow=True,
    ),
    # four-mode truncation started on the invariant manifold
    "fig5-galerkin": dict(
        kind="galerkin",
        params=dict(N=3, theta="pi/2", init="sigma:" + SIGMA_FIG5,
                    order=20, dt=1e-3, t_end=150.0, record_stride=10),
    ),
    # large real data on the heat-flow stable manifold; self-similar frames
    "fig6-blowup": dict(
        kind="simulate",
        params=dict(initial="cos:300,-189.286840601635", theta="pi/2",
                    modes=4096, dt=1e-7, t_end=0.0745, record_stride=50,
                    snapshot_stride=2000),
        post=dict(fit_window=[0.070, 0.074], alpha=1.0, beta=0.5),
        slow=True,
    ),
    # monochromatic data, guaranteed blowup, scaling (2, 1)
    "fig7-monochromatic": dict(
        kind="simulate",
        params=dict(initial="exp:300", theta="pi/2", modes=4096, dt=1e-7,
                    t_end=0.046, record_stride=50, snapshot_stride=2000),
        post=dict(fit_window=[0.038, 0.045], alpha=2.0, beta=1.0),
        slow=True,
    ),
}


def recipe_names() -> list:
    return sorted(_RECIPES)


def recipe(name: str, scale: float = 1.0) -> ExperimentConfig:
    """Named preset; scale < 1 shrinks modes and grows dt for smoke tests."""
    if name not in _RECIPES:
        raise KeyError(
            f"unknown recipe {name!r}; available: {', '.join(recipe_names())}")
    spec = _RECIPES[name]
    params = dict(spec["params"])
    if scale != 1.0:
        if not 0 < scale <= 1:
            raise ValueError("scale must be in (0, 1]")
        if "modes" in params:
            params["modes"] = max(16, int(round(params["modes"] * scale)))
        if "dt" in params:
            params["dt"] = params["dt"] / scale
        for key in ("record_stride", "snapshot_stride"):
            if key in params:
                params[key] = max(1, int(round(params[key] * scale)))
    return ExperimentConfig(kind=spec["kind"], name=name, params=params,
                            post=dict(spec.get("post", {})))


def recipe_is_slow(name: str) -> bool:
    return bool(_RECIPES.get(name, {}).get("slow"))
