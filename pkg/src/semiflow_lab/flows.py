"""Holomorphic semiflows on the unit disc.

Three constructions are supported: numerical integration of the defining
initial-value problem dw/dt = G(w), w(0) = z (adaptive Dormand-Prince 5(4)),
closed-form linearization models phi_t = h^{-1}(e^{-ct} h) and
phi_t = h^{-1}(h + ct) through a conformal map h, and disc-automorphism
families.  All flow objects are immutable and their operations pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .analytic import AnalyticFn, Compose, Constant, Mobius, Polynomial, Product, Quotient
from .errors import (
    DomainError,
    EscapeError,
    InverseError,
    ModelError,
    NoConvergence,
)

ESCAPE_RADIUS = 1.0 - 1e-12
DEFAULT_TOL = 1e-10
MAX_STEPS = 1_000_000

# Dormand-Prince 5(4) tableau (autonomous right-hand sides, so no c nodes).
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (
    5179 / 57600,
    0.0,
    7571 / 16695,
    393 / 640,
    -92097 / 339200,
    187 / 2100,
    1 / 40,
)


def _integrate(rhs, y0, t_end: float, tol: float):
    """Adaptive RK5(4) from 0 to t_end on a tuple of complex states.

    y[0] is the disc state and is escape-guarded.  Plain complex arithmetic
    is used throughout: the state has one or two components and small numpy
    arrays would dominate the runtime.
    """
    y = tuple(complex(c) for c in y0)
    n = len(y)
    t = 0.0
    if abs(y[0]) >= ESCAPE_RADIUS:
        raise EscapeError(f"initial state {y[0]} at the escape radius")
    if t_end == 0.0:
        return y
    h = min(t_end, 0.1)
    steps = 0
    while t < t_end:
        if steps >= MAX_STEPS:
            raise EscapeError("step budget exhausted; tolerance unattainable")
        steps += 1
        h = min(h, t_end - t)
        k = [rhs(y)]
        for i in range(1, 7):
            row = _DP_A[i]
            yi = tuple(
                y[m] + h * sum(row[s] * k[s][m] for s in range(i)) for m in range(n)
            )
            k.append(rhs(yi))
        y5 = tuple(
            y[m] + h * sum(_DP_B5[s] * k[s][m] for s in range(7)) for m in range(n)
        )
        err = 0.0
        for m in range(n):
            y4m = y[m] + h * sum(_DP_B4[s] * k[s][m] for s in range(7))
            scale = tol + tol * max(abs(y[m]), abs(y5[m]))
            err = max(err, abs(y5[m] - y4m) / scale)
        if err <= 1.0:
            t += h
            y = y5
            if abs(y[0]) >= ESCAPE_RADIUS:
                raise EscapeError(
                    f"trajectory reached |w| = {abs(y[0]):.17f} at t = {t}"
                )
        factor = 0.9 * (1.0 / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h <= 0.0 or not math.isfinite(h):
            raise EscapeError("step size collapsed")
    return y


@dataclass(frozen=True)
class NewtonInverse:
    """Newton iteration policy for maps without a closed-form inverse."""

    seed: complex = 0.0
    max_iter: int = 50
    tol: float = 1e-12


@dataclass(frozen=True)
class ConformalMap:
    """A conformal map h with either a closed-form or a Newton inverse."""

    forward: AnalyticFn
    inverse: AnalyticFn | None = None
    newton: NewtonInverse = NewtonInverse()

    @cached_property
    def forward_derivative(self) -> AnalyticFn:
        return self.forward.derivative()

    def map(self, z: complex) -> complex:
        return self.forward.eval_anywhere(z)

    def map_derivative(self, z: complex) -> complex:
        return self.forward_derivative.eval_anywhere(z)

    def inverse_at(self, w: complex, seed: complex | None = None) -> complex:
        if self.inverse is not None:
            return self.inverse.eval_anywhere(w)
        x = complex(self.newton.seed if seed is None else seed)
        for _ in range(self.newton.max_iter):
            fx = self.forward.eval_anywhere(x)
            if abs(fx - w) <= self.newton.tol:
                return x
            dfx = self.forward_derivative.eval_anywhere(x)
            if dfx == 0:
                raise InverseError(f"critical point hit while inverting at {w}")
            x = x - (fx - w) / dfx
        raise InverseError(f"Newton did not converge inverting at {w}")

    def to_json(self):
        obj = {"forward": self.forward.to_json()}
        if self.inverse is not None:
            obj["inverse"] = self.inverse.to_json()
        else:
            obj["newton"] = {
                "seed": [self.newton.seed.real, self.newton.seed.imag]
                if isinstance(self.newton.seed, complex)
                else [float(self.newton.seed), 0.0],
                "max_iter": self.newton.max_iter,
                "tol": self.newton.tol,
            }
        return obj


def mobius_map(a, b, c, d) -> ConformalMap:
    m = Mobius(a, b, c, d)
    return ConformalMap(forward=m, inverse=m.inverse())


def identity_map() -> ConformalMap:
    return mobius_map(1.0, 0.0, 0.0, 1.0)


def cayley_map() -> ConformalMap:
    """(1+z)/(1-z): the disc onto the right half-plane, -1 -> 0, 1 -> infinity."""
    return mobius_map(1.0, 1.0, -1.0, 1.0)


def reflected_cayley_map() -> ConformalMap:
    """(1-z)/(1+z): the disc onto the right half-plane, 1 -> 0, -1 -> infinity."""
    return mobius_map(-1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class GeneratorSpec:
    """Vector field G driving dw/dt = G(w); the flow is trivial iff G == 0."""

    fn: AnalyticFn

    @cached_property
    def derivative(self) -> AnalyticFn:
        return self.fn.derivative()


class FlowModel:
    """Common interface: closed-form or integrated evaluation of phi_t."""

    def advance(self, z: complex, t: float, tol: float | None = None) -> complex:
        z = complex(z)
        if abs(z) >= 1.0:
            raise DomainError(f"{z} not inside the open unit disc")
        if t < 0:
            raise ValueError("semiflow time must be >= 0")
        if t == 0.0:
            return z
        w = self._advance(z, float(t), tol)
        assert abs(w) < 1.0, "flow left the disc"
        return w

    def advance_with_derivative(
        self, z: complex, t: float, tol: float | None = None
    ):
        z = complex(z)
        if abs(z) >= 1.0:
            raise DomainError(f"{z} not inside the open unit disc")
        if t < 0:
            raise ValueError("semiflow time must be >= 0")
        if t == 0.0:
            return z, 1.0 + 0.0j
        w, dw = self._advance_with_derivative(z, float(t), tol)
        assert abs(w) < 1.0, "flow left the disc"
        return w, dw

    def _advance(self, z, t, tol):
        raise NotImplementedError

    def _advance_with_derivative(self, z, t, tol):
        raise NotImplementedError

    def generator_fn(self) -> AnalyticFn | None:
        """The vector field as an expression tree, when available in closed form."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class OdeFlow(FlowModel):
    generator: GeneratorSpec
    tol: float = DEFAULT_TOL

    def _advance(self, z, t, tol):
        tol = self.tol if tol is None else tol
        G = self.generator.fn
        y = _integrate(lambda y: (G.eval_anywhere(y[0]),), (z,), t, tol)
        return y[0]

    def _advance_with_derivative(self, z, t, tol):
        tol = self.tol if tol is None else tol
        G = self.generator.fn
        Gp = self.generator.derivative

        def rhs(y):
            w, v = y
            return (G.eval_anywhere(w), Gp.eval_anywhere(w) * v)

        y = _integrate(rhs, (z, 1.0), t, tol)
        return y[0], y[1]

    def generator_fn(self):
        return self.generator.fn

    def to_json(self):
        return {"type": "ode", "G": self.generator.fn.to_json(), "tol": self.tol}


def ode_flow(G: AnalyticFn, tol: float = DEFAULT_TOL) -> OdeFlow:
    return OdeFlow(GeneratorSpec(G), tol)


@dataclass(frozen=True)
class KoenigsSpiral(FlowModel):
    """phi_t = h^{-1}(e^{-ct} h(z)); requires h(0) = 0 and Re c >= 0."""

    h: ConformalMap
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        if abs(self.h.map(0.0)) > 1e-12:
            raise ModelError("spiral model requires h(0) = 0")
        if self.c.real < 0:
            raise ModelError("spiral model requires Re c >= 0")

    def _advance(self, z, t, tol):
        u = cmath.exp(-self.c * t) * self.h.map(z)
        w = self.h.inverse_at(u, seed=z)
        if abs(w) >= 1.0:
            raise InverseError(f"inverse left the disc at {w}")
        return w

    def _advance_with_derivative(self, z, t, tol):
        w = self._advance(z, t, tol)
        dw = cmath.exp(-self.c * t) * self.h.map_derivative(z) / self.h.map_derivative(w)
        return w, dw

    def generator_fn(self):
        # d/dt h^{-1}(e^{-ct} h(z)) at t=0 equals -c h(z)/h'(z).
        return Product(
            (Constant(-self.c), Quotient(self.h.forward, self.h.forward_derivative))
        )

    def to_json(self):
        return {
            "type": "koenigs",
            "mode": "spiral",
            "h": self.h.to_json(),
            "c": [self.c.real, self.c.imag],
        }


@dataclass(frozen=True)
class KoenigsTranslate(FlowModel):
    """phi_t = h^{-1}(h(z) + ct); the image domain must absorb the ray +ct."""

    h: ConformalMap
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))

    def _advance(self, z, t, tol):
        u = self.h.map(z) + self.c * t
        w = self.h.inverse_at(u, seed=z)
        if abs(w) >= 1.0:
            raise InverseError(f"inverse left the disc at {w}")
        return w

    def _advance_with_derivative(self, z, t, tol):
        w = self._advance(z, t, tol)
        dw = self.h.map_derivative(z) / self.h.map_derivative(w)
        return w, dw

    def generator_fn(self):
        return Quotient(Constant(self.c), self.h.forward_derivative)

    def to_json(self):
        return {
            "type": "koenigs",
            "mode": "translate",
            "h": self.h.to_json(),
            "c": [self.c.real, self.c.imag],
        }


def koenigs_flow(h: ConformalMap, c: complex, mode: str) -> FlowModel:
    """Build a closed-form flow from a linearization map h and rate c."""
    if mode == "spiral":
        return KoenigsSpiral(h, c)
    if mode == "translate":
        return KoenigsTranslate(h, c)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Automorphism(FlowModel):
    """One-parameter automorphism group, restricted to t >= 0.

    kinds: 'elliptic' (rotation e^{i omega t} z about 0), 'hyperbolic'
    (Cayley-conjugated dilation e^{rate t} on the half-plane, fixed points
    +-1), 'parabolic' (conjugated vertical translation w + i*speed*t; the
    boundary fixed point sits at 1, or at -1 when reflect is set).
    """

    kind: str
    omega: float = 0.0
    rate: float = 0.0
    speed: float = 0.0
    reflect: bool = False

    def __post_init__(self):
        if self.kind not in ("elliptic", "hyperbolic", "parabolic"):
            raise ModelError(f"unknown automorphism kind {self.kind!r}")

    @cached_property
    def _model(self) -> FlowModel:
        if self.kind == "elliptic":
            return KoenigsSpiral(identity_map(), -1j * self.omega)
        h = reflected_cayley_map() if self.reflect else cayley_map()
        if self.kind == "hyperbolic":
            # an expanding dilation is c = -rate in the spiral parametrization,
            # outside its Re c >= 0 domain; it gets its own closed form
            return _HyperbolicDilation(h, self.rate)
        return KoenigsTranslate(h, 1j * self.speed)

    def _advance(self, z, t, tol):
        return self._model._advance(z, t, tol)

    def _advance_with_derivative(self, z, t, tol):
        return self._model._advance_with_derivative(z, t, tol)

    def generator_fn(self):
        return self._model.generator_fn()

    def to_json(self):
        obj = {"type": "automorphism", "kind": self.kind}
        if self.kind == "elliptic":
            obj["omega"] = self.omega
        elif self.kind == "hyperbolic":
            obj["rate"] = self.rate
            obj["reflect"] = self.reflect
        else:
            obj["speed"] = self.speed
            obj["reflect"] = self.reflect
        return obj


@dataclass(frozen=True)
class _HyperbolicDilation(FlowModel):
    """h^{-1}(e^{rate t} h(z)) for a half-plane map h (dilation fixes 0 and inf)."""

    h: ConformalMap
    rate: float

    def _advance(self, z, t, tol):
        u = math.exp(self.rate * t) * self.h.map(z)
        w = self.h.inverse_at(u, seed=z)
        if abs(w) >= 1.0:
            raise InverseError(f"inverse left the disc at {w}")
        return w

    def _advance_with_derivative(self, z, t, tol):
        w = self._advance(z, t, tol)
        dw = math.exp(self.rate * t) * self.h.map_derivative(z) / self.h.map_derivative(w)
        return w, dw

    def generator_fn(self):
        return Product(
            (Constant(self.rate), Quotient(self.h.forward, self.h.forward_derivative))
        )

    def to_json(self):
        return {"type": "automorphism", "kind": "hyperbolic", "rate": self.rate}


@dataclass(frozen=True)
class RotatedFlow(FlowModel):
    """Conjugation psi_t(z) = conj-rotation gamma^{-1} phi_t(gamma z).

    Moves the boundary point gamma to 1 so constructions can assume the
    normalized base point.
    """

    inner: FlowModel
    gamma: complex

    def __post_init__(self):
        g = complex(self.gamma)
        if abs(abs(g) - 1.0) > 1e-12:
            raise ModelError("rotation factor must be unimodular")
        object.__setattr__(self, "gamma", g)

    def _advance(self, z, t, tol):
        return self.inner._advance(self.gamma * z, t, tol) / self.gamma

    def _advance_with_derivative(self, z, t, tol):
        w, dw = self.inner._advance_with_derivative(self.gamma * z, t, tol)
        return w / self.gamma, dw

    def generator_fn(self):
        G = self.inner.generator_fn()
        if G is None:
            return None
        return Product(
            (Constant(1.0 / self.gamma), Compose(G, Polynomial((0.0, self.gamma))))
        )

    def to_json(self):
        return {
            "type": "rotated",
            "gamma": [self.gamma.real, self.gamma.imag],
            "inner": self.inner.to_json(),
        }


# ---------------------------------------------------------------------------
# Flow operations


def advance(flow: FlowModel, z: complex, t: float, tol: float | None = None) -> complex:
    return flow.advance(z, t, tol)


def flow_z_derivative(
    flow: FlowModel, z: complex, t: float, tol: float | None = None
) -> complex:
    """Spatial derivative d phi_t / dz, by the variational equation or chain rule."""
    return flow.advance_with_derivative(z, t, tol)[1]


def check_semigroup(
    flow: FlowModel, z: complex, s: float, t: float, tol: float | None = None
) -> float:
    """Residual |phi_{s+t}(z) - phi_t(phi_s(z))|."""
    direct = flow.advance(z, s + t, tol)
    stepped = flow.advance(flow.advance(z, s, tol), t, tol)
    return abs(direct - stepped)


def extrapolate_to_zero(hs, vals):
    """Neville polynomial extrapolation of samples (h_i, v_i) to h = 0."""
    hs = [float(h) for h in hs]
    tab = [complex(v) for v in vals]
    n = len(tab)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            tab[i] = tab[i] + (tab[i] - tab[i - 1]) * hs[i] / (hs[i - j] - hs[i])
    return tab[-1]


def generator_fd(flow: FlowModel, z: complex, h_ladder) -> complex:
    """Finite-difference estimate of the vector field: extrapolate (phi_h(z)-z)/h.

    The orbit is smooth in t, so the one-sided difference has an error series
    in powers of h and polynomial extrapolation eliminates it order by order.
    """
    h_ladder = list(h_ladder)
    if not h_ladder or any(h <= 0 for h in h_ladder):
        raise ValueError("ladder must be positive")
    if any(b >= a for a, b in zip(h_ladder, h_ladder[1:])):
        raise ValueError("ladder must be decreasing")
    z = complex(z)
    vals = [(flow.advance(z, h, tol=1e-12) - z) / h for h in h_ladder]
    return extrapolate_to_zero(h_ladder, vals)


@dataclass(frozen=True)
class BoundaryOrbit:
    limit: complex
    converged: bool
    verdict: str  # 'inside' or 'boundary'
    increments: tuple


def boundary_orbit(
    flow: FlowModel, gamma0: complex, t: float, r_ladder=None
) -> BoundaryOrbit:
    """Radial limit of phi_t toward the boundary point gamma0.

    Walks r upward along the ladder, Aitken-extrapolates the values, flags
    convergence when the Cauchy increments drop below 1e-6 and reports
    whether the limit lands strictly inside the disc.
    """
    if t <= 0:
        raise ValueError("boundary orbit needs t > 0")
    gamma0 = complex(gamma0)
    if gamma0 == 0:
        raise ValueError("gamma0 must be unimodular")
    gamma0 /= abs(gamma0)
    if r_ladder is None:
        r_ladder = [1.0 - 2.0 ** (-j) for j in range(3, 31)]
    vals = [flow.advance(r * gamma0, t) for r in r_ladder]
    incs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    if len(incs) >= 6:
        head = max(incs[:3])
        tail = max(incs[-3:])
        # a radial limit shrinks the tail by orders of magnitude; a tail
        # comparable to the head means the values are bouncing, not settling
        if tail > 1e-6 and tail > 1e-3 * head:
            raise NoConvergence("radial increments are not decaying")
    limit = vals[-1]
    if len(vals) >= 3:
        d1 = vals[-2] - vals[-3]
        d2 = vals[-1] - vals[-2]
        dd = d2 - d1
        if abs(d1) > 0 and abs(dd) > 1e-300 and abs(d2 / d1) < 0.95:
            limit = vals[-1] - d2 * d2 / dd  # Aitken acceleration of the tail
    converged = bool(incs and incs[-1] < 1e-6)
    verdict = "inside" if abs(limit) < 1.0 - 1e-6 else "boundary"
    return BoundaryOrbit(
        limit=limit, converged=converged, verdict=verdict, increments=tuple(incs)
    )


@dataclass(frozen=True)
class Trajectory:
    """Samples (t, phi_t(z), d phi_t/dz) along one orbit; t strictly increasing."""

    samples: tuple

    def __post_init__(self):
        last = -1.0
        for t, w, _ in self.samples:
            if t <= last:
                raise ValueError("times must be strictly increasing")
            if abs(w) >= 1.0:
                raise ValueError("trajectory value outside the disc")
            last = t

    def to_csv_rows(self):
        for t, w, dw in self.samples:
            yield [t, w.real, w.imag, dw.real, dw.imag]


def flow_trace(
    flow: FlowModel, z0: complex, t_max: float, n: int, tol: float | None = None
) -> Trajectory:
    if n < 1 or t_max <= 0:
        raise ValueError("need n >= 1 samples and t_max > 0")
    samples = []
    for k in range(1, n + 1):
        t = t_max * k / n
        w, dw = flow.advance_with_derivative(z0, t, tol)
        samples.append((t, w, dw))
    return Trajectory(tuple(samples))


# ---------------------------------------------------------------------------
# Automorphism classification


def _fit_mobius(flow: FlowModel, t: float = 1.0):
    """Least-squares Mobius fit of phi_t from point evaluations."""
    zs = [0.0 + 0.0j, 0.3 + 0.0j, -0.4j]
    ws = [flow.advance(z, t) for z in zs]
    rows = [[z, 1.0, -z * w, -w] for z, w in zip(zs, ws)]
    _, _, vh = np.linalg.svd(np.array(rows, dtype=complex))
    a, b, c, d = vh[-1].conjugate()
    mob = Mobius(a, b, c, d)
    for z in (0.15 + 0.25j, -0.5 + 0.1j, 0.6j):
        if abs(mob.eval_anywhere(z) - flow.advance(z, t)) > 1e-9:
            raise ModelError("time-1 map is not a Mobius transformation")
    return a, b, c, d


def _mobius_fixed_points(a, b, c, d):
    """Roots of c z^2 + (d - a) z - b = 0 (fixed points of the fitted map)."""
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(c) <= 1e-14 * scale:
        if abs(b) <= 1e-14 * scale:
            return [0.0 + 0.0j]
        return [b / (d - a)] if abs(d - a) > 1e-14 * scale else []
    disc = (d - a) ** 2 + 4.0 * b * c
    root = cmath.sqrt(disc)
    return [((a - d) + root) / (2.0 * c), ((a - d) - root) / (2.0 * c)]


def classify_automorphism(flow: FlowModel, tol: float = 1e-9) -> str:
    """'elliptic', 'hyperbolic' or 'parabolic' from the time-1 map.

    Fits a Mobius transformation to phi_1, normalizes it to unit determinant
    and classifies by the (squared) trace: 4 parabolic, < 4 elliptic,
    > 4 hyperbolic.
    """
    a, b, c, d = _fit_mobius(flow)
    det = a * d - b * c
    s = cmath.sqrt(det)
    a, b, c, d = a / s, b / s, c / s, d / s
    tr2 = (a + d) ** 2
    if abs(tr2.imag) > 1e-6:
        raise ModelError("time-1 map does not preserve the disc")
    x = tr2.real
    if abs(x - 4.0) <= tol:
        return "parabolic"
    return "elliptic" if x < 4.0 else "hyperbolic"


def automorphism_fixed_points(flow: FlowModel):
    """Fixed points of the fitted time-1 Mobius map."""
    return _mobius_fixed_points(*_fit_mobius(flow))


def flow_from_json(obj: dict) -> FlowModel:
    from .analytic import fn_from_json

    kind = obj["type"]
    if kind == "ode":
        return ode_flow(fn_from_json(obj["G"]), float(obj.get("tol", DEFAULT_TOL)))
    if kind == "koenigs":
        return koenigs_flow(
            map_from_json(obj["h"]), complex(obj["c"][0], obj["c"][1]), obj["mode"]
        )
    if kind == "automorphism":
        return Automorphism(
            kind=obj["kind"],
            omega=float(obj.get("omega", 0.0)),
            rate=float(obj.get("rate", 0.0)),
            speed=float(obj.get("speed", 0.0)),
            reflect=bool(obj.get("reflect", False)),
        )
    if kind == "rotated":
        return RotatedFlow(
            flow_from_json(obj["inner"]), complex(obj["gamma"][0], obj["gamma"][1])
        )
    raise ValueError(f"unknown flow type {kind!r}")


def map_from_json(obj) -> ConformalMap:
    from .analytic import fn_from_json

    if isinstance(obj, str):
        named = {
            "identity": identity_map,
            "cayley": cayley_map,
            "reflected_cayley": reflected_cayley_map,
        }
        if obj not in named:
            raise ValueError(f"unknown named map {obj!r}")
        return named[obj]()
    forward = fn_from_json(obj["forward"])
    if "inverse" in obj:
        return ConformalMap(forward=forward, inverse=fn_from_json(obj["inverse"]))
    nt = obj.get("newton", {})
    seed = nt.get("seed", [0.0, 0.0])
    return ConformalMap(
        forward=forward,
        newton=NewtonInverse(
            seed=complex(seed[0], seed[1]),
            max_iter=int(nt.get("max_iter", 50)),
            tol=float(nt.get("tol", 1e-12)),
        ),
    )
