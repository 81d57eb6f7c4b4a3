"""Cocycles, coboundaries and the weighted composition semigroups they induce.

The multiplicative cocycle attached to an analytic weight g is
m_t(z) = exp(integral_0^t g(phi_s(z)) ds).  The integral (never the
exponential) is the accumulated object: composite Gauss-Legendre panels are
summed first and exponentiated once, which sidesteps any branch ambiguity.
A coboundary m_t(z) = alpha(phi_t(z))/alpha(z) is evaluated directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .analytic import (
    AnalyticFn,
    Compose,
    Constant,
    GridSpec,
    Product,
    Quotient,
    bloch_norm_grid,
    guard_points,
    h2_norm,
    taylor,
)
from .errors import QuadratureError, SingularityError
from .flows import ConformalMap, FlowModel, extrapolate_to_zero


@dataclass(frozen=True)
class Weight:
    """Analytic weight g; induces the exponential cocycle."""

    g: AnalyticFn


@dataclass(frozen=True)
class Coboundary:
    """Non-vanishing alpha (a zero is allowed only at the flow's fixed point)."""

    alpha: AnalyticFn
    fixed_point: complex | None = None


@dataclass(frozen=True)
class WeightedSemigroup:
    """A flow paired with a weight; W_t f = m_t * (f o phi_t)."""

    flow: FlowModel
    weight: Weight | Coboundary
    quadrature_order: int = 16


@lru_cache(maxsize=32)
def _gl_nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def _trajectory_quadrature(flow, z, t, order, integrands, n_panels, tol=None):
    """Composite Gauss-Legendre sums of s -> F(phi_s(z), d_z phi_s(z)) over [0, t].

    Nodes are visited in increasing s and the flow state is advanced from one
    node to the next (with its spatial derivative), so each refinement pass
    costs a single sweep along the trajectory.
    """
    xs, ws = _gl_nodes(order)
    totals = [0.0 + 0.0j for _ in integrands]
    s_prev = 0.0
    w_state = complex(z)
    v_state = 1.0 + 0.0j
    for p in range(n_panels):
        a = t * p / n_panels
        b = t * (p + 1) / n_panels
        half = (b - a) / 2.0
        mid = (a + b) / 2.0
        for x, wt in zip(xs, ws):
            s = mid + half * x
            w_state, dloc = flow.advance_with_derivative(w_state, s - s_prev, tol)
            v_state *= dloc
            s_prev = s
            for i, fn in enumerate(integrands):
                totals[i] += wt * half * fn(w_state, v_state)
    return totals


def _refined_quadrature(wsg, z, t, integrands, tol=None):
    """One halving refinement estimates the panel error; refuse to return junk."""
    base = max(1, math.ceil(t / 0.5))
    coarse = _trajectory_quadrature(
        wsg.flow, z, t, wsg.quadrature_order, integrands, base, tol
    )
    for n_panels in (2 * base, 4 * base):
        fine = _trajectory_quadrature(
            wsg.flow, z, t, wsg.quadrature_order, integrands, n_panels, tol
        )
        err = max(abs(c - f) for c, f in zip(coarse, fine))
        scale = 1.0 + max(abs(f) for f in fine)
        if err <= 1e-10 * scale:
            return fine
        coarse = fine
    raise QuadratureError(f"panel refinement stalled at error {err:.3e}")


def cocycle_eval(wsg: WeightedSemigroup, z: complex, t: float) -> complex:
    """m_t(z) for a Weight-type semigroup."""
    if not isinstance(wsg.weight, Weight):
        raise TypeError("cocycle_eval needs a Weight; use coboundary_eval instead")
    if t < 0:
        raise ValueError("cocycle time must be >= 0")
    if t == 0.0:
        return 1.0 + 0.0j
    g = wsg.weight.g
    if isinstance(g, Constant):
        # Constant weight integrates exactly; also covers the g == 0 shortcut.
        return cmath.exp(g.value * t)
    (integral,) = _refined_quadrature(wsg, z, t, [lambda w, v: g.eval(w)])
    value = cmath.exp(integral)
    assert abs(value) > 0.0
    return value


def coboundary_eval(
    alpha: AnalyticFn,
    flow: FlowModel,
    z: complex,
    t: float,
    fixed_point: complex | None = None,
) -> complex:
    """m_t(z) = alpha(phi_t(z)) / alpha(z)."""
    z = complex(z)
    if fixed_point is not None and abs(z - complex(fixed_point)) <= 1e-12:
        raise SingularityError("evaluation at the allowed zero of alpha")
    az = alpha.eval(z)
    if abs(az) == 0.0:
        raise SingularityError(f"alpha vanishes at {z}")
    value = alpha.eval(flow.advance(z, t)) / az
    assert abs(value) > 0.0
    return value


def _cocycle_value(wsg: WeightedSemigroup, z: complex, t: float) -> complex:
    if isinstance(wsg.weight, Weight):
        return cocycle_eval(wsg, z, t)
    return coboundary_eval(
        wsg.weight.alpha, wsg.flow, z, t, wsg.weight.fixed_point
    )


def check_cocycle_identity(
    wsg: WeightedSemigroup, z: complex, s: float, t: float
) -> float:
    """Residual |m_{t+s}(z) - m_s(z) m_t(phi_s(z))|."""
    direct = _cocycle_value(wsg, z, s + t)
    stepped = _cocycle_value(wsg, z, s) * _cocycle_value(
        wsg, wsg.flow.advance(z, s), t
    )
    return abs(direct - stepped)


def weight_generator_fd(wsg: WeightedSemigroup, z: complex, h_ladder) -> complex:
    """Extrapolated (m_h(z) - 1)/h: recovers g, or G alpha'/alpha for a coboundary."""
    h_ladder = list(h_ladder)
    if not h_ladder or any(h <= 0 for h in h_ladder):
        raise ValueError("ladder must be positive")
    vals = [(_cocycle_value(wsg, z, h) - 1.0) / h for h in h_ladder]
    return extrapolate_to_zero(h_ladder, vals)


def apply_weighted(wsg: WeightedSemigroup, f, z: complex, t: float) -> complex:
    """W_t f(z) = m_t(z) f(phi_t(z))."""
    if t == 0.0:
        return f.eval(z) if isinstance(f, AnalyticFn) else complex(f(z))
    w = wsg.flow.advance(z, t)
    fw = f.eval(w) if isinstance(f, AnalyticFn) else complex(f(w))
    return _cocycle_value(wsg, z, t) * fw


def _cocycle_with_z_derivative(wsg, z, t):
    """(m_t(z), m_t'(z)).  For a weight, m' = m * integral g'(phi_s) d_z phi_s ds
    on the same quadrature grid; for a coboundary, the quotient rule in closed
    form.  Finite differences would inject O(h) noise into cancellation checks,
    hence the differentiated integral."""
    if t == 0.0:
        return 1.0 + 0.0j, 0.0 + 0.0j
    weight = wsg.weight
    if isinstance(weight, Weight):
        g = weight.g
        if isinstance(g, Constant):
            return cmath.exp(g.value * t), 0.0 + 0.0j
        gp = g.derivative()
        integral, d_integral = _refined_quadrature(
            wsg,
            z,
            t,
            [lambda w, v: g.eval(w), lambda w, v: gp.eval(w) * v],
        )
        m = cmath.exp(integral)
        return m, m * d_integral
    alpha = weight.alpha
    ap = alpha.derivative()
    az = alpha.eval(z)
    if abs(az) == 0.0:
        raise SingularityError(f"alpha vanishes at {z}")
    w, dw = wsg.flow.advance_with_derivative(z, t)
    aw = alpha.eval(w)
    m = aw / az
    mp = (ap.eval(w) * dw * az - aw * ap.eval(z)) / (az * az)
    return m, mp


def weighted_z_derivative(wsg: WeightedSemigroup, f: AnalyticFn, z: complex, t: float) -> complex:
    """d/dz [m_t f(phi_t)](z) = m_t'(z) f(phi_t(z)) + m_t(z) f'(phi_t(z)) phi_t'(z)."""
    fp = f.derivative()
    if t == 0.0:
        return fp.eval(z)
    m, mp = _cocycle_with_z_derivative(wsg, z, t)
    w, dw = wsg.flow.advance_with_derivative(z, t)
    return mp * f.eval(w) + m * fp.eval(w) * dw


def apply_generator(G: AnalyticFn, g: AnalyticFn, f: AnalyticFn) -> AnalyticFn:
    """The candidate semigroup generator applied to f: G f' + g f, as a tree."""
    return Product((G, f.derivative())) + Product((g, f))


def weight_fn(wsg: WeightedSemigroup) -> AnalyticFn:
    """The weight g as a tree (for a coboundary, G alpha'/alpha)."""
    if isinstance(wsg.weight, Weight):
        return wsg.weight.g
    G = wsg.flow.generator_fn()
    if G is None:
        raise ValueError("flow lacks a closed-form vector field")
    alpha = wsg.weight.alpha
    guards = ()
    if wsg.weight.fixed_point is not None:
        guards = guard_points([wsg.weight.fixed_point])
    return Product((G, Quotient(alpha.derivative(), alpha, guards=guards)))


@dataclass(frozen=True)
class H2Norm:
    N: int = 64
    r: float = 0.9


@dataclass(frozen=True)
class BlochGridNorm:
    grid: GridSpec


@dataclass(frozen=True)
class ConsistencyTable:
    """Rows (t, residual, ratio) of ||(W_t f - f)/t - A f||; ratio vs previous row."""

    rows: tuple

    def ratios(self):
        return [row[2] for row in self.rows if row[2] is not None]

    def max_residual(self) -> float:
        return max(row[1] for row in self.rows)

    def to_csv_rows(self):
        for t, res, ratio in self.rows:
            yield [t, res, "" if ratio is None else ratio]


def generator_consistency(
    wsg: WeightedSemigroup, f: AnalyticFn, norm, t_ladder
) -> ConsistencyTable:
    """First-order convergence table certifying the generator G f' + g f.

    For each t in the decreasing ladder, measures the chosen norm of
    (W_t f - f)/t - (G f' + g f); the residual of a generator decays
    linearly, so consecutive ratios settle near 1/2.
    """
    t_ladder = list(t_ladder)
    if not t_ladder or any(t <= 0 for t in t_ladder):
        raise ValueError("ladder must be positive")
    if any(b >= a for a, b in zip(t_ladder, t_ladder[1:])):
        raise ValueError("ladder must be decreasing")
    G = wsg.flow.generator_fn()
    if G is None:
        raise ValueError("flow lacks a closed-form vector field")
    g = weight_fn(wsg)
    Af = apply_generator(G, g, f)
    fp = f.derivative()
    Afp = Af.derivative()

    def residual_norm(t: float) -> float:
        def value(z):
            return (apply_weighted(wsg, f, z, t) - f.eval(z)) / t - Af.eval(z)

        if isinstance(norm, H2Norm):
            return h2_norm(taylor(value, norm.N, norm.r))
        if isinstance(norm, BlochGridNorm):
            def deriv(z):
                return (
                    weighted_z_derivative(wsg, f, z, t) - fp.eval(z)
                ) / t - Afp.eval(z)

            return bloch_norm_grid(value, norm.grid, derivative=deriv)
        raise TypeError(f"unknown norm spec {norm!r}")

    rows = []
    prev = None
    for t in t_ladder:
        res = residual_norm(t)
        ratio = None
        if prev is not None and prev > 1e-14:
            ratio = res / prev
        rows.append((t, res, ratio))
        prev = res
    return ConsistencyTable(tuple(rows))


def coboundary_similarity_check(
    alpha: AnalyticFn,
    flow: FlowModel,
    f: AnalyticFn,
    z: complex,
    t: float,
    fixed_point: complex | None = None,
) -> float:
    """Residual of the similarity m_t f(phi_t) = (1/alpha) (alpha f)(phi_t)."""
    m = coboundary_eval(alpha, flow, z, t, fixed_point)
    lhs = m * f.eval(flow.advance(z, t))
    alpha_f = Product((alpha, f))
    rhs = alpha_f.eval(flow.advance(z, t)) / alpha.eval(z)
    return abs(lhs - rhs)


def transfer_generator(h: ConformalMap, G: AnalyticFn, g: AnalyticFn):
    """Pull a generator pair back through h: ((1/h') G o h, g o h)."""
    G1 = Quotient(Compose(G, h.forward), h.forward_derivative)
    g1 = Compose(g, h.forward)
    return G1, g1


def transfer_conjugation_check(
    h: ConformalMap, wsg: WeightedSemigroup, f: AnalyticFn, z: complex, t: float
) -> float:
    """Residual of the conjugated semigroup against the direct disc evaluation.

    The transferred flow is psi_t = h o phi_t o h^{-1} with cocycle
    mu_t = m_t o h^{-1}; every map goes through a forward/inverse round
    trip so the inversion path is genuinely exercised.
    """
    lhs = apply_weighted(wsg, f, z, t)
    w = h.map(z)
    z_back = h.inverse_at(w, seed=z)
    mu = _cocycle_value(wsg, z_back, t)
    phi = wsg.flow.advance(z_back, t)
    psi = h.map(phi)
    rhs = mu * f.eval(h.inverse_at(psi, seed=phi))
    return abs(lhs - rhs)


def weight_from_json(obj: dict):
    from .analytic import fn_from_json

    if obj["type"] == "weight":
        return Weight(fn_from_json(obj["g"]))
    if obj["type"] == "coboundary":
        fp = obj.get("fixed_point")
        return Coboundary(
            fn_from_json(obj["alpha"]),
            None if fp is None else complex(fp[0], fp[1]),
        )
    raise ValueError(f"unknown weight type {obj['type']!r}")


def weight_to_json(weight) -> dict:
    if isinstance(weight, Weight):
        return {"type": "weight", "g": weight.g.to_json()}
    fp = weight.fixed_point
    return {
        "type": "coboundary",
        "alpha": weight.alpha.to_json(),
        "fixed_point": None if fp is None else [fp.real, fp.imag],
    }
