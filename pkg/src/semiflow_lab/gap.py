"""Constructive strong-continuity counterexamples in Bloch-type norms.

Two constructions produce an interpolating double sequence hugging the
boundary point 1: one for flows with an interior radial limit there, one
for automorphism flows (where the orbit slides along the circle and the
levels are pinned by an angle equation).  The test function is a product
of two Blaschke products, the second squared, so that both the function
and its derivative vanish at the pushed points; the weight-dependent terms
of d/dz[W_t f] then cancel and |f'(r_n)|(1 - r_n) certifies a uniform gap.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .analytic import AnalyticFn, BlaschkeFn, Compose, GridSpec, Polynomial, Power, Product, Sum, bloch_norm_grid
from .blaschke import (
    BlaschkeProduct,
    interpolation_delta,
    pseudo_distance,
)
from .cocycles import WeightedSemigroup, weighted_z_derivative
from .errors import (
    BisectionError,
    CaseMismatch,
    DepthExceeded,
    InterpolationError,
    ModelError,
)
from .flows import (
    Automorphism,
    FlowModel,
    RotatedFlow,
    automorphism_fixed_points,
    boundary_orbit,
    classify_automorphism,
)

DEPTH_CAP = 24  # 1 - r_n shrinks at least 4x per level; doubles run out near here
GEOM_MARGIN = 1e-3


@dataclass(frozen=True)
class GapLevel:
    n: int
    t: float
    r: float
    w: complex


@dataclass(frozen=True)
class GapConstruction:
    flow: FlowModel
    gamma0: complex
    levels: tuple
    case: str  # 'radial-limit' or 'automorphism'
    ratios: tuple | None = None          # case 2: (1 - Re w_n) / 2^{-n}
    min_separation: float | None = None  # case 2: min pairwise rho of the sequence
    target_angle: float | None = None    # case 2: +-3*pi/4

    def pairs(self):
        return [(lv.r, lv.t, lv.w) for lv in self.levels]

    def geom_margins(self):
        """Relative margins of 1-r_n < (1-|w_n|)/2 < (1-r_{n-1})/4 per level."""
        out = []
        prev_r = None
        for lv in self.levels:
            half = 0.5 * (1.0 - abs(lv.w))
            first = (half - (1.0 - lv.r)) / half
            second = None
            if prev_r is not None:
                quarter = 0.25 * (1.0 - prev_r)
                second = (quarter - half) / quarter
            out.append({"n": lv.n, "first": first, "second": second})
            prev_r = lv.r
        return out

    def validate(self):
        """Interleaving, decreasing times and geometric margins; raises on violation.

        The interleaving chain and margin requirements belong to the
        radial-limit construction; the automorphism one keeps |w_n| = r_n
        (rotations preserve moduli) and only needs decreasing times.
        """
        prev = None
        radial = self.case == "radial-limit"
        for lv in self.levels:
            if radial and abs(lv.w) >= lv.r:
                raise ValueError(f"level {lv.n}: |w| must stay below r")
            if prev is not None:
                if not lv.r > prev.r:
                    raise ValueError(f"level {lv.n}: radii not increasing")
                if not lv.t < prev.t:
                    raise ValueError(f"level {lv.n}: times not decreasing")
                if radial and not lv.t < prev.t / 2.0:
                    raise ValueError(f"level {lv.n}: time did not halve")
                if radial and not abs(lv.w) > prev.r:
                    raise ValueError(f"level {lv.n}: interleaving broken")
            prev = lv
        if radial:
            for m in self.geom_margins():
                if m["first"] < GEOM_MARGIN:
                    raise ValueError(f"level {m['n']}: first inequality margin too thin")
                if m["second"] is not None and m["second"] < GEOM_MARGIN:
                    raise ValueError(f"level {m['n']}: second inequality margin too thin")


def _radial_limit_modulus(flow: FlowModel, t: float) -> float:
    return abs(boundary_orbit(flow, 1.0, t).limit)


def construct_case1(
    flow: FlowModel, gamma0: complex = 1.0, N: int = 6, t_start: float = 0.5
) -> GapConstruction:
    """Inductive choice of (t_n, r_n) for a flow whose radial limit at gamma0
    falls inside the disc.

    Level n takes t_n below half of t_{n-1}, halving until the boundary
    limit satisfies 1 - |phi_{t_n}(1)| < (1 - r_{n-1})/2, then walks
    r = 1 - 2^{-j} upward until both geometric inequalities hold with
    relative margin >= 1e-3 (the next rung acts as the safety retry).
    """
    if N < 1:
        raise ValueError("need at least one level")
    if N > DEPTH_CAP:
        raise DepthExceeded(f"N = {N} exceeds the double-precision depth cap {DEPTH_CAP}")
    gamma0 = complex(gamma0)
    if abs(abs(gamma0) - 1.0) > 1e-12:
        raise ValueError("gamma0 must be unimodular")
    work = flow if gamma0 == 1.0 else RotatedFlow(flow, gamma0)
    if isinstance(flow, Automorphism):
        raise CaseMismatch("automorphism flows keep the boundary on the boundary")
    orbit = boundary_orbit(work, 1.0, t_start)
    if orbit.verdict != "inside":
        raise CaseMismatch("radial limit stays on the boundary; use the automorphism construction")

    levels = []
    j = 1
    t = float(t_start)
    prev_r = None
    for n in range(1, N + 1):
        if n > 1:
            target = 0.5 * (1.0 - prev_r)
            t = t / 4.0
            guard = 0
            while 1.0 - _radial_limit_modulus(work, t) >= target * (1.0 - GEOM_MARGIN):
                t /= 2.0
                guard += 1
                if guard > 200 or t < 1e-300:
                    raise DepthExceeded("time ladder collapsed before the target shrank")
        while True:
            r = 1.0 - 2.0 ** (-j)
            if 1.0 - r < 1e-13:
                raise DepthExceeded("radius ladder exhausted double precision")
            w = work.advance(r, t)
            first_ok = (1.0 - r) <= 0.5 * (1.0 - abs(w)) * (1.0 - GEOM_MARGIN)
            second_ok = True
            if prev_r is not None:
                second_ok = 0.5 * (1.0 - abs(w)) <= 0.25 * (1.0 - prev_r) * (
                    1.0 - GEOM_MARGIN
                )
            if first_ok and second_ok:
                break
            j += 1
        levels.append(GapLevel(n=n, t=t, r=r, w=w))
        prev_r = r
        j += 1
    gc = GapConstruction(
        flow=work, gamma0=gamma0, levels=tuple(levels), case="radial-limit"
    )
    gc.validate()
    return gc


def build_test_function(gc: GapConstruction) -> AnalyticFn:
    """f = B_outer * B_pushed^2 with zeros {r_n} and {w_n} respectively.

    The squared factor gives a double zero at each pushed point w_n, so both
    f(w_n) and f'(w_n) vanish identically.  Requires the combined sequence
    to be interpolating.
    """
    r_zeros = tuple(complex(lv.r) for lv in gc.levels)
    w_zeros = tuple(lv.w for lv in gc.levels)
    combined = BlaschkeProduct(r_zeros + w_zeros)
    report = interpolation_delta(combined)
    if not report.interpolating:
        raise InterpolationError("combined zero sequence is not interpolating")
    outer = BlaschkeFn(BlaschkeProduct(r_zeros))
    pushed = BlaschkeFn(BlaschkeProduct(w_zeros))
    return Product((outer, Power(pushed, 2)))


@dataclass(frozen=True)
class GapRow:
    n: int
    t: float
    r: float
    w: complex
    lower_bound: float
    grid_gap: float
    cancellation: float


@dataclass(frozen=True)
class GapReport:
    rows: tuple
    delta_hat: float

    def to_csv_rows(self):
        for row in self.rows:
            yield [
                row.n,
                row.t,
                row.r,
                row.w.real,
                row.w.imag,
                row.lower_bound,
                row.grid_gap,
                row.cancellation,
            ]


def bloch_gap(gc: GapConstruction, wsg: WeightedSemigroup, grid: GridSpec) -> GapReport:
    """Per-level Bloch gap of W_{t_n} f - f for the constructed test function.

    Reports (a) the certified pointwise lower bound |f'(r_n)|(1 - r_n),
    which does not involve the weight at all, (b) the grid supremum of
    |d/dz[W_{t_n} f - f]| (1 - |z|^2), and (c) the cancellation residual
    |d/dz[W_{t_n} f](r_n)|, which the double zeros force to quadrature
    tolerance.
    """
    if wsg.flow is not gc.flow:
        # Weights vary across runs; the flow must be the constructed one.
        if wsg.flow.to_json() != gc.flow.to_json():
            raise ValueError("semigroup flow differs from the construction flow")
    f = build_test_function(gc)
    fp = f.derivative()
    for lv in gc.levels:
        if not grid.contains_point(complex(lv.r)):
            raise ValueError(f"grid must include the construction point r_{lv.n} = {lv.r}")
    grid_points = list(grid.iter_points())
    rows = []
    for lv in gc.levels:
        fpr = fp.eval(lv.r)
        lower = abs(fpr) * (1.0 - lv.r)
        gap = 0.0
        for z in grid_points:
            d = weighted_z_derivative(wsg, f, z, lv.t) - fp.eval(z)
            gap = max(gap, abs(d) * (1.0 - abs(z) ** 2))
        cancel = abs(weighted_z_derivative(wsg, f, lv.r, lv.t))
        rows.append(
            GapRow(
                n=lv.n,
                t=lv.t,
                r=lv.r,
                w=lv.w,
                lower_bound=lower,
                grid_gap=gap,
                cancellation=cancel,
            )
        )
    return GapReport(rows=tuple(rows), delta_hat=min(r.lower_bound for r in rows))


def _solve_angle(flow: FlowModel, r: float, target: float, cap: float):
    """Smallest t in (0, cap] with arg(phi_t(r) - 1) = target, or None.

    Samples the continuous angle along the orbit, brackets the first sign
    change that does not wrap the branch cut, then bisects.
    """

    def angle(t: float) -> float:
        return cmath.phase(flow.advance(r, t) - 1.0)

    ts = [cap * 1e-9] + [cap * k / 64.0 for k in range(1, 65)]
    gs = [angle(t) - target for t in ts]
    bracket = None
    for k in range(len(ts) - 1):
        if gs[k] == 0.0:
            return ts[k]
        if gs[k] * gs[k + 1] < 0 and abs(gs[k] - gs[k + 1]) < 0.5 * math.pi:
            bracket = (ts[k], ts[k + 1], gs[k])
            break
    if bracket is None:
        return None
    a, b, ga = bracket
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = angle(mid) - target
        if abs(gm) <= 1e-12:
            return mid
        if ga * gm < 0:
            b = mid
        else:
            a, ga = mid, gm
        if b - a <= 1e-17 * cap:
            break
    mid = 0.5 * (a + b)
    return mid if abs(angle(mid) - target) <= 1e-9 else None


def construct_case2(flow: FlowModel, N: int = 6, t_first_cap: float = 1.0) -> GapConstruction:
    """Level construction for automorphism flows: r_n = 1 - 2^{-n}, t_n pinned
    by arg(phi_{t_n}(r_n) - 1) = +-3*pi/4.

    The sign follows the half-plane the boundary orbit enters; the first
    usable n is the smallest one where the angle equation brackets a root.
    Requires 1 not to be a Denjoy-Wolff point of either time direction.
    """
    if N < 1:
        raise ValueError("need at least one level")
    try:
        kind = classify_automorphism(flow)
    except ModelError as exc:
        raise CaseMismatch(f"flow is not an automorphism family: {exc}") from exc
    if kind in ("hyperbolic", "parabolic"):
        for p in automorphism_fixed_points(flow):
            if abs(p - 1.0) < 1e-6:
                raise CaseMismatch("1 is a Denjoy-Wolff point of the flow")

    probe_r = 1.0 - 2.0 ** (-8)
    tp = min(t_first_cap, 2.0 ** (-6))
    sign = 0.0
    for _ in range(60):
        im = (flow.advance(probe_r, tp) - 1.0).imag
        if abs(im) > 1e-13:
            sign = math.copysign(1.0, im)
            break
        tp *= 2.0
    if sign == 0.0:
        raise CaseMismatch("boundary orbit does not leave the real axis near 1")
    target = sign * 3.0 * math.pi / 4.0

    levels = []
    ratios = []
    t_prev = None
    n = 1
    started = False
    while len(levels) < N:
        if n > 40:
            raise BisectionError("angle equation never bracketed a root (depth 40)")
        r = 1.0 - 2.0 ** (-n)
        cap = t_first_cap if t_prev is None else t_prev / 2.0
        t_n = _solve_angle(flow, r, target, cap)
        if t_n is None and started:
            # The root can sit marginally above t_{n-1}/2; widen once.
            t_n = _solve_angle(flow, r, target, 0.95 * t_prev)
            if t_n is None:
                raise BisectionError(f"no root in (0, {cap:.3e}) at level n = {n}")
        if t_n is not None:
            started = True
            w = flow.advance(r, t_n)
            levels.append(GapLevel(n=n, t=t_n, r=r, w=w))
            ratios.append((1.0 - w.real) / 2.0 ** (-n))
            t_prev = t_n
        n += 1

    pts = [complex(lv.r) for lv in levels] + [lv.w for lv in levels]
    min_sep = min(
        pseudo_distance(pts[i], pts[j])
        for i in range(len(pts))
        for j in range(i + 1, len(pts))
    )
    gc = GapConstruction(
        flow=flow,
        gamma0=1.0,
        levels=tuple(levels),
        case="automorphism",
        ratios=tuple(ratios),
        min_separation=min_sep,
        target_angle=target,
    )
    gc.validate()
    return gc


@dataclass(frozen=True)
class SeparabilityReport:
    rotations: tuple
    matrix: tuple  # upper-triangular grid Bloch gaps
    eps_hat: float | None

    def to_csv_rows(self):
        n = len(self.rotations)
        for i in range(n):
            for j in range(i + 1, n):
                yield [self.rotations[i], self.rotations[j], self.matrix[i][j]]


def separability_witness(
    B: BlaschkeProduct, rotations, grid: GridSpec
) -> SeparabilityReport:
    """Pairwise grid Bloch gaps of the rotated family B_t(z) = B(e^{-it} z).

    Every pair staying a fixed distance apart is an uncountable discrete
    set, witnessing non-separability of any space containing the products.
    """
    rots = [float(th) % (2.0 * math.pi) for th in rotations]
    for i in range(len(rots)):
        for j in range(i + 1, len(rots)):
            d = abs(rots[i] - rots[j])
            if min(d, 2.0 * math.pi - d) < 1e-12:
                raise ValueError("rotations must be distinct modulo 2*pi")
    if not interpolation_delta(B).interpolating:
        raise InterpolationError("rotation family needs an interpolating product")
    fns = [
        Compose(BlaschkeFn(B), Polynomial((0.0, cmath.exp(-1j * th)))) for th in rots
    ]
    n = len(fns)
    matrix = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            diff = Sum((fns[i], Product((Polynomial((-1.0,)), fns[j]))))
            gapv = bloch_norm_grid(diff, grid)
            matrix[i][j] = gapv
            matrix[j][i] = gapv
    off = [matrix[i][j] for i in range(n) for j in range(i + 1, n)]
    eps_hat = min(off) if off else None
    return SeparabilityReport(
        rotations=tuple(rots),
        matrix=tuple(tuple(row) for row in matrix),
        eps_hat=eps_hat,
    )
