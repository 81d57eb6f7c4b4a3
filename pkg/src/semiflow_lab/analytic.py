"""Expression trees for functions analytic on the unit disc.

Trees are immutable and evaluate to plain Python complex numbers.
``derivative`` returns a new tree computing the exact analytic derivative
(chain/product/quotient rules applied symbolically, no simplification).
Quotient and Log carry explicit singularity guards: small excluded discs
around known zeros of the denominator / argument.  Evaluation either
returns a finite value or raises; it never returns inf/nan.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .blaschke import BlaschkeProduct, blaschke_derivative, blaschke_eval
from .errors import DomainError, SingularityError

DEFAULT_GUARD_RADIUS = 1e-9


def guard_points(points, radius: float = DEFAULT_GUARD_RADIUS):
    """Build a guard set (excluded discs) from a list of singular points."""
    return tuple((complex(p), float(radius)) for p in points)


class AnalyticFn:
    """Base node.  Subclasses implement ``_eval`` and ``derivative``."""

    guards: tuple = ()

    def eval(self, z: complex) -> complex:
        """Evaluate at a point of the open unit disc."""
        z = complex(z)
        if abs(z) >= 1.0:
            raise DomainError(f"{z} is not inside the open unit disc")
        w = self._eval(z)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            raise SingularityError(f"non-finite value at {z}")
        return w

    __call__ = eval

    def eval_anywhere(self, z: complex) -> complex:
        """Evaluate without the disc check (for maps whose range leaves the disc)."""
        w = self._eval(complex(z))
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            raise SingularityError(f"non-finite value at {z}")
        return w

    def _eval(self, z: complex) -> complex:
        raise NotImplementedError

    def derivative(self) -> "AnalyticFn":
        raise NotImplementedError

    def _check_guards(self, z: complex) -> None:
        for center, radius in self.guards:
            if abs(z - center) <= radius:
                raise SingularityError(f"{z} inside guard disc around {center}")

    # Arithmetic sugar; scalars are promoted to Constant.
    def __add__(self, other):
        return Sum((self, _as_fn(other)))

    def __radd__(self, other):
        return Sum((_as_fn(other), self))

    def __sub__(self, other):
        return Sum((self, Product((Constant(-1.0), _as_fn(other)))))

    def __rsub__(self, other):
        return Sum((_as_fn(other), Product((Constant(-1.0), self))))

    def __mul__(self, other):
        return Product((self, _as_fn(other)))

    def __rmul__(self, other):
        return Product((_as_fn(other), self))

    def __truediv__(self, other):
        return Quotient(self, _as_fn(other))

    def __neg__(self):
        return Product((Constant(-1.0), self))

    def to_json(self) -> dict:
        raise NotImplementedError


def _as_fn(x) -> "AnalyticFn":
    if isinstance(x, AnalyticFn):
        return x
    return Constant(complex(x))


@dataclass(frozen=True)
class Constant(AnalyticFn):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    def _eval(self, z):
        return self.value

    def derivative(self):
        return Constant(0.0)

    def to_json(self):
        return {"op": "const", "value": _c2p(self.value)}


@dataclass(frozen=True)
class Identity(AnalyticFn):
    def _eval(self, z):
        return z

    def derivative(self):
        return Constant(1.0)

    def to_json(self):
        return {"op": "id"}


@dataclass(frozen=True)
class Polynomial(AnalyticFn):
    """Coefficients a_0..a_d, evaluated by Horner's rule."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    def _eval(self, z):
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self):
        if len(self.coeffs) <= 1:
            return Constant(0.0)
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k >= 1))

    def to_json(self):
        return {"op": "poly", "coeffs": [_c2p(c) for c in self.coeffs]}


@dataclass(frozen=True)
class Mobius(AnalyticFn):
    """(a z + b)/(c z + d) with ad - bc != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(self.a * self.d - self.b * self.c) == 0.0:
            raise ValueError("degenerate Mobius map (ad - bc = 0)")

    def _eval(self, z):
        den = self.c * z + self.d
        if den == 0:
            raise SingularityError(f"Mobius pole at {z}")
        return (self.a * z + self.b) / den

    def derivative(self):
        det = self.a * self.d - self.b * self.c
        guards = ()
        if self.c != 0:
            pole = -self.d / self.c
            if abs(pole) < 1.0:
                guards = guard_points([pole])
        return Quotient(
            Constant(det),
            Power(Polynomial((self.d, self.c)), 2),
            guards=guards,
        )

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def to_json(self):
        return {
            "op": "mobius",
            "a": _c2p(self.a),
            "b": _c2p(self.b),
            "c": _c2p(self.c),
            "d": _c2p(self.d),
        }


@dataclass(frozen=True)
class Exp(AnalyticFn):
    inner: AnalyticFn

    def _eval(self, z):
        return cmath.exp(self.inner._eval(z))

    def derivative(self):
        return Product((Exp(self.inner), self.inner.derivative()))

    def to_json(self):
        return {"op": "exp", "arg": self.inner.to_json()}


@dataclass(frozen=True)
class Log(AnalyticFn):
    """Principal-branch logarithm of ``inner``, branch fixed at ``base_point``.

    The guard set must cover the zeros of ``inner``.  Integrals of
    logarithmic derivatives elsewhere in the package are accumulated
    additively and exponentiated once, so no branch tracking happens here.
    """

    inner: AnalyticFn
    base_point: complex = 0.0
    guards: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "base_point", complex(self.base_point))
        object.__setattr__(self, "guards", tuple(self.guards))

    def _eval(self, z):
        self._check_guards(z)
        w = self.inner._eval(z)
        if w == 0:
            raise SingularityError(f"log of zero at {z}")
        return cmath.log(w)

    def derivative(self):
        return Quotient(self.inner.derivative(), self.inner, guards=self.guards)

    def to_json(self):
        return {
            "op": "log",
            "arg": self.inner.to_json(),
            "base": _c2p(self.base_point),
            "guards": _guards2json(self.guards),
        }


@dataclass(frozen=True)
class Sum(AnalyticFn):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def _eval(self, z):
        return sum((t._eval(z) for t in self.terms), 0.0 + 0.0j)

    def derivative(self):
        return Sum(tuple(t.derivative() for t in self.terms))

    def to_json(self):
        return {"op": "sum", "terms": [t.to_json() for t in self.terms]}


@dataclass(frozen=True)
class Product(AnalyticFn):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def _eval(self, z):
        acc = 1.0 + 0.0j
        for f in self.factors:
            acc *= f._eval(z)
        return acc

    def derivative(self):
        terms = []
        for k in range(len(self.factors)):
            terms.append(
                Product(
                    self.factors[:k]
                    + (self.factors[k].derivative(),)
                    + self.factors[k + 1 :]
                )
            )
        if not terms:
            return Constant(0.0)
        return Sum(tuple(terms))

    def to_json(self):
        return {"op": "product", "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True)
class Quotient(AnalyticFn):
    num: AnalyticFn
    den: AnalyticFn
    guards: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "guards", tuple(self.guards))

    def _eval(self, z):
        self._check_guards(z)
        d = self.den._eval(z)
        if d == 0:
            raise SingularityError(f"denominator vanishes at {z}")
        return self.num._eval(z) / d

    def derivative(self):
        return Quotient(
            Sum(
                (
                    Product((self.num.derivative(), self.den)),
                    Product((Constant(-1.0), self.num, self.den.derivative())),
                )
            ),
            Product((self.den, self.den)),
            guards=self.guards,
        )

    def to_json(self):
        return {
            "op": "quotient",
            "num": self.num.to_json(),
            "den": self.den.to_json(),
            "guards": _guards2json(self.guards),
        }


@dataclass(frozen=True)
class Compose(AnalyticFn):
    outer: AnalyticFn
    inner: AnalyticFn

    def _eval(self, z):
        return self.outer._eval(self.inner._eval(z))

    def derivative(self):
        return Product((Compose(self.outer.derivative(), self.inner), self.inner.derivative()))

    def to_json(self):
        return {"op": "compose", "outer": self.outer.to_json(), "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Power(AnalyticFn):
    inner: AnalyticFn
    k: int

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k))

    def _eval(self, z):
        w = self.inner._eval(z)
        if self.k < 0 and w == 0:
            raise SingularityError(f"negative power of zero at {z}")
        return w ** self.k

    def derivative(self):
        if self.k == 0:
            return Constant(0.0)
        return Product(
            (Constant(self.k), Power(self.inner, self.k - 1), self.inner.derivative())
        )

    def to_json(self):
        return {"op": "power", "arg": self.inner.to_json(), "k": self.k}


@dataclass(frozen=True)
class BlaschkeFn(AnalyticFn):
    """A finite Blaschke product as an expression-tree leaf."""

    product: BlaschkeProduct

    def _eval(self, z):
        return blaschke_eval(self.product, z)

    def derivative(self):
        return _BlaschkeDerivative(self.product)

    def as_factor_tree(self) -> AnalyticFn:
        """Equivalent explicit tree: phase times one Mobius factor per zero."""
        factors = [Constant(self.product.phase)]
        for a in self.product.zeros:
            if a == 0:
                factors.append(Mobius(1.0, 0.0, 0.0, 1.0))
            else:
                u = abs(a) / a
                factors.append(Mobius(-u, u * a, -a.conjugate(), 1.0))
        return Product(tuple(factors))

    def to_json(self):
        return {"op": "blaschke", **self.product.to_json()}


@dataclass(frozen=True)
class _BlaschkeDerivative(AnalyticFn):
    """Derivative of a Blaschke product via the cancellation-free sum formula."""

    product: BlaschkeProduct

    def _eval(self, z):
        return blaschke_derivative(self.product, z)

    def derivative(self):
        # Second derivatives are rare; fall back to the expanded factor tree.
        return BlaschkeFn(self.product).as_factor_tree().derivative().derivative()

    def to_json(self):
        return {"op": "blaschke_derivative", **self.product.to_json()}


def _c2p(c: complex):
    return [c.real, c.imag]


def _p2c(p) -> complex:
    return complex(p[0], p[1])


def _guards2json(guards):
    return [[_c2p(c), r] for c, r in guards]


def _json2guards(obj):
    return tuple((_p2c(c), float(r)) for c, r in obj)


def fn_from_json(obj: dict) -> AnalyticFn:
    """Rebuild an expression tree from its JSON form."""
    op = obj["op"]
    if op == "const":
        return Constant(_p2c(obj["value"]))
    if op == "id":
        return Identity()
    if op == "poly":
        return Polynomial(tuple(_p2c(c) for c in obj["coeffs"]))
    if op == "mobius":
        return Mobius(_p2c(obj["a"]), _p2c(obj["b"]), _p2c(obj["c"]), _p2c(obj["d"]))
    if op == "exp":
        return Exp(fn_from_json(obj["arg"]))
    if op == "log":
        return Log(
            fn_from_json(obj["arg"]),
            base_point=_p2c(obj.get("base", [0.0, 0.0])),
            guards=_json2guards(obj.get("guards", [])),
        )
    if op == "sum":
        return Sum(tuple(fn_from_json(t) for t in obj["terms"]))
    if op == "product":
        return Product(tuple(fn_from_json(f) for f in obj["factors"]))
    if op == "quotient":
        return Quotient(
            fn_from_json(obj["num"]),
            fn_from_json(obj["den"]),
            guards=_json2guards(obj.get("guards", [])),
        )
    if op == "compose":
        return Compose(fn_from_json(obj["outer"]), fn_from_json(obj["inner"]))
    if op == "power":
        return Power(fn_from_json(obj["arg"]), int(obj["k"]))
    if op == "blaschke":
        return BlaschkeFn(BlaschkeProduct.from_json(obj))
    if op == "blaschke_derivative":
        return _BlaschkeDerivative(BlaschkeProduct.from_json(obj))
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# Taylor coefficients and norms


@dataclass(frozen=True)
class TaylorSeries:
    """Coefficients a_0..a_N of the expansion at the origin."""

    coeffs: tuple
    order: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if len(self.coeffs) != self.order + 1:
            raise ValueError("need exactly order+1 coefficients")
        for c in self.coeffs:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("non-finite Taylor coefficient")

    def eval(self, z: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * complex(z) + c
        return acc


def _call(f, z: complex) -> complex:
    # Norm helpers accept either a tree or a bare callable (e.g. a semigroup
    # residual z -> (W_t f(z) - f(z))/t - A f(z)).
    if isinstance(f, AnalyticFn):
        return f.eval(z)
    return complex(f(z))


def taylor(f, N: int, r: float) -> TaylorSeries:
    """Coefficients by uniform circle sampling (discrete Cauchy integral).

    Uses M = max(4N, 128) samples on |z| = r; spectrally accurate for
    functions analytic on |z| <= r and exact (to roundoff) for polynomials
    of degree <= N.
    """
    if not 0.0 < r < 1.0:
        raise DomainError("sampling radius must lie in (0,1)")
    if N < 0:
        raise ValueError("N must be >= 0")
    M = max(4 * N, 128)
    samples = np.array(
        [_call(f, r * cmath.exp(2j * math.pi * j / M)) for j in range(M)],
        dtype=complex,
    )
    hat = np.fft.fft(samples) / M
    coeffs = [hat[k] / (r ** k) for k in range(N + 1)]
    return TaylorSeries(tuple(coeffs), N)


def h2_norm(s) -> float:
    """sqrt(sum |a_k|^2): the Hardy H^2 norm of the truncation."""
    coeffs = s.coeffs if isinstance(s, TaylorSeries) else tuple(s)
    return math.sqrt(sum(abs(complex(c)) ** 2 for c in coeffs))


def hp_norm_boundary(f, p: float, r: float, M: int = 256) -> float:
    """Integral mean ((1/M) sum_j |f(r e^{2 pi i j/M})|^p)^{1/p}."""
    if not 0.0 < r < 1.0:
        raise DomainError("radius must lie in (0,1)")
    if p < 1.0:
        raise ValueError("p must be >= 1")
    if M < 64:
        raise ValueError("need at least 64 boundary samples")
    total = 0.0
    for j in range(M):
        total += abs(_call(f, r * cmath.exp(2j * math.pi * j / M))) ** p
    return (total / M) ** (1.0 / p)


@dataclass(frozen=True)
class GridSpec:
    """Deterministic sampling grid: circles |z| = r_i plus explicit points."""

    radii: tuple
    angular: tuple
    points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "angular", tuple(int(m) for m in self.angular))
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        if len(self.radii) != len(self.angular):
            raise ValueError("one angular count per radius")
        last = -1.0
        for r in self.radii:
            if not 0.0 <= r < 1.0 or r <= last:
                raise ValueError("radii must be strictly increasing in [0,1)")
            last = r
        for m in self.angular:
            if m < 1:
                raise ValueError("angular counts must be positive")
        for p in self.points:
            if abs(p) >= 1.0:
                raise ValueError(f"grid point {p} outside the open disc")

    def iter_points(self):
        for r, m in zip(self.radii, self.angular):
            if r == 0.0:
                yield 0.0 + 0.0j
                continue
            for j in range(m):
                yield r * cmath.exp(2j * math.pi * j / m)
        yield from self.points

    def refine(self) -> "GridSpec":
        """Superset refinement: double each angular count, insert midpoint radii."""
        radii = list(self.radii)
        mids = [
            (radii[k] + radii[k + 1]) / 2.0 for k in range(len(radii) - 1)
        ]
        new_radii = sorted(set(radii) | set(mids))
        base = dict(zip(self.radii, self.angular))
        counts = []
        for r in new_radii:
            if r in base:
                counts.append(2 * base[r])
            else:
                counts.append(2 * max(self.angular))
        return GridSpec(tuple(new_radii), tuple(counts), self.points)

    def contains_point(self, p: complex, tol: float = 1e-12) -> bool:
        return any(abs(q - complex(p)) <= tol for q in self.iter_points())

    def to_json(self):
        return {
            "radii": list(self.radii),
            "angular": list(self.angular),
            "points": [_c2p(p) for p in self.points],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            tuple(obj["radii"]),
            tuple(obj["angular"]),
            tuple(_p2c(p) for p in obj.get("points", [])),
        )


def bloch_norm_grid(f, grid: GridSpec, derivative=None) -> float:
    """|f(0)| + max over the grid of |f'(z)| (1 - |z|^2).

    A lower bound for the Bloch norm, nondecreasing under grid refinement.
    ``derivative`` may be supplied for non-tree callables.
    """
    if derivative is None:
        derivative = f.derivative()
    best = 0.0
    for z in grid.iter_points():
        best = max(best, abs(_call(derivative, z)) * (1.0 - abs(z) ** 2))
    return abs(_call(f, 0.0 + 0.0j)) + best
