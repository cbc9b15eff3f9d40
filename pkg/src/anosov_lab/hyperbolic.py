"""Moebius transformations of the upper half-plane and boundary geometry.

Points of the hyperbolic plane are Python complex numbers with positive
imaginary part. Boundary points are :class:`BoundaryPoint` values; the
circle angle of a boundary point comes from the Cayley transform
``z -> (z - i) / (z + i)``, which sends ``infinity`` to angle 0 and makes the
angle strictly increasing along the real line. With this convention the
triple ``(0, 1, infinity)`` is positively oriented.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ClassificationError, DomainError

TWO_PI = 2.0 * math.pi
EPS = 2.0 ** -52


class Kind(str, enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True, order=False)
class BoundaryPoint:
    """A point of ``R u {infinity}``; ``x = inf`` encodes the point at infinity."""

    x: float

    def __post_init__(self):
        x = float(self.x)
        if math.isnan(x):
            raise DomainError("boundary point cannot be NaN")
        if math.isinf(x):
            x = math.inf
        object.__setattr__(self, "x", x)

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(math.inf)

    @classmethod
    def from_angle(cls, theta: float) -> "BoundaryPoint":
        """Inverse of :attr:`angle`."""
        theta = theta % TWO_PI
        if theta == 0.0:
            return cls.infinity()
        # angle = 2 pi - 2 atan2(1, x)  =>  x = cot(pi - theta / 2)
        return cls(1.0 / math.tan(math.pi - theta / 2.0))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.x)

    @property
    def angle(self) -> float:
        if self.is_infinite:
            return 0.0
        return (TWO_PI - 2.0 * math.atan2(1.0, self.x)) % TWO_PI

    def to_json(self):
        return "inf" if self.is_infinite else {"finite": self.x}

    @classmethod
    def from_json(cls, obj) -> "BoundaryPoint":
        if obj == "inf":
            return cls.infinity()
        if isinstance(obj, dict) and "finite" in obj:
            return cls(obj["finite"])
        raise DomainError(f"cannot parse boundary point from {obj!r}")

    def __repr__(self):
        return "BoundaryPoint(inf)" if self.is_infinite else f"BoundaryPoint({self.x!r})"


INFINITY = BoundaryPoint(math.inf)

Point = Union[complex, BoundaryPoint]


def angular_distance(p: BoundaryPoint, q: BoundaryPoint) -> float:
    """Distance between the Cayley angles of two boundary points, in [0, pi]."""
    delta = abs(p.angle - q.angle) % TWO_PI
    return min(delta, TWO_PI - delta)


@dataclass(frozen=True)
class MoebiusMap:
    """An element of PSL(2, R) together with a chosen SL(2, R) lift.

    The constructor takes the entries of the *lift*. Entries are rescaled by
    ``1/sqrt(det)`` unless ``det`` equals 1 up to its own rounding error,
    and then stored sign-normalized (trace >= 0, or first
    nonzero entry positive when the trace vanishes); ``sign`` records the
    lift so that ``lift == sign * matrix``.
    """

    a: float
    b: float
    c: float
    d: float
    sign: int = field(default=1)

    def __post_init__(self):
        s0 = 1 if self.sign >= 0 else -1
        a, b, c, d = (s0 * float(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        # renormalize only when det - 1 exceeds the rounding error of ad - bc itself;
        # for large entries that error dominates and dividing by it adds noise
        if abs(det - 1.0) > max(1e-15, 8.0 * EPS * (abs(a * d) + abs(b * c))):
            if not det > 0:
                raise DomainError(f"Moebius map needs positive determinant, got {det!r}")
            r = math.sqrt(det)
            a, b, c, d = a / r, b / r, c / r, d / r
        tr = a + d
        if tr < 0:
            flip = -1
        elif tr > 0:
            flip = 1
        else:
            first = next((v for v in (a, b, c, d) if v != 0.0), 1.0)
            flip = 1 if first > 0 else -1
        object.__setattr__(self, "a", flip * a)
        object.__setattr__(self, "b", flip * b)
        object.__setattr__(self, "c", flip * c)
        object.__setattr__(self, "d", flip * d)
        object.__setattr__(self, "sign", flip)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=float)
        if m.shape == (4,):
            m = m.reshape(2, 2)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def from_normalized(cls, a: float, b: float, c: float, d: float, sign: int) -> "MoebiusMap":
        """Rebuild from stored normalized entries without renormalizing, so round trips are exact."""
        m = object.__new__(cls)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(m, name, float(v))
        object.__setattr__(m, "sign", int(sign))
        return m

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def lift(self) -> np.ndarray:
        return self.sign * self.matrix

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap.from_matrix(self.lift @ other.lift)

    def inverse(self) -> "MoebiusMap":
        s = self.sign
        return MoebiusMap(s * self.d, -s * self.b, -s * self.c, s * self.a)

    def __call__(self, z):
        if isinstance(z, BoundaryPoint):
            return self._act_boundary(z)
        z = complex(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def _act_boundary(self, p: BoundaryPoint) -> BoundaryPoint:
        if p.is_infinite:
            return INFINITY if self.c == 0 else BoundaryPoint(self.a / self.c)
        den = self.c * p.x + self.d
        if den == 0:
            return INFINITY
        return BoundaryPoint((self.a * p.x + self.b) / den)

    def derivative(self, z) -> complex:
        return 1.0 / (self.c * complex(z) + self.d) ** 2

    def kind(self, tol_tr=None) -> Kind:
        return classify(self, tol_tr)


def _default_tol(tr):
    return 1e-9 * max(1.0, abs(tr))


def classify(m: MoebiusMap, tol_tr=None) -> Kind:
    """Identity / elliptic / parabolic / hyperbolic, from |trace| only."""
    tr = m.trace
    tol = _default_tol(tr) if tol_tr is None else tol_tr
    if abs(abs(m.a) - 1) <= tol and abs(abs(m.d) - 1) <= tol and abs(m.b) <= tol and abs(m.c) <= tol \
            and m.a * m.d > 0:
        return Kind.IDENTITY
    atr = abs(tr)
    if abs(atr - 2.0) <= tol:
        return Kind.PARABOLIC
    if atr > 2.0 + tol:
        return Kind.HYPERBOLIC
    return Kind.ELLIPTIC


def _check_upper(z):
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"point {z} is not in the upper half-plane")
    return z


def dist_h2(z1, z2) -> float:
    """Hyperbolic distance in the upper half-plane.

    Evaluated as ``2 asinh(|z1 - z2| / (2 sqrt(y1 y2)))``, which equals
    ``arccosh(1 + |z1 - z2|^2 / (2 y1 y2))`` but keeps full relative accuracy
    for nearby points.
    """
    z1 = _check_upper(z1)
    z2 = _check_upper(z2)
    return 2.0 * math.asinh(abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag)))


def displacement(m: MoebiusMap) -> float:
    """``d(i, m i)``, from ``2 sinh(d / 2) = sqrt((a - d)^2 + (b + c)^2)``.

    Equivalent to ``dist_h2(1j, m(1j))`` but avoids the cancellation in
    ``Im m(i) = 1 / (c^2 + d^2)`` computed through complex division, which
    costs about ``eps * ||m||^2`` for long words.
    """
    return 2.0 * math.asinh(0.5 * math.hypot(m.a - m.d, m.b + m.c))


def translation_length(m: MoebiusMap) -> float:
    if classify(m) is not Kind.HYPERBOLIC:
        return 0.0
    return 2.0 * math.acosh(abs(m.trace) / 2.0)


def fixed_points(m: MoebiusMap) -> tuple:
    """Fixed points on the boundary.

    Returns ``(attracting, repelling)`` for hyperbolic maps and ``(p,)`` for
    parabolic ones.
    """
    kind = classify(m)
    if kind in (Kind.ELLIPTIC, Kind.IDENTITY):
        raise ClassificationError(f"{kind.value} maps have no boundary fixed points")
    a, b, c, d = m.a, m.b, m.c, m.d
    if kind is Kind.PARABOLIC:
        if c == 0.0:
            return (INFINITY,)
        return (BoundaryPoint((a - d) / (2.0 * c)),)
    if c == 0.0:
        finite = BoundaryPoint(b / (d - a))
        return (INFINITY, finite) if abs(a) > abs(d) else (finite, INFINITY)
    # c z^2 + (d - a) z - b = 0, discriminant tr^2 - 4
    B = d - a
    root = math.sqrt(max(m.trace ** 2 - 4.0, 0.0))
    q = -0.5 * (B + math.copysign(root, B))
    z1 = q / c
    z2 = -b / q if q != 0.0 else (a - d) / (2.0 * c)
    if abs(c * z1 + d) > abs(c * z2 + d):
        return BoundaryPoint(z1), BoundaryPoint(z2)
    return BoundaryPoint(z2), BoundaryPoint(z1)


def cyclic_compare(x: BoundaryPoint, y: BoundaryPoint, z: BoundaryPoint) -> int:
    """Orientation of a boundary triple: +1, -1, or 0 if two points coincide."""
    if x == y or y == z or x == z:
        return 0
    ax = x.angle
    by = (y.angle - ax) % TWO_PI
    cz = (z.angle - ax) % TWO_PI
    if by == cz:
        return 0
    return 1 if by < cz else -1


def is_cyclically_ordered(points) -> bool:
    """True when the points are distinct and occur in positive cyclic order."""
    pts = list(points)
    if len(pts) < 3:
        return len(set(pts)) == len(pts)
    base = pts[0].angle
    rel = [(p.angle - base) % TWO_PI for p in pts]
    return all(r1 < r2 for r1, r2 in zip(rel, rel[1:])) and rel[0] == 0.0 and len(set(pts)) == len(pts)


@dataclass(frozen=True)
class GeodesicVector:
    """A unit tangent vector, stored as oriented geodesic plus time.

    Time 0 is the point of the geodesic closest to ``i``.
    """

    v_minus: BoundaryPoint
    v_plus: BoundaryPoint
    t: float = 0.0

    def __post_init__(self):
        if self.v_minus == self.v_plus:
            raise DomainError("geodesic endpoints must be distinct")

    def flow(self, s: float) -> "GeodesicVector":
        return GeodesicVector(self.v_minus, self.v_plus, self.t + s)

    def _frame(self) -> MoebiusMap:
        # isometry sending 0 -> v_minus and infinity -> v_plus
        p, m = self.v_plus, self.v_minus
        if p.is_infinite:
            return MoebiusMap(1.0, m.x, 0.0, 1.0)
        if m.is_infinite:
            return MoebiusMap(p.x, -1.0, 1.0, 0.0)
        det = p.x - m.x
        g = np.array([[p.x, m.x], [1.0, 1.0]])
        if det < 0:
            g = g @ np.diag([1.0, -1.0])
            det = -det
        return MoebiusMap.from_matrix(g / math.sqrt(det))

    def point(self) -> complex:
        g = self._frame()
        w = g.inverse()(1j)
        s0 = math.log(abs(w))
        return g(1j * math.exp(self.t + s0))
