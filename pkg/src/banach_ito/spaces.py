"""Finite-dimensional Banach spaces, Banach lattices and their multiplications.

Every space is a coordinate representation of ``R^dim``.  A space knows its
norm, how to pair a coordinate vector with a dual coefficient vector, and the
target lattice ``Y`` of its ``Y``-valued multiplication ``x . y``.

All array methods are vectorised over leading axes: ``coords`` has shape
``(..., dim)`` and norms come back with shape ``(...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as iproduct

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "SpaceDescriptor", "SupGrid", "Lp", "Hilbert", "SeqSup", "Product", "REAL",
    "Element", "DualFunctional", "MultiplicationReport",
    "DimensionMismatch", "MultiplicationUndefined", "UnsupportedExactness",
    "NotALattice",
    "norm", "multiply", "lattice_leq", "lattice_join", "lattice_meet",
    "lattice_abs", "check_multiplication_axioms", "norming_functionals",
    "dual_decompose", "space_from_json", "operator_norm",
]

# Tolerances for "exact" assertions on double precision sums.
REL_TOL = 1e-9
ABS_TOL = 1e-12

MAX_NET_SIZE = 500_000


class DimensionMismatch(ValueError):
    pass


class MultiplicationUndefined(ValueError):
    pass


class UnsupportedExactness(ValueError):
    """An exact (epsilon = 0) norming family does not exist in finite form."""


class NotALattice(TypeError):
    pass


def _as_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


class SpaceDescriptor:
    """Base class for the space catalogue.

    Subclasses are frozen dataclasses, so descriptors compare by value and can
    be used as dictionary keys.
    """

    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def is_lattice(self) -> bool:
        return True

    @property
    def mult_target(self) -> SpaceDescriptor:
        raise NotImplementedError

    def norm(self, coords) -> np.ndarray:
        raise NotImplementedError

    def multiply(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def pair(self, coeffs, coords) -> np.ndarray:
        """Apply the dual functional with coefficients ``coeffs``."""
        return np.asarray(coords, dtype=float) @ np.asarray(coeffs, dtype=float)

    def plain_to_coeffs(self, row) -> np.ndarray:
        """Coefficients of the functional ``y -> row @ y`` in this space's pairing."""
        return np.asarray(row, dtype=float)

    def dual_norm(self, coeffs) -> float:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def check(self, coords) -> np.ndarray:
        arr = np.asarray(coords, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"expected trailing dimension {self.dim} for {self!r}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        return arr


@dataclass(frozen=True)
class SupGrid(SpaceDescriptor):
    """C(K) sampled on ``n`` grid points, with the sup norm and pointwise product."""

    n: int
    kind = "supgrid"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("SupGrid needs n >= 1")

    @property
    def dim(self):
        return self.n

    @property
    def mult_target(self):
        return self

    def norm(self, coords):
        return np.max(np.abs(coords), axis=-1)

    def multiply(self, a, b):
        return np.asarray(a, dtype=float) * np.asarray(b, dtype=float)

    def dual_norm(self, coeffs):
        return float(np.sum(np.abs(coeffs)))

    def params(self):
        return {"n": self.n}


REAL = SupGrid(1)


@dataclass(frozen=True)
class Lp(SpaceDescriptor):
    """L^p over finitely many atoms with positive weights, ``1 <= p <= inf``.

    Functionals pair by ``sum(w * c * x)``.  For ``p >= 2`` the pointwise
    product lands in ``L^{p/2}`` over the same atoms.
    """

    weights: tuple
    p: float = 2.0
    kind = "lp"

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_tuple(self.weights))
        object.__setattr__(self, "p", float(self.p))
        if not self.weights:
            raise ValueError("Lp needs at least one atom")
        if any(w <= 0 or not math.isfinite(w) for w in self.weights):
            raise ValueError("Lp weights must be positive and finite")
        if not self.p >= 1:
            raise ValueError("Lp exponent must lie in [1, inf]")

    @cached_property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def dim(self):
        return len(self.weights)

    @property
    def mult_target(self):
        if self.p < 2:
            raise MultiplicationUndefined(f"L^{self.p} has no multiplication into a Banach lattice here")
        return Lp(self.weights, self.p / 2)

    def norm(self, coords):
        a = np.abs(coords)
        if math.isinf(self.p):
            return np.max(a, axis=-1)
        if self.p == 1:
            return a @ self.w
        if self.p == 2:
            return np.sqrt((a * a) @ self.w)
        return ((a ** self.p) @ self.w) ** (1.0 / self.p)

    def multiply(self, a, b):
        self.mult_target  # noqa: B018  raises for p < 2
        return np.asarray(a, dtype=float) * np.asarray(b, dtype=float)

    def pair(self, coeffs, coords):
        return np.asarray(coords, dtype=float) @ (self.w * np.asarray(coeffs, dtype=float))

    def plain_to_coeffs(self, row):
        return np.asarray(row, dtype=float) / self.w

    @property
    def q(self) -> float:
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1)

    def dual_norm(self, coeffs):
        return float(Lp(self.weights, self.q).norm(np.asarray(coeffs, dtype=float)))

    def params(self):
        return {"weights": list(self.weights), "p": "inf" if math.isinf(self.p) else self.p}


@dataclass(frozen=True)
class Hilbert(SpaceDescriptor):
    """Euclidean ``R^n``; the multiplication is the inner product into ``R``."""

    n: int
    kind = "hilbert"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("Hilbert needs n >= 1")

    @property
    def dim(self):
        return self.n

    @property
    def mult_target(self):
        return REAL

    def norm(self, coords):
        return np.sqrt(np.sum(np.square(coords), axis=-1))

    def multiply(self, a, b):
        return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1, keepdims=True)

    def dual_norm(self, coeffs):
        return float(np.sqrt(np.sum(np.square(coeffs))))

    def params(self):
        return {"n": self.n}


@dataclass(frozen=True)
class SeqSup(SpaceDescriptor):
    """``R^d`` normed by ``max_n |phi_n(x)|`` for a finite family of unit functionals.

    The functionals are rows of unit Euclidean length and must span ``R^d``;
    the multiplication ``(x . y)_n = phi_n(x) phi_n(y)`` lands in
    ``SupGrid(len(functionals))``.  The coordinate order is not compatible
    with this norm in general, so the space is not treated as a lattice.
    """

    functionals: tuple
    kind = "seqsup"

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.functionals, dtype=float))
        if F.ndim != 2 or F.size == 0:
            raise ValueError("SeqSup needs a non-empty 2-d array of functionals")
        if not np.allclose(np.linalg.norm(F, axis=1), 1.0, rtol=0, atol=1e-12):
            raise ValueError("SeqSup functionals must have unit length")
        if np.linalg.matrix_rank(F) < F.shape[1]:
            raise ValueError("SeqSup functionals must span the space")
        object.__setattr__(self, "functionals", tuple(tuple(float(v) for v in row) for row in F))

    @classmethod
    def from_directions(cls, directions) -> SeqSup:
        F = np.atleast_2d(np.asarray(directions, dtype=float))
        return cls(F / np.linalg.norm(F, axis=1, keepdims=True))

    @cached_property
    def F(self) -> np.ndarray:
        return np.asarray(self.functionals)

    @property
    def dim(self):
        return self.F.shape[1]

    @property
    def is_lattice(self):
        return False

    @property
    def mult_target(self):
        return SupGrid(self.F.shape[0])

    def norm(self, coords):
        return np.max(np.abs(np.asarray(coords, dtype=float) @ self.F.T), axis=-1)

    def multiply(self, a, b):
        return (np.asarray(a, dtype=float) @ self.F.T) * (np.asarray(b, dtype=float) @ self.F.T)

    def dual_norm(self, coeffs):
        # Smallest l1 mass on the defining functionals that reproduces coeffs.
        c = np.asarray(coeffs, dtype=float)
        if not np.any(c):
            return 0.0
        m = self.F.shape[0]
        res = linprog(np.ones(2 * m), A_eq=np.hstack([self.F.T, -self.F.T]), b_eq=c,
                      bounds=(0, None), method="highs")
        if not res.success:  # pragma: no cover - rows span the space
            raise RuntimeError(res.message)
        return float(res.fun)

    def params(self):
        return {"functionals": [list(r) for r in self.functionals]}


@dataclass(frozen=True)
class Product(SpaceDescriptor):
    """Cartesian product of spaces.

    ``combine="l2"`` gives ``(sum ||x_i||^2)^(1/2)``, ``"l1"`` gives
    ``sum ||x_i||``.  The product multiplication acts factorwise and lands in
    the ``l1`` product of the factor targets.
    """

    factors: tuple
    combine: str = "l2"
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product needs at least one factor")
        if self.combine not in ("l1", "l2"):
            raise ValueError("combine must be 'l1' or 'l2'")

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum([f.dim for f in self.factors])]).tolist())

    def split(self, coords):
        a = np.asarray(coords, dtype=float)
        o = self.offsets
        return [a[..., o[i]:o[i + 1]] for i in range(len(self.factors))]

    @property
    def dim(self):
        return self.offsets[-1]

    @property
    def is_lattice(self):
        return all(f.is_lattice for f in self.factors)

    @property
    def mult_target(self):
        return Product(tuple(f.mult_target for f in self.factors), "l1")

    def norm(self, coords):
        parts = [f.norm(c) for f, c in zip(self.factors, self.split(coords))]
        if self.combine == "l1":
            return sum(parts)
        return np.sqrt(sum(np.square(p) for p in parts))

    def multiply(self, a, b):
        return np.concatenate([f.multiply(x, y) for f, x, y in
                               zip(self.factors, self.split(a), self.split(b))], axis=-1)

    def pair(self, coeffs, coords):
        return sum(f.pair(c, x) for f, c, x in
                   zip(self.factors, self.split(coeffs), self.split(coords)))

    def plain_to_coeffs(self, row):
        return np.concatenate([f.plain_to_coeffs(r) for f, r in zip(self.factors, self.split(row))])

    def dual_norm(self, coeffs):
        parts = [f.dual_norm(c) for f, c in zip(self.factors, self.split(coeffs))]
        return float(max(parts)) if self.combine == "l1" else float(np.sqrt(np.sum(np.square(parts))))

    def params(self):
        return {"factors": [f.to_json() for f in self.factors], "combine": self.combine}


def space_from_json(obj: dict) -> SpaceDescriptor:
    """Inverse of ``SpaceDescriptor.to_json``."""
    kind = obj["kind"]
    params = obj.get("params", {})
    if kind == "supgrid":
        return SupGrid(int(params["n"]))
    if kind == "lp":
        p = params.get("p", 2.0)
        return Lp(params["weights"], math.inf if p in ("inf", "infinity") else float(p))
    if kind == "hilbert":
        return Hilbert(int(params["n"]))
    if kind == "seqsup":
        return SeqSup(params["functionals"])
    if kind == "product":
        return Product(tuple(space_from_json(f) for f in params["factors"]), params.get("combine", "l2"))
    raise ValueError(f"unknown space kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Element:
    """A point of ``space`` given by its coordinate vector."""

    space: SpaceDescriptor
    coords: np.ndarray = field(repr=True)

    def __post_init__(self):
        arr = self.space.check(self.coords)
        if arr.ndim != 1:
            raise DimensionMismatch("an Element holds a single coordinate vector")
        arr = np.array(arr, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @classmethod
    def zero(cls, space):
        return cls(space, np.zeros(space.dim))

    def _same(self, other):
        if not isinstance(other, Element) or other.space != self.space:
            raise DimensionMismatch("elements live in different spaces")

    def __add__(self, other):
        self._same(other)
        return Element(self.space, self.coords + other.coords)

    def __sub__(self, other):
        self._same(other)
        return Element(self.space, self.coords - other.coords)

    def __neg__(self):
        return Element(self.space, -self.coords)

    def __mul__(self, a):
        return Element(self.space, float(a) * self.coords)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, Element) and other.space == self.space
                and np.array_equal(other.coords, self.coords))

    def norm(self) -> float:
        return float(self.space.norm(self.coords))

    def to_json(self) -> list[float]:
        return [float(c) for c in self.coords]


@dataclass(frozen=True, eq=False)
class DualFunctional:
    """A continuous linear functional, stored in the space's own pairing.

    SupGrid, Hilbert, SeqSup: ``phi(x) = sum(c * x)``.  Lp: ``sum(w * c * x)``.
    """

    space: SpaceDescriptor
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.space.check(self.coeffs), dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def from_plain(cls, space, row):
        return cls(space, space.plain_to_coeffs(row))

    @classmethod
    def coordinate(cls, space, k):
        e = np.zeros(space.dim)
        e[k] = 1.0
        return cls.from_plain(space, e)

    def __call__(self, x):
        coords = x.coords if isinstance(x, Element) else np.asarray(x, dtype=float)
        return self.space.pair(self.coeffs, coords)

    @property
    def plain(self) -> np.ndarray:
        """The row vector ``r`` with ``phi(x) = r @ x``."""
        return np.asarray(self.space.pair(self.coeffs, np.eye(self.space.dim)))

    def operator_norm(self) -> float:
        return self.space.dual_norm(self.coeffs)


def _require_same(*xs: Element) -> SpaceDescriptor:
    space = xs[0].space
    for x in xs[1:]:
        if x.space != space:
            raise DimensionMismatch("elements live in different spaces")
    return space


def _require_lattice(space):
    if not space.is_lattice:
        raise NotALattice(f"{space!r} is not represented as a Banach lattice")


def norm(x: Element) -> float:
    return x.norm()


def multiply(x: Element, y: Element) -> Element:
    space = _require_same(x, y)
    return Element(space.mult_target, space.multiply(x.coords, y.coords))


def lattice_leq(a: Element, b: Element, tol: float = 0.0) -> bool:
    space = _require_same(a, b)
    _require_lattice(space)
    return bool(np.all(a.coords <= b.coords + tol))


def lattice_join(a: Element, b: Element) -> Element:
    space = _require_same(a, b)
    _require_lattice(space)
    return Element(space, np.maximum(a.coords, b.coords))


def lattice_meet(a: Element, b: Element) -> Element:
    space = _require_same(a, b)
    _require_lattice(space)
    return Element(space, np.minimum(a.coords, b.coords))


def lattice_abs(a: Element) -> Element:
    """``|a| = a v (-a)``."""
    return lattice_join(a, -a)


@dataclass(frozen=True)
class MultiplicationReport:
    space: SpaceDescriptor
    samples: int
    norm_bound_violation: float
    positivity_violation: float
    symmetry_violation: float
    bilinearity_violation: float
    zero_square_norm: float
    min_square_ratio: float
    tolerance: float = REL_TOL

    @property
    def passed(self) -> bool:
        return (self.norm_bound_violation <= self.tolerance
                and self.positivity_violation <= self.tolerance
                and self.symmetry_violation <= self.tolerance
                and self.bilinearity_violation <= self.tolerance
                and self.zero_square_norm == 0.0
                and self.min_square_ratio > 0.0)

    @property
    def max_violation(self) -> float:
        return max(self.norm_bound_violation, self.positivity_violation,
                   self.symmetry_violation, self.bilinearity_violation)


def _sample_coords(rng, space, count):
    x = rng.standard_normal((count, space.dim)) * np.exp(rng.uniform(-2, 2, (count, 1)))
    # sparse rows and a zero row exercise the degenerate branches
    sparse = rng.random((count, space.dim)) < 0.5
    x[: count // 4] *= sparse[: count // 4]
    x[0] = 0.0
    return x


def check_multiplication_axioms(space: SpaceDescriptor, sample_count: int = 1000,
                                seed=0) -> MultiplicationReport:
    """Randomised check of symmetric bilinearity and the three multiplication axioms."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    Y = space.mult_target
    x = _sample_coords(rng, space, sample_count)
    y = _sample_coords(rng, space, sample_count)[rng.permutation(sample_count)]
    z = _sample_coords(rng, space, sample_count)
    a, b = rng.standard_normal(2)

    nx, ny, nz = space.norm(x), space.norm(y), space.norm(z)
    xy = space.multiply(x, y)
    scale = np.maximum(nx * ny, ABS_TOL)
    norm_gap = np.max(np.maximum(Y.norm(xy) - nx * ny, 0.0) / scale)

    sym = np.max(Y.norm(xy - space.multiply(y, x)) / scale)
    lhs = space.multiply(a * x + b * z, y)
    rhs = a * xy + b * space.multiply(z, y)
    bil = np.max(Y.norm(lhs - rhs) / np.maximum((abs(a) * nx + abs(b) * nz) * ny, ABS_TOL))

    xx = space.multiply(x, x)
    sq_scale = np.maximum(nx * nx, ABS_TOL)
    pos = np.max(np.maximum(-np.min(xx, axis=-1), 0.0) / sq_scale)
    zero_rows = nx == 0
    zero_sq = float(np.max(Y.norm(xx[zero_rows]))) if zero_rows.any() else 0.0
    nonzero = ~zero_rows
    ratio = float(np.min(Y.norm(xx[nonzero]) / sq_scale[nonzero])) if nonzero.any() else 1.0
    return MultiplicationReport(space, sample_count, float(norm_gap), float(pos), float(sym),
                                float(bil), zero_sq, ratio)


def _unit_sphere_cube_net(dim: int, spacing: float) -> np.ndarray:
    """Grid points on the faces ``x_i = +1`` of the cube ``[-1, 1]^dim``."""
    k = int(math.ceil(2.0 / spacing)) + 1
    count = dim * k ** (dim - 1)
    if count > MAX_NET_SIZE:
        raise ValueError(f"norming net of {count} functionals exceeds the size cap")
    ticks = np.linspace(-1.0, 1.0, k)
    faces = []
    for i in range(dim):
        grid = np.array(list(iproduct(ticks, repeat=dim - 1))).reshape(-1, dim - 1)
        face = np.insert(grid, i, 1.0, axis=1)
        faces.append(face)
    return np.unique(np.vstack(faces), axis=0)


def _euclidean_net(n: int, epsilon: float) -> np.ndarray:
    """Unit vectors u with ``max |<u, x>| >= (1 - epsilon) |x|`` for all x."""
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        count = int(math.ceil(math.pi / (2.0 * math.acos(1.0 - epsilon))))
        theta = np.arange(count) * math.pi / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    # A unit x rescaled onto the cube surface is within r of a face grid point,
    # so the angle between them has sine at most r.
    r = math.sqrt(1.0 - (1.0 - epsilon) ** 2)
    pts = _unit_sphere_cube_net(n, 2.0 * r / math.sqrt(n - 1))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def norming_functionals(space: SpaceDescriptor, epsilon: float = 0.0) -> list[DualFunctional]:
    """Unit functionals with ``max_n |phi_n(x)| >= (1 - epsilon) ||x||``.

    Exact families (any ``epsilon``) exist for SupGrid, SeqSup, one
    dimensional spaces and Lp with ``p`` in ``{1, inf}``.  Euclidean-type
    spaces get a finite net sized from ``epsilon``.
    """
    if epsilon < 0 or epsilon >= 1:
        raise ValueError("epsilon must lie in [0, 1)")
    if isinstance(space, Product):
        raise NotImplementedError("norming families for product spaces are not provided")
    d = space.dim
    if isinstance(space, SupGrid) or d == 1 or (isinstance(space, Lp) and math.isinf(space.p)):
        rows = np.eye(d)
    elif isinstance(space, SeqSup):
        rows = space.F
    elif isinstance(space, Lp) and space.p == 1:
        if d > 20:
            raise ValueError("sign-vector family too large")
        signs = np.array(list(iproduct((1.0, -1.0), repeat=d - 1)))
        signs = np.hstack([np.ones((len(signs), 1)), signs])
        return [DualFunctional(space, s) for s in signs]
    else:
        if epsilon == 0:
            raise UnsupportedExactness(f"no finite exact norming family for {space!r}")
        if isinstance(space, Hilbert):
            return [DualFunctional(space, u) for u in _euclidean_net(d, epsilon)]
        if space.p == 2:
            # x -> sqrt(w) x is an isometry onto Euclidean R^d
            return [DualFunctional(space, u / np.sqrt(space.w)) for u in _euclidean_net(d, epsilon)]
        # Duality maps of a grid on the cube surface.  With a == x / |x|_inf and
        # grid point g, J(g)(a) >= |a| - 2 |a - g| and |a| >= min w^(1/p).
        p, w = space.p, space.w
        spacing = epsilon * np.min(w) ** (1 / p) / np.sum(w) ** (1 / p)
        g = _unit_sphere_cube_net(d, spacing)
        ng = space.norm(g)[:, None]
        coeffs = np.sign(g) * np.abs(g) ** (p - 1) / ng ** (p - 1)
        return [DualFunctional(space, c) for c in coeffs]
    funcs = []
    for r in rows:
        phi = DualFunctional.from_plain(space, r)
        funcs.append(DualFunctional(space, phi.coeffs / phi.operator_norm()))
    return funcs


def dual_decompose(phi: DualFunctional) -> tuple[DualFunctional, DualFunctional]:
    """Split ``phi`` into positive parts with ``phi = phi_plus - phi_minus``.

    In the coordinate lattices of this catalogue a functional is positive
    exactly when its coefficients are non-negative, so the split is the
    coordinatewise positive/negative part.
    """
    _require_lattice(phi.space)
    c = phi.coeffs
    return (DualFunctional(phi.space, np.maximum(c, 0.0)),
            DualFunctional(phi.space, np.maximum(-c, 0.0)))


def _extreme_points(space: SpaceDescriptor):
    """Finite set whose convex hull is the closed unit ball, when one exists."""
    d = space.dim
    if d == 1:
        return np.array([[1.0 / float(space.norm(np.ones(1)))]])
    if isinstance(space, SupGrid) or (isinstance(space, Lp) and math.isinf(space.p)):
        if d > 16:
            return None
        s = np.array(list(iproduct((1.0, -1.0), repeat=d - 1)))
        return np.hstack([np.ones((len(s), 1)), s])
    if isinstance(space, Lp) and space.p == 1:
        return np.diag(1.0 / space.w)
    return None


def _is_euclidean(space):
    return isinstance(space, Hilbert) or (isinstance(space, Lp) and space.p == 2)


def _euclid_scale(space):
    return np.ones(space.dim) if isinstance(space, Hilbert) else np.sqrt(space.w)


def operator_norm(matrix, domain: SpaceDescriptor, codomain: SpaceDescriptor,
                  seed=0) -> tuple[float, bool]:
    """Norm of ``y -> matrix @ y`` from ``domain`` to ``codomain``.

    Returns ``(value, exact)``.  Exact routes: a finite set of extreme points
    of the domain ball, a max-type codomain (row dual norms), an l1-type
    codomain via sign enumeration, or Euclidean to Euclidean.  Anything else
    falls back to multistart numerical maximisation, which is a lower bound.
    """
    B = np.atleast_2d(np.asarray(matrix, dtype=float))
    if B.shape != (codomain.dim, domain.dim):
        raise DimensionMismatch(f"matrix shape {B.shape} does not map {domain!r} to {codomain!r}")
    ext = _extreme_points(domain)
    if ext is not None:
        return float(np.max(codomain.norm(ext @ B.T))), True
    if isinstance(codomain, SupGrid) or (isinstance(codomain, Lp) and math.isinf(codomain.p)):
        return max(domain.dual_norm(domain.plain_to_coeffs(r)) for r in B), True
    if _is_euclidean(domain) and _is_euclidean(codomain):
        S = (_euclid_scale(codomain)[:, None] * B) / _euclid_scale(domain)[None, :]
        return float(np.linalg.norm(S, 2)), True
    if isinstance(codomain, Lp) and codomain.p == 1 and codomain.dim <= 16:
        s = np.array(list(iproduct((1.0, -1.0), repeat=codomain.dim)))
        rows = (s * codomain.w) @ B
        return max(domain.dual_norm(domain.plain_to_coeffs(r)) for r in rows), True
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(20):
        y0 = rng.standard_normal(domain.dim)
        res = minimize(lambda y: -float(codomain.norm(B @ y)) / max(float(domain.norm(y)), 1e-300),
                       y0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        best = max(best, -res.fun)
    return best, False
