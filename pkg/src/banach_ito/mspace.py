"""The space M(S; X) over a finite measure space, and its estimates.

Functions on ``S`` are arrays of shape ``(atoms, dim)``.  The ``M``-norm is
``||sum_s mu_s x_s**2||_Y ** (1/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .integral import AdaptedProcess, m_norm_process
from .martingale import ScalarMartingale, quadratic_variation
from .prob import Partition, RandomElement, cond_expectation
from .spaces import (ABS_TOL, REL_TOL, DimensionMismatch, Element, Hilbert, Lp, Product,
                     SeqSup, SpaceDescriptor, SupGrid, operator_norm)

__all__ = [
    "FiniteMeasureSpace", "LinearOperator", "m_norm", "l2_norm", "cauchy_schwarz_residual",
    "condexp_contraction", "dominating_operator", "domination_gap", "OperatorBoundsReport",
    "operator_bounds", "product_space_norms", "circ_multiply", "fubini_norm_check",
    "CharacterizationReport", "characterization_norms",
]


class FiniteMeasureSpace:
    """Finitely many atoms with positive weights."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float).ravel()
        if w.size == 0 or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("atom weights must be positive and finite")
        w.flags.writeable = False
        self.weights = w

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def product(self, other: FiniteMeasureSpace) -> FiniteMeasureSpace:
        """Atom ``(s, t)`` sits at index ``s * other.size + t``."""
        return FiniteMeasureSpace(np.outer(self.weights, other.weights).ravel())

    def __repr__(self):
        return f"FiniteMeasureSpace(size={self.size}, total={self.total:g})"


def _fn(x, space, mu):
    a = np.asarray(x, dtype=float)
    if a.ndim == 1 and space.dim == 1:
        a = a[:, None]
    if a.shape != (mu.size, space.dim):
        raise DimensionMismatch(f"expected shape {(mu.size, space.dim)}, got {a.shape}")
    return a


def _square_integral(x, space, mu):
    return mu.weights @ space.multiply(x, x)


def m_norm(x, space: SpaceDescriptor, mu: FiniteMeasureSpace) -> float:
    x = _fn(x, space, mu)
    return float(np.sqrt(space.mult_target.norm(_square_integral(x, space, mu))))


def l2_norm(x, space: SpaceDescriptor, mu: FiniteMeasureSpace) -> float:
    x = _fn(x, space, mu)
    return float(np.sqrt(mu.weights @ space.norm(x) ** 2))


def circ_multiply(x1, x2, space: SpaceDescriptor, mu: FiniteMeasureSpace) -> Element:
    """``x1 o x2 = sum_s mu_s x1(s) . x2(s)`` in ``Y``."""
    a, b = _fn(x1, space, mu), _fn(x2, space, mu)
    return Element(space.mult_target, mu.weights @ space.multiply(a, b))


def cauchy_schwarz_residual(x, y, space: SpaceDescriptor, mu: FiniteMeasureSpace, rel: float = REL_TOL):
    """``(||int x.y||**2, ||int x**2|| ||int y**2||, ok)``."""
    Y = space.mult_target
    a, b = _fn(x, space, mu), _fn(y, space, mu)
    lhs = float(Y.norm(mu.weights @ space.multiply(a, b))) ** 2
    rhs = float(Y.norm(_square_integral(a, space, mu)) * Y.norm(_square_integral(b, space, mu)))
    return lhs, rhs, lhs <= rhs * (1 + rel) + ABS_TOL


def condexp_contraction(x: RandomElement, G: Partition) -> tuple[float, float]:
    """``(||E[x|G]||_M, ||x||_M)`` with ``M = M(Omega; X)``."""
    mu = FiniteMeasureSpace(x.omega.probs)
    return m_norm(cond_expectation(x, G).values, x.space, mu), m_norm(x.values, x.space, mu)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A matrix acting on coordinates, ``domain -> codomain``."""

    matrix: np.ndarray
    domain: SpaceDescriptor
    codomain: SpaceDescriptor

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if A.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionMismatch(f"matrix {A.shape} does not map {self.domain!r} to {self.codomain!r}")
        A.flags.writeable = False
        object.__setattr__(self, "matrix", A)

    def __call__(self, coords):
        return np.asarray(coords, dtype=float) @ self.matrix.T

    @cached_property
    def _norm(self):
        return operator_norm(self.matrix, self.domain, self.codomain)

    @property
    def norm(self) -> float:
        return self._norm[0]

    @property
    def norm_exact(self) -> bool:
        return self._norm[1]


def _root_map(space):
    """Matrix ``R`` with ``x**2 = (R x)**2`` coordinatewise, for coordinate-square kinds."""
    if isinstance(space, (SupGrid, Lp)):
        return np.eye(space.dim)
    if isinstance(space, SeqSup):
        return space.F
    return None


def dominating_operator(A: LinearOperator) -> LinearOperator:
    """A ``B: Y -> W`` with ``(A x)**2 <= B(x**2)`` for every ``x``.

    For coordinate-square kinds write ``R_V A x = C (R_X x)``; Cauchy-Schwarz
    on each row gives ``B = diag(r) |C|`` with ``r`` the row sums of ``|C|``.
    For Hilbert spaces ``B`` is multiplication by ``||A||**2``.
    """
    X, V = A.domain, A.codomain
    if isinstance(X, Hilbert) and isinstance(V, Hilbert):
        s = np.linalg.norm(A.matrix, 2)
        return LinearOperator(np.array([[s * s]]), X.mult_target, V.mult_target)
    RX, RV = _root_map(X), _root_map(V)
    if RX is None or RV is None:
        raise NotImplementedError(f"no domination recipe from {X!r} to {V!r}")
    C = RV @ A.matrix @ np.linalg.pinv(RX)
    absC = np.abs(C)
    return LinearOperator(absC.sum(axis=1)[:, None] * absC, X.mult_target, V.mult_target)


def domination_gap(A: LinearOperator, B: LinearOperator, samples) -> float:
    """Smallest coordinate of ``B(x**2) - (A x)**2`` over ``samples``, scaled by ``||x||**2``."""
    xs = np.atleast_2d(np.asarray(samples, dtype=float))
    Ax = A(xs)
    gap = B(A.domain.multiply(xs, xs)) - A.codomain.multiply(Ax, Ax)
    scale = np.maximum(A.domain.norm(xs) ** 2, 1e-300)
    return float(np.min(gap / scale[:, None]))


@dataclass
class OperatorBoundsReport:
    """Left and right sides of the five mapping estimates, plus the domination certificate."""

    bounds: dict = field(default_factory=dict)
    domination_gap: float = 0.0
    norms_exact: bool = True
    rel: float = REL_TOL

    @property
    def dominated(self) -> bool:
        return self.domination_gap >= -self.rel

    def holds(self, key: str) -> bool:
        lhs, rhs = self.bounds[key]
        return lhs <= rhs * (1 + self.rel) + ABS_TOL

    @property
    def passed(self) -> bool:
        return self.dominated and all(self.holds(k) for k in self.bounds)


def operator_bounds(A: LinearOperator, B: LinearOperator, x, mu: FiniteMeasureSpace, *,
                    G: Partition | None = None, omega=None, C: LinearOperator | None = None,
                    y=None, samples=None) -> OperatorBoundsReport:
    """Evaluate the estimates (i) to (v) for one instance.

    * (i)   ``||E[x|G]||_M <= ||x||_M`` when ``G`` is given; ``mu`` must then
      be the probability space ``omega``.
    * (ii)  ``||(int A x)**2||_W**(1/2) <= sqrt(mu(S) ||B||) ||x||_M``.
    * (iii) ``||(A x(s))**2||_W**(1/2) <= sqrt(||B||) ||x(s)||_X`` for every atom.
    * (iv)  ``||int C x**2||_Z <= ||C|| ||x||_M**2`` with ``C: Y -> Z``.
    * (v)   ``||int x.y||_Y <= ||x||_M ||y||_M``.

    The domination ``(A v)**2 <= B(v**2)`` is checked on ``samples`` together
    with the atoms of ``x``; a failure shows up in the report.
    """
    X, V = A.domain, A.codomain
    x = _fn(x, X, mu)
    W = V.mult_target
    rep = OperatorBoundsReport()
    mx = m_norm(x, X, mu)
    if G is not None:
        if omega is None:
            raise ValueError("estimate (i) needs the probability space")
        lhs, rhs = condexp_contraction(RandomElement(omega, X, x), G)
        rep.bounds["i"] = (lhs, rhs)
    Ax = A(x)
    v = mu.weights @ Ax
    rep.bounds["ii"] = (float(np.sqrt(W.norm(V.multiply(v, v)))), float(np.sqrt(mu.total * B.norm)) * mx)
    per_atom = np.sqrt(W.norm(V.multiply(Ax, Ax)))
    rhs_atom = np.sqrt(B.norm) * X.norm(x)
    worst = int(np.argmax(per_atom - rhs_atom))
    rep.bounds["iii"] = (float(per_atom[worst]), float(rhs_atom[worst]))
    if C is not None:
        z = C(_square_integral(x, X, mu))
        rep.bounds["iv"] = (float(C.codomain.norm(z)), C.norm * mx ** 2)
    if y is not None:
        y = _fn(y, X, mu)
        lhs = float(X.mult_target.norm(mu.weights @ X.multiply(x, y)))
        rep.bounds["v"] = (lhs, mx * m_norm(y, X, mu))
    pts = x if samples is None else np.vstack([x, np.atleast_2d(samples)])
    rep.domination_gap = domination_gap(A, B, pts[np.any(pts != 0, axis=1)]) if np.any(pts) else 0.0
    rep.norms_exact = B.norm_exact and (C is None or C.norm_exact)
    return rep


def product_space_norms(x1, x2, space1: SpaceDescriptor, space2: SpaceDescriptor,
                        mu: FiniteMeasureSpace) -> tuple[float, float, float]:
    """``(m_product, m_pair, ratio)`` for a pair of functions.

    ``m_product`` is the norm of ``(x1, x2)`` in ``M(S; X1 x X2)``, whose
    multiplication target carries the sum norm.  ``m_pair`` is
    ``||x1||_M + ||x2||_M``, the norm of the pair in ``M(S; X1) x M(S; X2)``.
    ``ratio = m_pair**2 / m_product**2`` lies in ``[1, 2]``.
    """
    prod = Product((space1, space2), "l2")
    a, b = _fn(x1, space1, mu), _fn(x2, space2, mu)
    m_product = m_norm(np.hstack([a, b]), prod, mu)
    m_pair = m_norm(a, space1, mu) + m_norm(b, space2, mu)
    ratio = 1.0 if m_product == 0 else (m_pair / m_product) ** 2
    return m_product, m_pair, ratio


def fubini_norm_check(x, space: SpaceDescriptor, mu: FiniteMeasureSpace,
                      lam: FiniteMeasureSpace) -> tuple[float, float]:
    """``(||x||_{M(S; M(T; X))}, ||x||_{M(S x T; X)})`` for ``x`` of shape ``(S, T, dim)``."""
    a = np.asarray(x, dtype=float).reshape(mu.size, lam.size, space.dim)
    inner = np.stack([circ_multiply(a[s], a[s], space, lam).coords for s in range(mu.size)])
    nested = float(np.sqrt(space.mult_target.norm(mu.weights @ inner)))
    flat = m_norm(a.reshape(mu.size * lam.size, space.dim), space, mu.product(lam))
    return nested, flat


@dataclass(frozen=True)
class CharacterizationReport:
    m_norm: float
    coordinate_norm: float
    per_coordinate: np.ndarray

    @property
    def residual(self) -> float:
        return abs(self.m_norm - self.coordinate_norm)

    def ok(self, rel: float = REL_TOL) -> bool:
        return self.residual <= rel * max(self.m_norm, self.coordinate_norm) + ABS_TOL


def characterization_norms(x: AdaptedProcess, M: ScalarMartingale) -> CharacterizationReport:
    """The ``M``-norm against its coordinate description.

    For ``SupGrid`` the coordinate description is the largest scalar ``L^2_M``
    norm of a coordinate; for ``Lp`` it is the ``L^p`` norm of the coordinate
    ``L^2_M`` norms (a maximum when ``p`` is infinite).
    """
    space = x.space
    if not isinstance(space, (SupGrid, Lp)):
        raise TypeError("characterization applies to supgrid and lp spaces")
    dq = quadratic_variation(M).increments
    # scalar L2_M norm of every coordinate, each computed on its own
    per = np.array([np.sqrt(M.omega.probs @ np.sum(x.values[:, :, k] ** 2 * dq, axis=1))
                    for k in range(space.dim)])
    coord = float(np.max(per)) if isinstance(space, SupGrid) else float(Lp(space.weights, space.p).norm(per))
    return CharacterizationReport(m_norm_process(x, M), coord, per)
