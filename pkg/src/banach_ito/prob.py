"""Finite probability spaces, partition sigma-algebras and conditional expectation.

A sigma-algebra on a finite sample space is stored by its atoms: a
:class:`Partition` labels every leaf with the index of its block.  Blocks are
numbered in order of their least leaf index, which fixes a deterministic
ordering for output.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .spaces import REAL, Element, SpaceDescriptor, SupGrid, space_from_json

__all__ = [
    "FiniteProbabilitySpace", "Partition", "Filtration", "RandomElement",
    "random_scalar", "expectation", "cond_expectation", "is_measurable", "constant_on_blocks",
    "independent", "jensen_gap", "ConvexMap", "coord_square", "coord_abs",
    "norm_constant", "mult_square", "linear_map", "CONVEX_CATALOGUE",
]

PROB_TOL = 1e-12


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype)
    out.flags.writeable = False
    return out


class FiniteProbabilitySpace:
    """Leaves ``0..n-1`` with strictly positive masses summing to one."""

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float).ravel()
        if p.size == 0:
            raise ValueError("a probability space needs at least one leaf")
        if np.any(p <= 0) or not np.all(np.isfinite(p)):
            raise ValueError("leaf probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        self.probs = _frozen(p)

    @classmethod
    def uniform(cls, n: int) -> FiniteProbabilitySpace:
        return cls(np.full(n, 1.0 / n))

    @property
    def leaf_count(self) -> int:
        return self.probs.size

    def product(self, other: FiniteProbabilitySpace) -> FiniteProbabilitySpace:
        """Product space; leaf ``i * other.leaf_count + j`` is the pair ``(i, j)``."""
        p = np.outer(self.probs, other.probs).ravel()
        return FiniteProbabilitySpace(p / p.sum())

    def __eq__(self, other):
        return isinstance(other, FiniteProbabilitySpace) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"FiniteProbabilitySpace(leaf_count={self.leaf_count})"

    def to_json(self):
        return {"probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["probs"])


class Partition:
    """A set partition of the leaves, i.e. the atoms of a sigma-algebra."""

    def __init__(self, labels):
        raw = np.asarray(labels).ravel()
        # relabel blocks in order of first appearance == order of least leaf
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        self.labels = _frozen(order[inverse], dtype=np.int64)
        self.n_blocks = int(first.size)

    @classmethod
    def from_blocks(cls, blocks, n: int) -> Partition:
        labels = np.full(n, -1, dtype=np.int64)
        for b, block in enumerate(blocks):
            block = list(block)
            if not block:
                raise ValueError("blocks must be nonempty")
            if np.any(labels[block] >= 0):
                raise ValueError("blocks overlap")
            labels[block] = b
        if np.any(labels < 0):
            raise ValueError("blocks do not cover every leaf")
        return cls(labels)

    @classmethod
    def trivial(cls, n: int) -> Partition:
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def discrete(cls, n: int) -> Partition:
        return cls(np.arange(n))

    @property
    def leaf_count(self) -> int:
        return self.labels.size

    @cached_property
    def _order(self):
        order = np.argsort(self.labels, kind="stable")
        starts = np.searchsorted(self.labels[order], np.arange(self.n_blocks))
        return order, starts

    def block_reduce(self, ufunc, values) -> np.ndarray:
        """Apply ``ufunc.reduceat`` over the leaves of every block; rows are blocks."""
        order, starts = self._order
        return ufunc.reduceat(np.asarray(values)[order], starts, axis=0)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        order = np.argsort(self.labels, kind="stable")
        cuts = np.cumsum(np.bincount(self.labels, minlength=self.n_blocks))[:-1]
        return tuple(tuple(int(i) for i in blk) for blk in np.split(order, cuts))

    def refines(self, other: Partition) -> bool:
        """True if every block of ``self`` sits inside a block of ``other``."""
        if other.leaf_count != self.leaf_count:
            raise ValueError("partitions live on different sample spaces")
        rep = np.zeros(self.n_blocks, dtype=np.int64)
        rep[self.labels] = other.labels
        return bool(np.array_equal(rep[self.labels], other.labels))

    def __and__(self, other: Partition) -> Partition:
        """Common refinement (the sigma-algebra generated by both)."""
        return Partition(self.labels * other.n_blocks + other.labels)

    def masses(self, omega: FiniteProbabilitySpace) -> np.ndarray:
        return np.bincount(self.labels, weights=omega.probs, minlength=self.n_blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        return f"Partition(n_blocks={self.n_blocks}, leaf_count={self.leaf_count})"

    def to_json(self):
        return {"blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, obj, n=None):
        blocks = obj["blocks"]
        n = n if n is not None else sum(len(b) for b in blocks)
        return cls.from_blocks(blocks, n)


class Filtration:
    """Partitions on a time grid, each one refining its predecessor."""

    def __init__(self, grid, partitions):
        g = np.asarray(grid, dtype=float).ravel()
        if g.size < 2 or g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must start at 0 and increase strictly")
        partitions = tuple(partitions)
        if len(partitions) != g.size:
            raise ValueError("need one partition per grid time")
        for a, b in zip(partitions, partitions[1:]):
            if not b.refines(a):
                raise ValueError("filtration partitions must refine their predecessors")
        self.grid = _frozen(g)
        self.partitions = partitions

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    @property
    def steps(self) -> int:
        return self.grid.size - 1

    @property
    def leaf_count(self) -> int:
        return self.partitions[0].leaf_count

    def index_at(self, t: float) -> int:
        """Index of the last grid time not after ``t``."""
        if t < 0 or t > self.horizon * (1 + 1e-12):
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        k = int(np.searchsorted(self.grid, t + 1e-12 * max(self.horizon, 1.0), side="right")) - 1
        return min(max(k, 0), self.steps)

    def at(self, t: float) -> Partition:
        return self.partitions[self.index_at(t)]

    def same_as(self, other: Filtration) -> bool:
        return self is other or (np.array_equal(self.grid, other.grid)
                                 and all(a == b for a, b in zip(self.partitions, other.partitions)))


class RandomElement:
    """A random element of ``space``: one coordinate vector per leaf.

    ``values`` has shape ``(leaf_count, space.dim)``.
    """

    def __init__(self, omega: FiniteProbabilitySpace, space: SpaceDescriptor, values):
        arr = space.check(values)
        if arr.ndim == 1 and space.dim == 1:
            arr = arr[:, None]
        if arr.shape != (omega.leaf_count, space.dim):
            raise ValueError(f"expected values of shape {(omega.leaf_count, space.dim)}, got {arr.shape}")
        self.omega = omega
        self.space = space
        self.values = _frozen(arr)

    @classmethod
    def constant(cls, omega, element: Element) -> RandomElement:
        return cls(omega, element.space, np.broadcast_to(element.coords, (omega.leaf_count, element.space.dim)))

    def __repr__(self):
        return f"RandomElement(space={self.space!r}, leaf_count={self.omega.leaf_count})"

    def _coerce(self, other):
        if not isinstance(other, RandomElement) or other.space != self.space or other.omega != self.omega:
            raise ValueError("random elements live on different spaces")
        return other.values

    def __add__(self, other):
        return RandomElement(self.omega, self.space, self.values + self._coerce(other))

    def __sub__(self, other):
        return RandomElement(self.omega, self.space, self.values - self._coerce(other))

    def __neg__(self):
        return RandomElement(self.omega, self.space, -self.values)

    def __mul__(self, r):
        """Scale by a real number or leafwise by a :class:`RandomElement` of ``REAL``."""
        if isinstance(r, RandomElement):
            if r.space.dim != 1 or r.omega != self.omega:
                raise ValueError("can only scale by a random scalar on the same space")
            return RandomElement(self.omega, self.space, self.values * r.values)
        return RandomElement(self.omega, self.space, float(r) * self.values)

    __rmul__ = __mul__

    def at(self, leaf: int) -> Element:
        return Element(self.space, self.values[leaf])

    def norms(self) -> np.ndarray:
        return self.space.norm(self.values)

    def times(self, other: RandomElement) -> RandomElement:
        """Leafwise multiplication ``x . y`` into the multiplication target."""
        self._coerce(other)
        return RandomElement(self.omega, self.space.mult_target, self.space.multiply(self.values, other.values))

    def apply(self, phi) -> RandomElement:
        """Leafwise ``phi(x)`` as a random scalar."""
        return random_scalar(self.omega, phi(self.values))

    def generated_partition(self) -> Partition:
        """Atoms of the sigma-algebra generated by ``x``."""
        _, inverse = np.unique(self.values, axis=0, return_inverse=True)
        return Partition(inverse.ravel())

    def to_json(self):
        return {"space": self.space.to_json(), "probs": self.omega.probs.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(FiniteProbabilitySpace(obj["probs"]), space_from_json(obj["space"]), obj["values"])


def random_scalar(omega: FiniteProbabilitySpace, values) -> RandomElement:
    return RandomElement(omega, REAL, np.asarray(values, dtype=float).reshape(-1, 1))


def expectation(x: RandomElement) -> Element:
    """Probability-weighted sum of the leaf values (the Bochner integral)."""
    return Element(x.space, x.omega.probs @ x.values)


def cond_expectation(x: RandomElement, G: Partition) -> RandomElement:
    """Block averages ``sum_{w in A} P(w) x(w) / P(A)`` broadcast back to leaves."""
    if G.leaf_count != x.omega.leaf_count:
        raise ValueError("partition and random element live on different sample spaces")
    if G.n_blocks == G.leaf_count:
        return RandomElement(x.omega, x.space, x.values.copy())
    mass = G.masses(x.omega)
    avg = G.block_reduce(np.add, x.omega.probs[:, None] * x.values) / mass[:, None]
    return RandomElement(x.omega, x.space, avg[G.labels])


def constant_on_blocks(values, G: Partition, tol: float = PROB_TOL) -> bool:
    """True if the rows of ``values`` agree, up to ``tol`` relative, on every block of ``G``."""
    v = np.asarray(values, dtype=float).reshape(G.leaf_count, -1)
    if G.n_blocks == G.leaf_count or v.size == 0:
        return True
    spread = G.block_reduce(np.maximum, v) - G.block_reduce(np.minimum, v)
    scale = max(1.0, float(np.max(np.abs(v))))
    return bool(np.all(spread <= tol * scale))


def is_measurable(x: RandomElement, G: Partition, tol: float = PROB_TOL) -> bool:
    """True if ``x`` is constant, up to ``tol`` relative, on every block of ``G``."""
    return constant_on_blocks(x.values, G, tol)


def independent(G: Partition, H: Partition, omega: FiniteProbabilitySpace, tol: float = PROB_TOL) -> bool:
    """True if ``P(A n B) = P(A) P(B)`` for every block pair."""
    joint = np.bincount(G.labels * H.n_blocks + H.labels, weights=omega.probs,
                        minlength=G.n_blocks * H.n_blocks).reshape(G.n_blocks, H.n_blocks)
    return bool(np.all(np.abs(joint - np.outer(G.masses(omega), H.masses(omega))) <= tol))


@dataclass(frozen=True)
class ConvexMap:
    """A map ``X -> Y`` that is convex for the coordinatewise order on ``Y``."""

    name: str
    fn: Callable[[SpaceDescriptor, np.ndarray], np.ndarray]
    target_of: Callable[[SpaceDescriptor], SpaceDescriptor]
    linear: bool = False

    def __call__(self, space, coords):
        return self.fn(space, np.asarray(coords, dtype=float))

    def target(self, space):
        return self.target_of(space)


def coord_square() -> ConvexMap:
    return ConvexMap("coord_square", lambda s, c: c * c, lambda s: SupGrid(s.dim))


def coord_abs() -> ConvexMap:
    return ConvexMap("coord_abs", lambda s, c: np.abs(c), lambda s: SupGrid(s.dim))


def norm_constant() -> ConvexMap:
    """``x -> ||x|| (1, ..., 1)``."""
    return ConvexMap("norm_constant",
                     lambda s, c: np.repeat(s.norm(c)[..., None], s.dim, axis=-1),
                     lambda s: SupGrid(s.dim))


def mult_square() -> ConvexMap:
    """``x -> x . x`` in the multiplication target (convex by bilinearity)."""
    return ConvexMap("mult_square", lambda s, c: s.multiply(c, c), lambda s: s.mult_target)


def linear_map(matrix) -> ConvexMap:
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    return ConvexMap("linear", lambda s, c: c @ A.T, lambda s: SupGrid(A.shape[0]), linear=True)


CONVEX_CATALOGUE = {
    "coord_square": coord_square,
    "coord_abs": coord_abs,
    "norm_constant": norm_constant,
    "mult_square": mult_square,
}


def jensen_gap(f: ConvexMap, x: RandomElement, G: Partition) -> RandomElement:
    """``E[f(x) | G] - f(E[x | G])``; coordinatewise non-negative for convex ``f``."""
    Y = f.target(x.space)
    fx = RandomElement(x.omega, Y, f(x.space, x.values))
    lhs = cond_expectation(fx, G)
    rhs = f(x.space, cond_expectation(x, G).values)
    return RandomElement(x.omega, Y, lhs.values - rhs)
