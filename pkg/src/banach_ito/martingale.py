"""Scalar martingales on grids and their realized quadratic variation.

Two backends are available.  ``exact_tree`` martingales live on an enumerated
tree of leaves and satisfy the martingale property exactly.  ``monte_carlo``
martingales are sampled paths: every path is a leaf of equal mass, the
filtration is trivial at time zero and discrete afterwards, and martingale
statements only hold up to sampling error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .prob import (FiniteProbabilitySpace, Filtration, Partition, cond_expectation,
                   is_measurable, random_scalar)

__all__ = [
    "EXACT_TREE", "MONTE_CARLO", "ScalarMartingale", "QuadraticVariation",
    "QVReport", "random_walk_martingale", "random_tree_martingale", "mc_brownian",
    "mc_compensated_poisson", "quadratic_variation", "verify_qv_properties",
    "martingale_from_config",
]

EXACT_TREE = "exact_tree"
MONTE_CARLO = "monte_carlo"

MAX_STEPS = 20
MAX_TREE_LEAVES = 1 << MAX_STEPS
# paths per RNG stream; fixing the block size keeps output independent of chunking
MC_BLOCK = 4096


def _scaled_tol(tol, values):
    return tol * max(1.0, float(np.max(np.abs(values))) if np.size(values) else 1.0)


class ScalarMartingale:
    """Real-valued paths ``M(t_j, leaf)`` with ``M(t_0) = 0``.

    ``paths`` has shape ``(leaf_count, len(grid))``.  Between grid times the
    path is the right-continuous step interpolation of its grid values.
    """

    def __init__(self, omega: FiniteProbabilitySpace, filtration: Filtration, paths,
                 backend: str = EXACT_TREE, tol: float = 1e-12):
        if backend not in (EXACT_TREE, MONTE_CARLO):
            raise ValueError(f"unknown backend {backend!r}")
        P = np.array(paths, dtype=float)
        if P.shape != (omega.leaf_count, filtration.grid.size):
            raise ValueError(f"paths must have shape {(omega.leaf_count, filtration.grid.size)}, got {P.shape}")
        if not np.all(np.isfinite(P)):
            raise ValueError("paths must be finite")
        if np.any(P[:, 0] != 0.0):
            raise ValueError("martingale must start at 0")
        if filtration.leaf_count != omega.leaf_count:
            raise ValueError("filtration and probability space disagree on leaf count")
        for j, G in enumerate(filtration.partitions):
            if not is_measurable(random_scalar(omega, P[:, j]), G, tol):
                raise ValueError(f"paths are not adapted at grid index {j}")
        if backend == EXACT_TREE:
            for j in range(filtration.steps):
                nxt = cond_expectation(random_scalar(omega, P[:, j + 1]), filtration.partitions[j])
                if np.max(np.abs(nxt.values[:, 0] - P[:, j])) > _scaled_tol(tol, P[:, j + 1]):
                    raise ValueError(f"martingale property fails at step {j}")
        P.flags.writeable = False
        self.omega = omega
        self.filtration = filtration
        self.paths = P
        self.backend = backend

    @property
    def grid(self) -> np.ndarray:
        return self.filtration.grid

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.paths, axis=1)

    @property
    def exact(self) -> bool:
        return self.backend == EXACT_TREE

    def at(self, t: float) -> np.ndarray:
        """Leaf values of ``M(t)`` under step interpolation."""
        return self.paths[:, self.filtration.index_at(t)]

    def __repr__(self):
        return (f"ScalarMartingale(backend={self.backend!r}, leaves={self.omega.leaf_count}, "
                f"steps={self.filtration.steps})")

    def to_csv(self, fh=None) -> str | None:
        """Write ``leaf,time,value`` rows; returns the text when ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["leaf", "time", "value"])
        for leaf, row in enumerate(self.paths):
            for t, v in zip(self.grid, row):
                w.writerow([leaf, repr(float(t)), repr(float(v))])
        return out.getvalue() if fh is None else None


@dataclass(frozen=True)
class QuadraticVariation:
    """Realized ``[M]`` on the grid together with the increments ``d[M]``."""

    paths: np.ndarray
    increments: np.ndarray

    def at_index(self, j: int) -> np.ndarray:
        return self.paths[:, j]


def quadratic_variation(M: ScalarMartingale) -> QuadraticVariation:
    """Running sum of squared increments, per leaf."""
    d = M.increments ** 2
    qv = np.concatenate([np.zeros((d.shape[0], 1)), np.cumsum(d, axis=1)], axis=1)
    qv.flags.writeable = False
    d.flags.writeable = False
    return QuadraticVariation(qv, d)


@dataclass
class QVReport:
    starts_at_zero: bool
    martingale_residual: float
    jump_residual: float
    backend: str
    max_z: float = 0.0
    z_threshold: float = 4.0
    tol: float = 1e-12
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if not self.starts_at_zero or self.jump_residual > self.tol:
            return False
        if self.backend == EXACT_TREE:
            return self.martingale_residual <= self.tol
        return self.max_z <= self.z_threshold


def verify_qv_properties(M: ScalarMartingale, tol: float = 1e-12, z_threshold: float = 4.0) -> QVReport:
    """Check ``[M](0) = 0``, that ``M**2 - [M]`` is a martingale, and ``d[M] = (dM)**2``.

    On trees the martingale property is checked by exact conditional
    expectation.  On Monte Carlo paths the increment ``D_j`` of ``M**2 - [M]``
    is regressed against the ``F_{t_j}``-measurable statistics ``1, M(t_j),
    M(t_j)**2``; the largest absolute z-score is reported.
    """
    qv = quadratic_variation(M)
    starts = bool(np.all(qv.paths[:, 0] == 0.0))
    jump = float(np.max(np.abs(qv.increments - M.increments ** 2), initial=0.0))
    N = M.paths ** 2 - qv.paths
    steps = M.filtration.steps
    if M.exact:
        worst = 0.0
        for j in range(steps):
            ce = cond_expectation(random_scalar(M.omega, N[:, j + 1]), M.filtration.partitions[j])
            scale = max(1.0, float(np.max(np.abs(N[:, j + 1]))))
            worst = max(worst, float(np.max(np.abs(ce.values[:, 0] - N[:, j]))) / scale)
        return QVReport(starts, worst, jump, M.backend, tol=tol)
    n = M.omega.leaf_count
    D = np.diff(N, axis=1)
    zs = []
    for j in range(steps):
        m = M.paths[:, j]
        for h in (np.ones(n), m, m * m):
            prod = D[:, j] * h
            sd = prod.std(ddof=1) if n > 1 else 0.0
            mean = prod.mean()
            zs.append(0.0 if sd == 0 else abs(mean) / (sd / np.sqrt(n)))
    max_z = max(zs, default=0.0)
    return QVReport(starts, float(np.max(np.abs(D.mean(axis=0)), initial=0.0)), jump,
                    M.backend, max_z=float(max_z), z_threshold=z_threshold, tol=tol)


def _tree_filtration(grid, branching, steps):
    leaves = branching ** steps
    idx = np.arange(leaves)
    parts = [Partition(idx // branching ** (steps - j)) for j in range(steps + 1)]
    return Filtration(grid, parts)


def random_walk_martingale(steps: int, scale: float = 1.0, horizon: float | None = None):
    """Symmetric ``+-scale`` walk on ``2**steps`` equiprobable leaves.

    Leaf ``i`` takes an up-step at time ``t_j`` when bit ``steps - j`` of
    ``i`` is zero, so ``F_{t_j}`` is the partition by ``i >> (steps - j)``.
    The grid defaults to ``t_j = j * scale**2`` so that ``E[M(t)**2] = t``.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps > MAX_STEPS:
        raise ValueError(f"steps={steps} exceeds the leaf guard of {MAX_STEPS}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    grid = (np.linspace(0.0, horizon, steps + 1) if horizon is not None
            else np.arange(steps + 1) * scale ** 2)
    n = 1 << steps
    leaf = np.arange(n)[:, None]
    shift = steps - np.arange(1, steps + 1)[None, :]
    signs = 1.0 - 2.0 * ((leaf >> shift) & 1)
    paths = np.concatenate([np.zeros((n, 1)), np.cumsum(scale * signs, axis=1)], axis=1)
    omega = FiniteProbabilitySpace.uniform(n)
    F = _tree_filtration(grid, 2, steps)
    return omega, F, ScalarMartingale(omega, F, paths, EXACT_TREE)


def random_tree_martingale(steps: int, branching: int = 3, seed: int = 0, grid=None):
    """Non-uniform tree: random child masses and centred random increments."""
    if steps < 1 or branching < 2:
        raise ValueError("need steps >= 1 and branching >= 2")
    if branching ** steps > MAX_TREE_LEAVES:
        raise ValueError("tree too large")
    rng = np.random.default_rng(seed)
    grid = np.arange(steps + 1, dtype=float) if grid is None else np.asarray(grid, dtype=float)
    probs = np.ones(1)
    paths = np.zeros((1, 1))
    for _ in range(steps):
        nodes = probs.size
        cond = rng.dirichlet(np.full(branching, 2.0), size=nodes)
        cond = 0.05 / branching + 0.95 * cond  # keep masses away from 0
        inc = rng.normal(size=(nodes, branching))
        inc -= np.sum(cond * inc, axis=1, keepdims=True)
        probs = (probs[:, None] * cond).ravel()
        new = (paths[:, -1][:, None] + inc).ravel()
        paths = np.concatenate([np.repeat(paths, branching, axis=0), new[:, None]], axis=1)
    omega = FiniteProbabilitySpace(probs / probs.sum())
    F = _tree_filtration(grid, branching, steps)
    return omega, F, ScalarMartingale(omega, F, paths, EXACT_TREE, tol=1e-10)


def _mc_filtration(grid, n):
    disc = Partition.discrete(n)
    return Filtration(grid, [Partition.trivial(n)] + [disc] * (len(grid) - 1))


def _mc_blocks(path_count, seed):
    nblocks = -(-path_count // MC_BLOCK)
    for b, child in enumerate(np.random.SeedSequence(seed).spawn(nblocks)):
        size = min(MC_BLOCK, path_count - b * MC_BLOCK)
        yield np.random.default_rng(child), size


def _check_grid(grid):
    g = np.asarray(grid, dtype=float).ravel()
    if g.size < 2 or g[0] != 0.0 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must start at 0 and increase strictly")
    return g


def mc_brownian(path_count: int, grid, seed: int) -> ScalarMartingale:
    """Brownian motion sampled on ``grid`` with ``path_count`` equiprobable paths."""
    if path_count < 1:
        raise ValueError("path_count must be positive")
    g = _check_grid(grid)
    sd = np.sqrt(np.diff(g))
    chunks = [rng.standard_normal((size, sd.size)) * sd for rng, size in _mc_blocks(path_count, seed)]
    inc = np.concatenate(chunks, axis=0)
    paths = np.concatenate([np.zeros((path_count, 1)), np.cumsum(inc, axis=1)], axis=1)
    omega = FiniteProbabilitySpace.uniform(path_count)
    return ScalarMartingale(omega, _mc_filtration(g, path_count), paths, MONTE_CARLO)


def mc_compensated_poisson(rate: float, grid, path_count: int, seed: int) -> ScalarMartingale:
    """``N(t) - rate * t`` for a Poisson process ``N``, sampled at grid times."""
    if rate <= 0 or path_count < 1:
        raise ValueError("need rate > 0 and path_count >= 1")
    g = _check_grid(grid)
    lam = rate * np.diff(g)
    chunks = [rng.poisson(lam, size=(size, lam.size)) for rng, size in _mc_blocks(path_count, seed)]
    counts = np.cumsum(np.concatenate(chunks, axis=0), axis=1).astype(float)
    paths = np.concatenate([np.zeros((path_count, 1)), counts - rate * g[1:]], axis=1)
    omega = FiniteProbabilitySpace.uniform(path_count)
    return ScalarMartingale(omega, _mc_filtration(g, path_count), paths, MONTE_CARLO)


def martingale_from_config(cfg: dict) -> ScalarMartingale:
    """Build a martingale from a JSON-style dict; ``seed`` is required for random kinds."""
    kind = cfg["kind"]
    if kind == "random_walk":
        return random_walk_martingale(int(cfg["steps"]), float(cfg.get("scale", 1.0)),
                                      cfg.get("horizon"))[2]
    if kind == "random_tree":
        return random_tree_martingale(int(cfg["steps"]), int(cfg.get("branching", 3)), int(cfg["seed"]))[2]
    grid = np.linspace(0.0, float(cfg.get("horizon", 1.0)), int(cfg["steps"]) + 1)
    if kind == "brownian":
        return mc_brownian(int(cfg["path_count"]), grid, int(cfg["seed"]))
    if kind == "poisson":
        return mc_compensated_poisson(float(cfg["rate"]), grid, int(cfg["path_count"]), int(cfg["seed"]))
    raise ValueError(f"unknown martingale kind {kind!r}")
