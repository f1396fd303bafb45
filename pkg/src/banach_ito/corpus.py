"""Random instances and named integrand families.

Everything here takes an explicit ``numpy.random.Generator`` so sweeps are
reproducible from a seed.
"""

from __future__ import annotations

import math

import numpy as np

from .integral import AdaptedProcess, ElementaryProcess
from .martingale import ScalarMartingale
from .prob import Filtration, Partition
from .spaces import Hilbert, Lp, SeqSup, SpaceDescriptor, SupGrid

__all__ = [
    "random_coords", "random_measurable", "random_adapted", "random_elementary",
    "random_partition", "random_nested_partitions", "catalogue_spaces", "random_space",
    "constant_process", "ramp_process", "linear_family", "power_family", "integrand_from_config",
]


def random_coords(rng: np.random.Generator, space: SpaceDescriptor, count: int) -> np.ndarray:
    """Gaussian coordinates with roughly a fifth of the entries zeroed."""
    c = rng.standard_normal((count, space.dim))
    c[rng.random(c.shape) < 0.2] = 0.0
    return c


def random_measurable(rng, space, G: Partition) -> np.ndarray:
    """Leaf values constant on the blocks of ``G``."""
    return random_coords(rng, space, G.n_blocks)[G.labels]


def random_adapted(rng, filtration: Filtration, space) -> AdaptedProcess:
    v = np.stack([random_measurable(rng, space, filtration.partitions[j])
                  for j in range(filtration.steps)], axis=1)
    return AdaptedProcess(filtration, space, v)


def random_elementary(rng, filtration: Filtration, space) -> ElementaryProcess:
    m = filtration.steps
    inner = np.flatnonzero(rng.random(m - 1) < 0.5) + 1 if m > 1 else np.array([], dtype=int)
    bp = [0, *inner.tolist(), m]
    pieces = [random_measurable(rng, space, filtration.partitions[b]) for b in bp[:-1]]
    return ElementaryProcess(filtration, space, bp, pieces)


def random_partition(rng, n: int, max_blocks: int | None = None) -> Partition:
    k = int(rng.integers(1, (max_blocks or n) + 1))
    labels = rng.integers(0, k, size=n)
    return Partition(labels)


def random_nested_partitions(rng, n: int) -> tuple[Partition, Partition]:
    """``(G, H)`` with ``H`` refining ``G``."""
    H = random_partition(rng, n)
    merge = rng.integers(0, max(1, H.n_blocks // 2 + 1), size=H.n_blocks)
    return Partition(merge[H.labels]), H


def catalogue_spaces(rng=None) -> list[SpaceDescriptor]:
    """The kinds exercised by randomized sweeps; weights are drawn from ``rng``."""
    rng = rng or np.random.default_rng(0)
    w = tuple(float(v) for v in rng.uniform(0.2, 1.5, size=4))
    dirs = rng.standard_normal((6, 3))
    return [SupGrid(4), Lp(w, 2.0), Lp(w, 4.0), Lp(w, math.inf), Hilbert(3),
            SeqSup.from_directions(dirs)]


def random_space(rng) -> SpaceDescriptor:
    spaces = catalogue_spaces(rng)
    return spaces[int(rng.integers(len(spaces)))]


def constant_process(M: ScalarMartingale, space, coords) -> AdaptedProcess:
    F = M.filtration
    v = np.broadcast_to(np.asarray(coords, dtype=float), (F.leaf_count, F.steps, space.dim))
    return AdaptedProcess(F, space, v)


def ramp_process(M: ScalarMartingale, space, coords=None) -> AdaptedProcess:
    """Deterministic ``x(t_j) = (j / m) c``."""
    F = M.filtration
    c = np.ones(space.dim) if coords is None else np.asarray(coords, dtype=float)
    r = np.arange(F.steps) / F.steps
    v = np.broadcast_to(r[None, :, None] * c[None, None, :], (F.leaf_count, F.steps, space.dim))
    return AdaptedProcess(F, space, v)


def linear_family(W: ScalarMartingale, params) -> AdaptedProcess:
    """``x(tau) = tau``: Lipschitz in the parameter with ``L = 1``."""
    params = np.asarray(params, dtype=float)
    F = W.filtration
    v = np.broadcast_to(params, (F.leaf_count, F.steps, params.size))
    return AdaptedProcess(F, SupGrid(params.size), v)


def power_family(W: ScalarMartingale, params, beta: float) -> AdaptedProcess:
    """``x(tau)(s) = |tau|**beta cos(W(s))``, Hölder of order ``beta`` with ``L = 1``."""
    params = np.asarray(params, dtype=float)
    F = W.filtration
    c = np.cos(W.paths[:, :-1])
    v = c[:, :, None] * (np.abs(params) ** beta)[None, None, :]
    return AdaptedProcess(F, SupGrid(params.size), v)


def integrand_from_config(cfg: dict, M: ScalarMartingale, space, rng) -> AdaptedProcess | ElementaryProcess:
    family = cfg.get("family", "random_elementary")
    if family == "constant":
        return constant_process(M, space, cfg.get("coords", np.ones(space.dim)))
    if family == "ramp":
        return ramp_process(M, space, cfg.get("coords"))
    if family == "random_adapted":
        return random_adapted(rng, M.filtration, space)
    if family == "random_elementary":
        return random_elementary(rng, M.filtration, space)
    raise ValueError(f"unknown integrand family {family!r}")
