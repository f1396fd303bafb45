"""Adapted and elementary processes, the Itô integral and its norm identities.

A process on a grid ``t_0 < ... < t_m`` is stored as an array of shape
``(leaf_count, m, dim)``: slot ``j`` is the value on ``[t_j, t_{j+1})`` and
must be ``F_{t_j}``-measurable.  Slot ``j`` is paired with the quadratic
variation increment ``[M](t_{j+1}) - [M](t_j)``, which is the predictable
pairing under which the isometry is an identity on trees.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .martingale import ScalarMartingale, quadratic_variation
from .prob import Filtration, RandomElement, constant_on_blocks
from .spaces import ABS_TOL, REAL, REL_TOL, DualFunctional, Element, Lp, SpaceDescriptor, SupGrid

__all__ = [
    "GridSnapWarning", "GridMismatch", "AdaptedProcess", "ElementaryProcess",
    "l2m_norm", "m_norm_process", "mt_norm", "integrate_elementary", "ito_integral",
    "ItoResult", "IsometryResidual", "ito_isometry_residual", "shift_process",
    "approximate_elementary", "CommutationReport", "functional_commutes",
    "evaluation_commutes", "continuity_profile", "integral_process",
    "HolderTable", "holder_scaling_check",
]


class GridSnapWarning(UserWarning):
    """A time was moved down to the nearest grid time."""


class GridMismatch(ValueError):
    pass


def _snap(filtration: Filtration, t: float, what: str) -> int:
    k = filtration.index_at(t)
    if abs(filtration.grid[k] - t) > 1e-12 * max(1.0, filtration.horizon):
        warnings.warn(f"{what} {t} is not a grid time; snapped down to {filtration.grid[k]}",
                      GridSnapWarning, stacklevel=3)
    return k


class AdaptedProcess:
    """Grid process with ``values[:, j]`` measurable for ``F_{t_j}``.

    With ``strict=False`` non-adapted input is stored and ``adapted`` records
    which slots failed; otherwise construction raises.
    """

    def __init__(self, filtration: Filtration, space: SpaceDescriptor, values, strict: bool = True):
        v = np.array(values, dtype=float)
        if v.ndim == 2 and space.dim == 1:
            v = v[..., None]
        shape = (filtration.leaf_count, filtration.steps, space.dim)
        if v.shape != shape:
            raise ValueError(f"process values must have shape {shape}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("process values must be finite")
        flags = np.array([constant_on_blocks(v[:, j], filtration.partitions[j])
                          for j in range(filtration.steps)])
        if strict and not flags.all():
            raise ValueError(f"process is not adapted at slots {np.flatnonzero(~flags).tolist()}")
        v.flags.writeable = False
        flags.flags.writeable = False
        self.filtration = filtration
        self.space = space
        self.values = v
        self.adapted = flags

    @classmethod
    def zeros(cls, filtration, space):
        return cls(filtration, space, np.zeros((filtration.leaf_count, filtration.steps, space.dim)))

    @classmethod
    def constant(cls, filtration, x: Element):
        v = np.broadcast_to(x.coords, (filtration.leaf_count, filtration.steps, x.space.dim))
        return cls(filtration, x.space, v)

    def _like(self, values):
        return AdaptedProcess(self.filtration, self.space, values, strict=False)

    def _other(self, other):
        if not isinstance(other, AdaptedProcess):
            other = other.to_adapted()
        if other.space != self.space or not self.filtration.same_as(other.filtration):
            raise GridMismatch("processes live on different spaces or grids")
        return other.values

    def __add__(self, other):
        return self._like(self.values + self._other(other))

    def __sub__(self, other):
        return self._like(self.values - self._other(other))

    def __neg__(self):
        return self._like(-self.values)

    def __mul__(self, c):
        return self._like(float(c) * self.values)

    __rmul__ = __mul__

    def to_adapted(self):
        return self

    def coordinate(self, k: int) -> AdaptedProcess:
        return AdaptedProcess(self.filtration, REAL, self.values[:, :, k:k + 1], strict=False)

    def __repr__(self):
        return f"AdaptedProcess(space={self.space!r}, steps={self.filtration.steps})"


class ElementaryProcess:
    """``sum_i x_i 1_[t_i, t_{i+1})`` with breakpoints given as grid indices.

    ``breakpoints`` runs from 0 to ``m`` strictly increasing; ``pieces[i]`` is
    an array of shape ``(leaf_count, dim)`` measurable for the partition at
    ``breakpoints[i]``.
    """

    def __init__(self, filtration: Filtration, space: SpaceDescriptor, breakpoints, pieces):
        bp = tuple(int(b) for b in breakpoints)
        if bp[0] != 0 or bp[-1] != filtration.steps or any(b >= c for b, c in zip(bp, bp[1:])):
            raise ValueError("breakpoints must increase strictly from 0 to the last grid index")
        if len(pieces) != len(bp) - 1:
            raise ValueError("need one piece per breakpoint interval")
        arrs = []
        for b, piece in zip(bp, pieces):
            a = np.array(piece, dtype=float).reshape(filtration.leaf_count, space.dim)
            if not constant_on_blocks(a, filtration.partitions[b]):
                raise ValueError(f"piece starting at grid index {b} is not measurable there")
            a.flags.writeable = False
            arrs.append(a)
        self.filtration = filtration
        self.space = space
        self.breakpoints = bp
        self.pieces = tuple(arrs)

    @classmethod
    def from_times(cls, filtration, space, times, pieces):
        """Breakpoints given as times; off-grid times snap down with a warning."""
        bp = [_snap(filtration, float(t), "breakpoint") for t in times]
        return cls(filtration, space, bp, pieces)

    def to_adapted(self) -> AdaptedProcess:
        v = np.empty((self.filtration.leaf_count, self.filtration.steps, self.space.dim))
        for a, b, piece in zip(self.breakpoints, self.breakpoints[1:], self.pieces):
            v[:, a:b] = piece[:, None, :]
        return AdaptedProcess(self.filtration, self.space, v, strict=False)

    def __repr__(self):
        return f"ElementaryProcess(space={self.space!r}, breakpoints={self.breakpoints})"


def _values(x, M: ScalarMartingale):
    ad = x.to_adapted()
    if not ad.filtration.same_as(M.filtration):
        raise GridMismatch("integrand and martingale use different filtrations")
    return ad.values, ad.space


def _cutoff(M, t):
    return M.filtration.steps if t is None else M.filtration.index_at(t)


def _y_mass(x, M, t=None):
    """``E[sum_{j<k} x_j**2 d[M]_j]`` as coordinates in ``Y``."""
    v, space = _values(x, M)
    k = _cutoff(M, t)
    dq = quadratic_variation(M).increments[:, :k]
    sq = space.multiply(v[:, :k], v[:, :k])
    return np.einsum("n,nj,njd->d", M.omega.probs, dq, sq), space


def l2m_norm(x, M: ScalarMartingale, t: float | None = None) -> float:
    """``(E[sum_j ||x_j||**2 d[M]_j])**(1/2)``, summed over slots ending by ``t``."""
    v, space = _values(x, M)
    k = _cutoff(M, t)
    dq = quadratic_variation(M).increments[:, :k]
    return float(np.sqrt(np.einsum("n,nj,nj->", M.omega.probs, dq, space.norm(v[:, :k]) ** 2)))


def m_norm_process(x, M: ScalarMartingale, t: float | None = None) -> float:
    """``||E[sum_j x_j**2 d[M]_j]||_Y ** (1/2)``."""
    mass, space = _y_mass(x, M, t)
    return float(np.sqrt(space.mult_target.norm(mass)))


def mt_norm(z: RandomElement) -> float:
    """Norm of a random element in ``M(Omega; X)``: ``||E[z**2]||_Y ** (1/2)``."""
    mass = z.omega.probs @ z.space.multiply(z.values, z.values)
    return float(np.sqrt(z.space.mult_target.norm(mass)))


def integrate_elementary(x, M: ScalarMartingale, t: float | None = None) -> RandomElement:
    """``sum_i x_i (M(t_{i+1} ^ t) - M(t_i ^ t))`` leaf by leaf."""
    t = M.filtration.horizon if t is None else float(t)
    k = M.filtration.index_at(t)
    if isinstance(x, ElementaryProcess):
        if not x.filtration.same_as(M.filtration):
            raise GridMismatch("integrand and martingale use different filtrations")
        out = np.zeros((M.omega.leaf_count, x.space.dim))
        for a, b, piece in zip(x.breakpoints, x.breakpoints[1:], x.pieces):
            out += piece * (M.paths[:, min(b, k)] - M.paths[:, min(a, k)])[:, None]
        return RandomElement(M.omega, x.space, out)
    v, space = _values(x, M)
    out = np.einsum("njd,nj->nd", v[:, :k], M.increments[:, :k])
    return RandomElement(M.omega, space, out)


@dataclass(frozen=True)
class IsometryResidual:
    lhs: Element
    rhs: Element
    residual: float

    @property
    def relative(self) -> float:
        scale = max(self.lhs.norm(), self.rhs.norm())
        return 0.0 if scale == 0 else self.residual / scale

    def ok(self, rel: float = REL_TOL) -> bool:
        return self.residual <= rel * max(self.lhs.norm(), self.rhs.norm()) + ABS_TOL


def ito_isometry_residual(x, M: ScalarMartingale, t: float | None = None) -> IsometryResidual:
    """Compare ``E[(int x dM)**2]`` with ``E[int x**2 d[M]]`` in ``Y``."""
    z = integrate_elementary(x, M, t)
    Y = z.space.mult_target
    lhs = M.omega.probs @ z.space.multiply(z.values, z.values)
    rhs, _ = _y_mass(x, M, t)
    return IsometryResidual(Element(Y, lhs), Element(Y, rhs), float(Y.norm(lhs - rhs)))


def shift_process(x: AdaptedProcess, t_shift: float) -> AdaptedProcess:
    """``x(s - t_shift)`` for ``s >= t_shift`` and 0 before.

    An off-grid shift snaps down to a grid time with :class:`GridSnapWarning`.
    """
    F = x.filtration
    k = _snap(F, float(t_shift), "shift")
    g = F.grid
    out = np.zeros_like(x.values)
    for j in range(k, F.steps):
        out[:, j] = x.values[:, F.index_at(g[j] - g[k])]
    return AdaptedProcess(F, x.space, out)


def approximate_elementary(x: AdaptedProcess, M: ScalarMartingale, N: int, shifted: bool = False):
    """Freeze ``x`` on ``N`` equal windows of grid slots.

    The default keeps ``x`` at each window's left endpoint, which is already
    measurable there, so the approximation is exact once windows are single
    slots.  ``shifted=True`` first delays ``x`` by one window, as in the
    density argument; that variant keeps a one-window lag at every ``N``.

    Returns ``(elementary, l2m_error)``.
    """
    m = x.filtration.steps
    if N < 1 or m % N:
        raise ValueError(f"coarseness {N} must divide the {m} grid slots")
    L = m // N
    src = x.values
    if shifted:
        src = np.concatenate([np.zeros_like(src[:, :L]), src[:, :m - L]], axis=1)
    bp = list(range(0, m + 1, L))
    pieces = [src[:, b] for b in bp[:-1]]
    y = ElementaryProcess(x.filtration, x.space, bp, pieces)
    return y, l2m_norm(x - y, M)


@dataclass(frozen=True)
class ItoResult:
    value: RandomElement
    error_bound: float
    coarseness: int
    reached: bool


def ito_integral(x, M: ScalarMartingale, t: float | None = None, target_error: float = 0.0) -> ItoResult:
    """Integrate elementary approximations with growing coarseness.

    ``N`` runs through the divisors of the slot count until the ``M``-norm
    error ``||x - x_N||`` is at most ``target_error``; by the isometry that
    number also bounds the error of the returned integral in ``M_t``.
    """
    x = x.to_adapted()
    m = x.filtration.steps
    divisors = [d for d in range(1, m + 1) if m % d == 0]
    for N in divisors:
        y, _ = approximate_elementary(x, M, N)
        err = m_norm_process(x - y, M)
        if err <= target_error or N == m:
            return ItoResult(integrate_elementary(y, M, t), err, N, err <= target_error)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class CommutationReport:
    residual: float
    psi_gap: float | None = None

    def ok(self, rel: float = REL_TOL, scale: float = 1.0) -> bool:
        good = self.residual <= rel * max(scale, 1.0)
        return good and (self.psi_gap is None or self.psi_gap >= -rel * max(scale, 1.0))


def functional_commutes(phi: DualFunctional, x, M: ScalarMartingale, t: float | None = None,
                        psi: DualFunctional | None = None) -> CommutationReport:
    """``phi(int x dM)`` against ``int phi(x) dM``.

    With ``psi`` on the multiplication target, also report the smallest value
    of ``psi(xi**2) - phi(xi)**2`` over the process values and the integral.
    """
    v, space = _values(x, M)
    z = integrate_elementary(x, M, t)
    lhs = phi(z.values)
    scalar = AdaptedProcess(M.filtration, REAL, phi(v)[..., None], strict=False)
    rhs = integrate_elementary(scalar, M, t).values[:, 0]
    gap = None
    if psi is not None:
        xi = np.concatenate([v.reshape(-1, space.dim), z.values])
        gap = float(np.min(psi(space.multiply(xi, xi)) - phi(xi) ** 2))
    return CommutationReport(float(np.max(np.abs(lhs - rhs), initial=0.0)), gap)


def evaluation_commutes(x, W: ScalarMartingale, t: float | None = None, k: int = 0) -> float:
    """``|int x(.)(k) dW - (int x dW)(k)|`` maximised over leaves."""
    v, space = _values(x, W)
    if not isinstance(space, (SupGrid, Lp)):
        raise TypeError("point evaluation needs a function-space kind (supgrid or lp)")
    if not 0 <= k < space.dim:
        raise IndexError(f"coordinate {k} out of range")
    whole = integrate_elementary(x, W, t).values[:, k]
    scalar = AdaptedProcess(W.filtration, REAL, v[:, :, k:k + 1], strict=False)
    part = integrate_elementary(scalar, W, t).values[:, 0]
    return float(np.max(np.abs(whole - part), initial=0.0))


def continuity_profile(x, M: ScalarMartingale, times) -> np.ndarray:
    """``||int_0^t x dM||_{M_t}`` for each ``t`` in ``times``."""
    return np.array([mt_norm(integrate_elementary(x, M, float(t))) for t in times])


def integral_process(x, M: ScalarMartingale) -> AdaptedProcess:
    """``t -> int_0^t x dM`` sampled at the left end of every slot."""
    v, space = _values(x, M)
    run = np.cumsum(v * M.increments[:, :, None], axis=1)
    vals = np.concatenate([np.zeros_like(run[:, :1]), run[:, :-1]], axis=1)
    return AdaptedProcess(M.filtration, space, vals, strict=False)


@dataclass(frozen=True)
class HolderTable:
    """Rows ``(|tau - sigma|, mean square, standard error, bound)`` and the fitted slope."""

    rows: np.ndarray
    slope: float
    beta: float

    @property
    def dist(self):
        return self.rows[:, 0]

    @property
    def mean_sq(self):
        return self.rows[:, 1]

    @property
    def se(self):
        return self.rows[:, 2]

    @property
    def bound(self):
        return self.rows[:, 3]

    def within_bound(self, z: float = 4.0) -> bool:
        return bool(np.all(self.mean_sq <= self.bound + z * self.se))


def holder_scaling_check(x: AdaptedProcess, params, W: ScalarMartingale, t: float | None,
                         beta: float, lipschitz=1.0, anchor: int = 0) -> HolderTable:
    """Mean squared increments of ``tau -> int_0^t x(tau) dW``.

    ``x`` takes values in ``SupGrid(len(params))``: coordinate ``k`` is the
    integrand at parameter ``params[k]``.  ``lipschitz`` is a constant or a
    per-leaf array ``L`` with ``|x(tau) - x(sigma)| <= L |tau - sigma|**beta``.
    """
    if beta <= 0.5:
        raise ValueError("the continuity criterion needs beta > 1/2")
    params = np.asarray(params, dtype=float)
    v, space = _values(x, W)
    if not isinstance(space, SupGrid) or space.dim != params.size:
        raise ValueError("family must be SupGrid-valued with one coordinate per parameter")
    t = W.filtration.horizon if t is None else float(t)
    I = integrate_elementary(x, W, t).values
    L2 = float(W.omega.probs @ (np.broadcast_to(np.asarray(lipschitz, dtype=float), (W.omega.leaf_count,)) ** 2))
    t_eff = float(W.grid[W.filtration.index_at(t)])
    rows = []
    for k in range(params.size):
        if k == anchor:
            continue
        d = (I[:, k] - I[:, anchor]) ** 2
        mean = float(W.omega.probs @ d)
        n = d.size
        se = float(np.sqrt(W.omega.probs @ (d - mean) ** 2 / max(n - 1, 1))) if n > 1 else 0.0
        dist = abs(params[k] - params[anchor])
        rows.append((dist, mean, se, t_eff * L2 * dist ** (2 * beta)))
    rows = np.array(rows, dtype=float).reshape(-1, 4)
    ok = (rows[:, 0] > 0) & (rows[:, 1] > 0)
    slope = float(np.polyfit(np.log(rows[ok, 0]), np.log(rows[ok, 1]), 1)[0]) if ok.sum() >= 2 else float("nan")
    return HolderTable(rows, slope, beta)
