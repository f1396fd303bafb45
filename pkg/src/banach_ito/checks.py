"""Registry of campaign checks.

A check takes a :class:`Context` and its own parameter dict and returns
:class:`CheckRow` objects.  ``residual`` is always normalised so that a row
passes exactly when ``residual <= tolerance``: relative residuals for exact
identities, clipped excesses for inequalities and z-scores for Monte Carlo
comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import corpus
from .integral import (approximate_elementary, continuity_profile, evaluation_commutes,
                       functional_commutes, holder_scaling_check, integrate_elementary,
                       ito_integral, ito_isometry_residual, l2m_norm, m_norm_process,
                       shift_process)
from .martingale import (EXACT_TREE, ScalarMartingale, martingale_from_config, quadratic_variation,
                         random_walk_martingale, verify_qv_properties)
from .mspace import (FiniteMeasureSpace, LinearOperator, cauchy_schwarz_residual,
                     characterization_norms, circ_multiply, dominating_operator,
                     fubini_norm_check, m_norm, operator_bounds, product_space_norms)
from .prob import (CONVEX_CATALOGUE, FiniteProbabilitySpace, Partition, RandomElement,
                   cond_expectation, expectation, independent, jensen_gap, linear_map,
                   random_scalar)
from .spaces import (ABS_TOL, REL_TOL, DualFunctional, Hilbert, Lp, SeqSup, SupGrid,
                     check_multiplication_axioms, space_from_json)

__all__ = ["CheckRow", "Context", "CHECKS", "run_check", "rel_residual", "excess"]

EXACT_TOL = 1e-12
Z_TOL = 4.0


@dataclass(frozen=True)
class CheckRow:
    check_name: str
    t: float
    lhs: float
    rhs: float
    residual: float
    tolerance: float

    def __post_init__(self):
        for f in ("t", "lhs", "rhs", "residual", "tolerance"):
            object.__setattr__(self, f, float(getattr(self, f)))

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {"check_name": self.check_name, "t": self.t, "lhs": self.lhs, "rhs": self.rhs,
                "residual": self.residual, "tolerance": self.tolerance, "pass": self.passed}


def rel_residual(a, b, abs_tol: float = ABS_TOL) -> float:
    """``(|a - b| - abs_tol)_+ / max(|a|, |b|)``; zero when both vanish."""
    d = max(abs(a - b) - abs_tol, 0.0)
    scale = max(abs(a), abs(b))
    return 0.0 if d == 0 else d / scale


def excess(lhs, rhs, abs_tol: float = ABS_TOL) -> float:
    """Relative amount by which ``lhs <= rhs`` is violated."""
    d = max(lhs - rhs - abs_tol, 0.0)
    return 0.0 if d == 0 else d / max(abs(lhs), abs(rhs))


def _vec_residual(a, b, scale_floor=1.0):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(scale_floor, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


class Context:
    """Shared inputs of one campaign: seed, space and martingale configs."""

    def __init__(self, config: dict, seed: int | None = None):
        self.config = config
        self.seed = int(config["seed"] if seed is None else seed)

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, index]))

    @cached_property
    def space(self):
        spec = self.config.get("space")
        return space_from_json(spec) if spec else SupGrid(2)

    def martingale(self, override: dict | None = None) -> ScalarMartingale:
        cfg = dict(self.config.get("martingale", {"kind": "random_walk", "steps": 4}))
        cfg.setdefault("seed", self.seed)
        cfg.update(override or {})
        return _martingale_cached(tuple(sorted((k, _hashable(v)) for k, v in cfg.items())))

    @property
    def integrand(self) -> dict:
        return self.config.get("integrand", {"family": "random_elementary"})


def _hashable(v):
    return tuple(v) if isinstance(v, list) else v


@lru_cache(maxsize=32)
def _martingale_cached(key):
    return martingale_from_config(dict(key))


@lru_cache(maxsize=64)
def _walk(steps, scale):
    return random_walk_martingale(steps, scale)[2]


def _pick_space(ctx, params, rng):
    if params.get("spaces") == "catalogue":
        return corpus.random_space(rng)
    if "space" in params:
        return space_from_json(params["space"])
    return ctx.space


# --- Itô isometry -----------------------------------------------------------

def check_ito_isometry(ctx, params, rng):
    """Exact isometry on trees for random elementary integrands at every grid time."""
    tol = float(params.get("tolerance", REL_TOL))
    rows = []
    for i in range(int(params.get("instances", 20))):
        space = _pick_space(ctx, params, rng)
        if "max_steps" in params:
            M = _walk(int(rng.integers(1, int(params["max_steps"]) + 1)), float(rng.choice([0.5, 1.0, 2.0])))
        else:
            M = ctx.martingale()
        x = corpus.random_elementary(rng, M.filtration, space)
        worst = None
        for t in M.grid:
            r = ito_isometry_residual(x, M, float(t))
            res = r.residual / max(r.lhs.norm(), r.rhs.norm()) if r.residual > ABS_TOL else 0.0
            if worst is None or res > worst[0]:
                worst = (res, float(t), r.lhs.norm(), r.rhs.norm())
        res, t, lhs, rhs = worst
        rows.append(CheckRow(f"ito_isometry[{i}:{space.kind}]", t, lhs, rhs, res, tol))
    return rows


def check_ito_isometry_mc(ctx, params, rng):
    """Isometry for constant integrands on sampled paths, as z-scores per coordinate."""
    M = ctx.martingale(params.get("martingale"))
    space = _pick_space(ctx, params, rng)
    coords = np.asarray(params.get("coords", np.ones(space.dim)), dtype=float)
    x = corpus.constant_process(M, space, coords)
    t = float(params.get("t", M.filtration.horizon))
    z = integrate_elementary(x, M, t)
    k = M.filtration.index_at(t)
    dq = quadratic_variation(M).increments[:, :k]
    lhs_leaf = space.multiply(z.values, z.values)
    rhs_leaf = np.einsum("nj,njd->nd", dq, space.multiply(x.values[:, :k], x.values[:, :k]))
    d = lhs_leaf - rhs_leaf
    n = d.shape[0]
    rows = []
    for c in range(d.shape[1]):
        se = d[:, c].std(ddof=1) / math.sqrt(n)
        zscore = 0.0 if se == 0 else abs(d[:, c].mean()) / se
        rows.append(CheckRow(f"ito_isometry_mc[{c}]", t, float(lhs_leaf[:, c].mean()),
                             float(rhs_leaf[:, c].mean()), zscore, float(params.get("z", Z_TOL))))
    return rows


def check_ito_integral(ctx, params, rng):
    """Escalated Itô integral of the configured integrand against the full-resolution sum."""
    M = ctx.martingale()
    space = _pick_space(ctx, params, rng)
    x = corpus.integrand_from_config(ctx.integrand, M, space, rng)
    res = ito_integral(x, M, None, float(params.get("target_error", 0.0)))
    direct = integrate_elementary(x, M, None)
    return [CheckRow("ito_integral", M.filtration.horizon, res.error_bound, 0.0,
                     _vec_residual(res.value.values, direct.values), EXACT_TOL)]


# --- conditional expectation --------------------------------------------------

def _condexp_instance(rng, params):
    n = int(rng.integers(2, int(params.get("max_leaves", 64)) + 1))
    p = rng.uniform(0.1, 1.0, size=n)
    omega = FiniteProbabilitySpace(p / p.sum())
    space = corpus.random_space(rng)
    G, H = corpus.random_nested_partitions(rng, n)
    return omega, space, G, H


def check_cond_expectation(ctx, params, rng):
    """Tower, take-out I/II, independence, norm estimate and functional commutation."""
    worst = dict.fromkeys(["tower", "take_out_I", "take_out_II", "independence",
                           "independent_product", "scalar_product_rule", "norm_estimate",
                           "functional_commutation", "defining_property"], 0.0)
    for _ in range(int(params.get("instances", 100))):
        omega, space, G, H = _condexp_instance(rng, params)
        n = omega.leaf_count
        x = RandomElement(omega, space, corpus.random_coords(rng, space, n))
        cx = cond_expectation(x, G)
        worst["tower"] = max(worst["tower"], _vec_residual(cond_expectation(cond_expectation(x, H), G).values, cx.values))
        blockwise = G.block_reduce(np.add, omega.probs[:, None] * (cx.values - x.values))
        worst["defining_property"] = max(worst["defining_property"], _vec_residual(blockwise, 0 * blockwise))
        # G-measurable x and scalar r
        xg = RandomElement(omega, space, corpus.random_measurable(rng, space, G))
        r = random_scalar(omega, rng.standard_normal(n))
        lhs = cond_expectation(xg * r, G).values
        worst["take_out_I"] = max(worst["take_out_I"], _vec_residual(lhs, xg.values * cond_expectation(r, G).values))
        y = RandomElement(omega, space, corpus.random_coords(rng, space, n))
        lhs2 = cond_expectation(xg.times(y), G).values
        rhs2 = space.multiply(xg.values, cond_expectation(y, G).values)
        worst["take_out_II"] = max(worst["take_out_II"], _vec_residual(lhs2, rhs2))
        norms = random_scalar(omega, x.norms())
        gap = cond_expectation(norms, G).values[:, 0] - space.norm(cx.values)
        worst["norm_estimate"] = max(worst["norm_estimate"], max(0.0, -float(gap.min())) / max(1.0, float(norms.values.max())))
        phi = DualFunctional(space, rng.standard_normal(space.dim))
        lhs3 = phi(cx.values)
        rhs3 = cond_expectation(random_scalar(omega, phi(x.values)), G).values[:, 0]
        worst["functional_commutation"] = max(worst["functional_commutation"], _vec_residual(lhs3, rhs3))
        # independence: a product space with x depending on the first factor
        a, b = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        pa, pb = rng.uniform(0.2, 1, a), rng.uniform(0.2, 1, b)
        prod = FiniteProbabilitySpace(pa / pa.sum()).product(FiniteProbabilitySpace(pb / pb.sum()))
        first = np.repeat(np.arange(a), b)
        second = np.tile(np.arange(b), a)
        xi = RandomElement(prod, space, corpus.random_coords(rng, space, a)[first])
        Gi = Partition(second)
        assert independent(Gi, Partition(first), prod)
        worst["independence"] = max(worst["independence"], _vec_residual(
            cond_expectation(xi, Gi).values, np.broadcast_to(expectation(xi).coords, xi.values.shape)))
        yi = RandomElement(prod, space, corpus.random_coords(rng, space, b)[second])
        worst["independent_product"] = max(worst["independent_product"], _vec_residual(
            expectation(xi.times(yi)).coords, space.multiply(expectation(xi).coords, expectation(yi).coords)))
        ri = random_scalar(prod, rng.standard_normal(b)[second])
        worst["scalar_product_rule"] = max(worst["scalar_product_rule"], _vec_residual(
            expectation(xi * ri).coords, expectation(ri).coords[0] * expectation(xi).coords))
    tol = float(params.get("tolerance", EXACT_TOL))
    return [CheckRow(f"cond_expectation.{k}", 0.0, v, 0.0, v, tol) for k, v in worst.items()]


def check_jensen(ctx, params, rng):
    """Conditional Jensen gaps: non-negative for the catalogue, zero for linear maps."""
    worst = dict.fromkeys(list(CONVEX_CATALOGUE) + ["linear"], 0.0)
    mins = dict.fromkeys(worst, math.inf)
    for _ in range(int(params.get("instances", 100))):
        omega, space, G, _ = _condexp_instance(rng, params)
        x = RandomElement(omega, space, corpus.random_coords(rng, space, omega.leaf_count))
        for name, make in CONVEX_CATALOGUE.items():
            g = jensen_gap(make(), x, G).values
            mins[name] = min(mins[name], float(g.min()))
            worst[name] = max(worst[name], max(0.0, -float(g.min())) / max(1.0, float(np.abs(x.values).max()) ** 2))
        A = rng.standard_normal((3, space.dim))
        g = jensen_gap(linear_map(A), x, G).values
        mins["linear"] = min(mins["linear"], float(g.min()))
        worst["linear"] = max(worst["linear"], float(np.abs(g).max()) / max(1.0, float(np.abs(x.values).max())))
    tol = float(params.get("tolerance", REL_TOL))
    return [CheckRow(f"jensen.{k}", 0.0, mins[k], 0.0, worst[k], EXACT_TOL if k == "linear" else tol)
            for k in worst]


# --- quadratic variation ------------------------------------------------------

def check_qv_properties(ctx, params, rng):
    """The three defining properties of realized quadratic variation."""
    M = ctx.martingale(params.get("martingale"))
    rep = verify_qv_properties(M)
    T = M.filtration.horizon
    rows = [CheckRow("qv.starts_at_zero", 0.0, 0.0, 0.0, 0.0 if rep.starts_at_zero else 1.0, 0.0),
            CheckRow("qv.jump_identity", T, rep.jump_residual, 0.0, rep.jump_residual, EXACT_TOL)]
    if M.exact:
        rows.append(CheckRow("qv.martingale", T, rep.martingale_residual, 0.0, rep.martingale_residual, EXACT_TOL))
    else:
        rows.append(CheckRow("qv.martingale_z", T, rep.max_z, 0.0, rep.max_z, Z_TOL))
    qv = quadratic_variation(M)
    cfg = ctx.config.get("martingale", {})
    if M.exact and cfg.get("kind", "random_walk") == "random_walk":
        scale = float(cfg.get("scale", 1.0))
        expect = np.arange(M.grid.size) * scale ** 2
        res = _vec_residual(qv.paths, np.broadcast_to(expect, qv.paths.shape))
        rows.append(CheckRow("qv.random_walk_linear", T, float(qv.paths[0, -1]), float(expect[-1]), res, EXACT_TOL))
    if not M.exact and cfg.get("kind") == "brownian":
        end = qv.paths[:, -1]
        se = end.std(ddof=1) / math.sqrt(end.size)
        rows.append(CheckRow("qv.mean_at_horizon_z", T, float(end.mean()), T, abs(end.mean() - T) / se, Z_TOL))
    return rows


# --- M-norm calculus -----------------------------------------------------------

def check_m_norm(ctx, params, rng):
    """M-norm below the L2 norm, Hilbert equality, Cauchy-Schwarz."""
    est, heq, cs = 0.0, 0.0, 0.0
    count = int(params.get("instances", 1000))
    M = ctx.martingale()
    for _ in range(count):
        space = corpus.random_space(rng)
        x = corpus.random_adapted(rng, M.filtration, space)
        est = max(est, excess(m_norm_process(x, M), l2m_norm(x, M)))
        h = corpus.random_adapted(rng, M.filtration, Hilbert(3))
        heq = max(heq, rel_residual(m_norm_process(h, M), l2m_norm(h, M), 0.0))
        mu = FiniteMeasureSpace(rng.uniform(0.1, 2.0, size=int(rng.integers(1, 6))))
        a = corpus.random_coords(rng, space, mu.size)
        b = corpus.random_coords(rng, space, mu.size)
        lhs, rhs, _ = cauchy_schwarz_residual(a, b, space, mu)
        cs = max(cs, excess(lhs, rhs))
    return [CheckRow("m_norm.estimate", 0.0, est, 0.0, est, REL_TOL),
            CheckRow("m_norm.hilbert_equality", 0.0, heq, 0.0, heq, EXACT_TOL),
            CheckRow("m_norm.cauchy_schwarz", 0.0, cs, 0.0, cs, REL_TOL)]


def _operator_instance(rng, params):
    X = corpus.random_space(rng)
    if isinstance(X, Hilbert):
        V = Hilbert(int(rng.integers(1, 5)))
    elif isinstance(X, SeqSup):
        V = X
    else:
        V = [SupGrid(3), X][int(rng.integers(2))]
    A = LinearOperator(rng.standard_normal((V.dim, X.dim)), X, V)
    return X, A, dominating_operator(A)


def check_mapping_estimates(ctx, params, rng):
    """Estimates (i) to (v) for the M-norm on randomized instances."""
    worst = dict.fromkeys(["i", "ii", "iii", "iv", "v", "domination"], 0.0)
    inexact = 0
    for _ in range(int(params.get("instances", 1000))):
        X, A, B = _operator_instance(rng, params)
        n = int(rng.integers(2, 9))
        p = rng.uniform(0.1, 1.0, size=n)
        omega = FiniteProbabilitySpace(p / p.sum())
        mu = FiniteMeasureSpace(omega.probs * float(rng.uniform(0.5, 3.0)))
        Y = X.mult_target
        C = LinearOperator(rng.standard_normal((2, Y.dim)), Y, SupGrid(2))
        x = corpus.random_coords(rng, X, n)
        y = corpus.random_coords(rng, X, n)
        G = corpus.random_partition(rng, n)
        rep = operator_bounds(A, B, x, mu, C=C, y=y, samples=corpus.random_coords(rng, X, 8))
        rep_i = operator_bounds(A, B, x, FiniteMeasureSpace(omega.probs), G=G, omega=omega)
        inexact += not rep.norms_exact
        for k in ("ii", "iii", "iv", "v"):
            worst[k] = max(worst[k], excess(*rep.bounds[k]))
        worst["i"] = max(worst["i"], excess(*rep_i.bounds["i"]))
        worst["domination"] = max(worst["domination"], max(0.0, -rep.domination_gap))
    rows = [CheckRow(f"mapping.{k}", 0.0, v, 0.0, v, REL_TOL) for k, v in worst.items()]
    rows.append(CheckRow("mapping.inexact_norms", 0.0, float(inexact), 0.0, float(inexact), 0.0))
    return rows


def check_product_space(ctx, params, rng):
    """Two-sided product bound with constants 1 and 2, and the equality witness."""
    lower = upper = 0.0
    for _ in range(int(params.get("instances", 1000))):
        s1, s2 = corpus.random_space(rng), corpus.random_space(rng)
        mu = FiniteMeasureSpace(rng.uniform(0.1, 2.0, size=int(rng.integers(1, 6))))
        a, b = corpus.random_coords(rng, s1, mu.size), corpus.random_coords(rng, s2, mu.size)
        mp, mpair, _ = product_space_norms(a, b, s1, s2, mu)
        lower = max(lower, excess(mp ** 2, mpair ** 2))
        upper = max(upper, excess(mpair ** 2, 2 * mp ** 2))
    s = corpus.random_space(rng)
    mu = FiniteMeasureSpace(rng.uniform(0.1, 2.0, size=3))
    a = corpus.random_coords(rng, s, 3)
    a[0, 0] = 1.0
    _, _, ratio = product_space_norms(a, a, s, s, mu)
    return [CheckRow("product.lower", 0.0, lower, 0.0, lower, REL_TOL),
            CheckRow("product.upper", 0.0, upper, 0.0, upper, REL_TOL),
            CheckRow("product.equality_witness", 0.0, ratio, 2.0, rel_residual(ratio, 2.0, 0.0), EXACT_TOL)]


def check_circ(ctx, params, rng):
    """The o-multiplication satisfies the multiplication axioms for the M-norm."""
    bound, pos = 0.0, 0.0
    for _ in range(int(params.get("instances", 200))):
        s = corpus.random_space(rng)
        mu = FiniteMeasureSpace(rng.uniform(0.1, 2.0, size=int(rng.integers(1, 6))))
        a, b = corpus.random_coords(rng, s, mu.size), corpus.random_coords(rng, s, mu.size)
        lhs = circ_multiply(a, b, s, mu).norm()
        bound = max(bound, excess(lhs, m_norm(a, s, mu) * m_norm(b, s, mu)))
        sq = circ_multiply(a, a, s, mu).coords
        pos = max(pos, max(0.0, -float(sq.min())))
    return [CheckRow("circ.norm_bound", 0.0, bound, 0.0, bound, REL_TOL),
            CheckRow("circ.positivity", 0.0, pos, 0.0, pos, ABS_TOL)]


def check_fubini(ctx, params, rng):
    worst = 0.0
    for _ in range(int(params.get("instances", 200))):
        s = corpus.random_space(rng)
        ns, nt = params.get("shape", [2, 3])
        mu = FiniteMeasureSpace(rng.uniform(0.1, 2.0, size=ns))
        lam = FiniteMeasureSpace(rng.uniform(0.1, 2.0, size=nt))
        x = rng.standard_normal((ns, nt, s.dim))
        nested, flat = fubini_norm_check(x, s, mu, lam)
        worst = max(worst, rel_residual(nested, flat, 0.0))
    return [CheckRow("fubini", 0.0, worst, 0.0, worst, EXACT_TOL)]


def check_characterization(ctx, params, rng):
    """M-norm against the coordinate description for SupGrid and Lp integrands."""
    M = ctx.martingale()
    spaces = [s for s in corpus.catalogue_spaces(rng) if isinstance(s, (SupGrid, Lp))]
    worst = dict.fromkeys(["supgrid", "lp"], 0.0)
    for i in range(int(params.get("instances", 100))):
        s = spaces[i % len(spaces)]
        rep = characterization_norms(corpus.random_adapted(rng, M.filtration, s), M)
        worst[s.kind] = max(worst[s.kind], rel_residual(rep.m_norm, rep.coordinate_norm, 0.0))
    return [CheckRow(f"characterization.{k}", 0.0, v, 0.0, v, REL_TOL) for k, v in worst.items()]


def check_mult_axioms(ctx, params, rng):
    rows = []
    for s in corpus.catalogue_spaces(rng):
        rep = check_multiplication_axioms(s, int(params.get("samples", 1000)), int(rng.integers(2 ** 31)))
        rows.append(CheckRow(f"multiplication.{s.kind}", 0.0, rep.max_violation, 0.0, rep.max_violation, REL_TOL))
    return rows


def check_commutation(ctx, params, rng):
    """Functional and point-evaluation commutation with the integral."""
    M = ctx.martingale()
    fc, ev, psi = 0.0, 0.0, 0.0
    for _ in range(int(params.get("instances", 50))):
        s = corpus.random_space(rng)
        x = corpus.random_adapted(rng, M.filtration, s)
        phi = DualFunctional(s, rng.standard_normal(s.dim))
        rep = functional_commutes(phi, x, M)
        scale = max(1.0, float(np.abs(integrate_elementary(x, M).values).max()))
        fc = max(fc, rep.residual / scale)
        g = corpus.random_adapted(rng, M.filtration, SupGrid(3))
        k = int(rng.integers(3))
        ev = max(ev, evaluation_commutes(g, M, None, k))
        crep = functional_commutes(DualFunctional.coordinate(g.space, k), g, M,
                                   psi=DualFunctional.coordinate(g.space.mult_target, k))
        psi = max(psi, max(0.0, -crep.psi_gap))
    return [CheckRow("commutation.functional", M.filtration.horizon, fc, 0.0, fc, REL_TOL),
            CheckRow("commutation.evaluation", M.filtration.horizon, ev, 0.0, ev, EXACT_TOL),
            CheckRow("commutation.psi_certificate", M.filtration.horizon, psi, 0.0, psi, REL_TOL)]


# --- approximation, shift, continuity -----------------------------------------

def _approx_integrand(ctx, params, rng, M):
    cfg = params.get("integrand") or ctx.integrand
    if cfg.get("family") in (None, "random_elementary"):
        cfg = {"family": "ramp"}
    return corpus.integrand_from_config(cfg, M, _pick_space(ctx, params, rng), rng)


def _monotone_rows(name, values, errors, decreasing_in_value):
    rows, prev = [], None
    for v, e in zip(values, errors):
        if prev is None:
            res = 0.0
        else:
            res = excess(e, prev) if decreasing_in_value else excess(prev, e)
        rows.append(CheckRow(f"{name}[{v:g}]", float(v), float(e), float("nan") if prev is None else float(prev),
                             res, EXACT_TOL))
        prev = e
    return rows


def check_approximation(ctx, params, rng):
    """Elementary approximation error over coarseness ``N``, then full resolution."""
    M = ctx.martingale()
    x = _approx_integrand(ctx, params, rng, M)
    m = M.filtration.steps
    Ns = sorted(int(n) for n in params.get("values", [n for n in (2, 4, 8, 16) if m % n == 0]))
    errs = [approximate_elementary(x, M, N)[1] for N in Ns]
    rows = _monotone_rows("approximation", Ns, errs, True)
    if params.get("full_resolution", True):
        full = approximate_elementary(x, M, m)[1]
        rows.append(CheckRow(f"approximation.full[{m}]", float(m), full, 0.0, full, EXACT_TOL))
    return rows


def check_shift(ctx, params, rng):
    """Shift error ``||x_s - x||`` as the shift halves."""
    M = ctx.martingale()
    x = _approx_integrand(ctx, params, rng, M)
    g = M.grid
    shifts = params.get("values")
    if shifts is None:
        m = M.filtration.steps
        shifts = [float(g[k]) for k in (m // 2, m // 4, m // 8, m // 16, 0) if k >= 0]
    shifts = sorted(set(float(s) for s in shifts))
    errs = [l2m_norm(shift_process(x.to_adapted(), s) - x, M) for s in shifts]
    return _monotone_rows("shift", shifts, errs, False)


def _norm_se(samples, Y):
    """Delta-method standard error of ``||mean(samples)||_Y``."""
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    base = float(Y.norm(mean))
    h = 1e-7 * max(1.0, float(np.abs(mean).max()))
    grad = np.array([(float(Y.norm(mean + h * e)) - base) / h for e in np.eye(mean.size)])
    cov = np.atleast_2d(np.cov(samples, rowvar=False))
    return float(np.sqrt(max(grad @ cov @ grad, 0.0) / n))


def check_continuity(ctx, params, rng):
    """Profile ``t -> ||int_0^t x dM||_{M_t}`` along decreasing times."""
    M = ctx.martingale(params.get("martingale"))
    space = _pick_space(ctx, params, rng)
    coords = np.asarray(params.get("coords", np.ones(space.dim)), dtype=float)
    x = corpus.constant_process(M, space, coords)
    T = M.filtration.horizon
    times = sorted(float(t) for t in params.get("values", [T, T / 2, T / 4, T / 8]))
    prof = continuity_profile(x, M, times)
    rows = []
    if M.exact:
        # for constant x the profile squared is ||x**2|| E[[M](t)] <= ||x||**2 E[[M](t)],
        # which is the sqrt(t) envelope whenever E[[M](t)] = t
        x0 = float(space.norm(coords))
        qv = quadratic_variation(M).paths
        for t, p in zip(times, prof):
            env = x0 * math.sqrt(float(M.omega.probs @ qv[:, M.filtration.index_at(t)]))
            rows.append(CheckRow(f"continuity.envelope[{t:g}]", t, float(p), env, excess(p, env), REL_TOL))
        rows += _monotone_rows("continuity.monotone", times, prof, False)
        return rows
    Y = space.mult_target
    prev = None
    for t, p in zip(times, prof):
        z = integrate_elementary(x, M, t)
        sq = space.multiply(z.values, z.values)
        se = _norm_se(sq, Y) / (2 * max(p, 1e-300))
        if prev is None:
            res, rhs = 0.0, float("nan")
        else:
            pt, pp, pse = prev
            # smaller t must give a smaller profile, allowing Z_TOL standard errors
            res, rhs = max(0.0, pp - p) / max(math.hypot(se, pse), 1e-300), pp
        rows.append(CheckRow(f"continuity.mc[{t:g}]", t, float(p), rhs, res, Z_TOL))
        prev = (t, p, se)
    return rows


def check_holder(ctx, params, rng):
    """Mean squared parameter increments of the integral against the Hölder bound."""
    W = ctx.martingale(params.get("martingale"))
    params_ = np.asarray(params.get("params", [0.0, 0.05, 0.1, 0.2, 0.4, 0.8]), dtype=float)
    t = float(params.get("t", W.filtration.horizon))
    rows = []
    lin = holder_scaling_check(corpus.linear_family(W, params_), params_, W, t, 1.0, 1.0)
    for d, m, se, b in lin.rows:
        rows.append(CheckRow(f"holder.linear[{d:g}]", t, float(m), float(b),
                             0.0 if se == 0 else abs(m - b) / se, Z_TOL))
    beta = float(params.get("beta", 0.75))
    pw = holder_scaling_check(corpus.power_family(W, params_, beta), params_, W, t, beta, 1.0)
    for d, m, se, b in pw.rows:
        rows.append(CheckRow(f"holder.bound[{d:g}]", t, float(m), float(b),
                             0.0 if m <= b or se == 0 else (m - b) / se, Z_TOL))
    target = 2 * beta - 0.1
    rows.append(CheckRow("holder.slope", t, pw.slope, target, max(0.0, target - pw.slope), 0.0))
    return rows


CHECKS = {
    "ito_isometry": check_ito_isometry,
    "ito_isometry_mc": check_ito_isometry_mc,
    "ito_integral": check_ito_integral,
    "cond_expectation": check_cond_expectation,
    "jensen": check_jensen,
    "qv_properties": check_qv_properties,
    "m_norm": check_m_norm,
    "mapping_estimates": check_mapping_estimates,
    "product_space": check_product_space,
    "circ": check_circ,
    "fubini": check_fubini,
    "characterization": check_characterization,
    "multiplication_axioms": check_mult_axioms,
    "commutation": check_commutation,
    "approximation": check_approximation,
    "shift": check_shift,
    "continuity": check_continuity,
    "holder": check_holder,
}


def run_check(ctx: Context, index: int, spec: dict) -> list[CheckRow]:
    """Run the ``index``-th check of a campaign with its own RNG stream."""
    name = spec["name"]
    return CHECKS[name](ctx, spec.get("params", {}), ctx.rng(index))
